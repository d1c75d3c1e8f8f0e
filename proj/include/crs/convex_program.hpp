#pragma once

// A smooth convex program in inequality form,
//
//   maximize   objective(x)
//   subject to f_i(x) <= 0,  lower <= x <= upper,
//
// where every f_i belongs to one of five fixed families that are convex by
// construction. Variables with lower == upper are fixed.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "crs/error.hpp"

namespace crs {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse affine function sum_k coeff_k * x[index_k] + constant.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinearForm& add(int index, double coeff) {
    if (coeff != 0.0) terms.emplace_back(index, coeff);
    return *this;
  }
  LinearForm& add(const LinearForm& other, double scale = 1.0) {
    for (auto [i, c] : other.terms) add(i, scale * c);
    constant += scale * other.constant;
    return *this;
  }
  LinearForm& shift(double c) {
    constant += c;
    return *this;
  }

  double operator()(const VectorXd& x) const {
    double v = constant;
    for (auto [i, c] : terms) v += c * x[i];
    return v;
  }

  void scatter(VectorXd& g, double scale) const {
    for (auto [i, c] : terms) g[i] += scale * c;
  }

  // H += w * r r^T
  void outer(MatrixXd& h, double w) const {
    for (auto [i, ci] : terms)
      for (auto [j, cj] : terms) h(i, j) += w * ci * cj;
  }

  // a_r^T b_r for the linear parts
  friend double dot(const LinearForm& a, const LinearForm& b) {
    double s = 0;
    for (auto [i, ci] : a.terms)
      for (auto [j, cj] : b.terms)
        if (i == j) s += ci * cj;
    return s;
  }
};

enum class BlockKind {
  kAffine,          // a(x)
  kQuadratic,       // w * sum_j l_j(x)^2 + a(x),             w > 0
  kQuadOverLinear,  // sum_j l_j(x)^2 / d(x) + a(x),          d(x) > 0
  kExponential,     // 2^{e(x)} + a(x)
  kPowerBall,       // sum_{i in S} x_i^2 + a(x)
};

inline const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::kAffine: return "affine";
    case BlockKind::kQuadratic: return "quadratic";
    case BlockKind::kQuadOverLinear: return "quad-over-linear";
    case BlockKind::kExponential: return "exponential";
    case BlockKind::kPowerBall: return "power-ball";
  }
  return "?";
}

// One constraint f(x) <= 0.
struct Constraint {
  BlockKind kind = BlockKind::kAffine;
  std::string name;
  LinearForm affine;
  std::vector<LinearForm> squares;  // quadratic / quad-over-linear numerator
  double weight = 1.0;              // quadratic only
  LinearForm denominator;           // quad-over-linear
  LinearForm exponent;              // exponential
  std::vector<int> ball;            // power-ball

  static Constraint affine_le(std::string name, LinearForm a) {
    Constraint c;
    c.kind = BlockKind::kAffine;
    c.name = std::move(name);
    c.affine = std::move(a);
    return c;
  }

  // True when x lies in the domain where f is defined and smooth.
  bool in_domain(const VectorXd& x) const {
    if (kind == BlockKind::kQuadOverLinear) return denominator(x) > 0.0;
    return true;
  }

  double value(const VectorXd& x) const {
    double v = affine(x);
    switch (kind) {
      case BlockKind::kAffine:
        break;
      case BlockKind::kQuadratic: {
        double s = 0;
        for (const auto& l : squares) s += l(x) * l(x);
        v += weight * s;
        break;
      }
      case BlockKind::kQuadOverLinear: {
        double s = 0;
        for (const auto& l : squares) s += l(x) * l(x);
        v += s / denominator(x);
        break;
      }
      case BlockKind::kExponential:
        v += std::exp2(exponent(x));
        break;
      case BlockKind::kPowerBall:
        for (int i : ball) v += x[i] * x[i];
        break;
    }
    return v;
  }

  // grad += scale * grad f(x)
  void add_gradient(const VectorXd& x, VectorXd& grad, double scale) const {
    affine.scatter(grad, scale);
    switch (kind) {
      case BlockKind::kAffine:
        break;
      case BlockKind::kQuadratic:
        for (const auto& l : squares) l.scatter(grad, scale * 2.0 * weight * l(x));
        break;
      case BlockKind::kQuadOverLinear: {
        const double d = denominator(x);
        double q = 0;
        for (const auto& l : squares) {
          const double lv = l(x);
          q += lv * lv;
          l.scatter(grad, scale * 2.0 * lv / d);
        }
        denominator.scatter(grad, -scale * q / (d * d));
        break;
      }
      case BlockKind::kExponential: {
        const double e = std::exp2(exponent(x));
        exponent.scatter(grad, scale * std::numbers::ln2 * e);
        break;
      }
      case BlockKind::kPowerBall:
        for (int i : ball) grad[i] += scale * 2.0 * x[i];
        break;
    }
  }

  VectorXd gradient(const VectorXd& x) const {
    VectorXd g = VectorXd::Zero(x.size());
    add_gradient(x, g, 1.0);
    return g;
  }

  // hess += scale * hess f(x)
  void add_hessian(const VectorXd& x, MatrixXd& hess, double scale) const {
    switch (kind) {
      case BlockKind::kAffine:
        break;
      case BlockKind::kQuadratic:
        for (const auto& l : squares) l.outer(hess, scale * 2.0 * weight);
        break;
      case BlockKind::kQuadOverLinear: {
        const double d = denominator(x);
        double q = 0;
        for (const auto& l : squares) {
          const double lv = l(x);
          q += lv * lv;
          l.outer(hess, scale * 2.0 / d);
          // cross terms -(2 lv / d^2)(r d^T + d r^T)
          const double w = -scale * 2.0 * lv / (d * d);
          for (auto [i, ci] : l.terms)
            for (auto [j, cj] : denominator.terms) {
              hess(i, j) += w * ci * cj;
              hess(j, i) += w * ci * cj;
            }
        }
        denominator.outer(hess, scale * 2.0 * q / (d * d * d));
        break;
      }
      case BlockKind::kExponential: {
        const double e = std::exp2(exponent(x));
        exponent.outer(hess, scale * std::numbers::ln2 * std::numbers::ln2 * e);
        break;
      }
      case BlockKind::kPowerBall:
        for (int i : ball) hess(i, i) += scale * 2.0;
        break;
    }
  }

  MatrixXd hessian(const VectorXd& x) const {
    MatrixXd h = MatrixXd::Zero(x.size(), x.size());
    add_hessian(x, h, 1.0);
    return h;
  }
};

struct ConvexProgram {
  std::vector<std::string> var_names;
  VectorXd lower;
  VectorXd upper;
  LinearForm objective;  // maximized
  std::vector<Constraint> constraints;

  int num_vars() const { return static_cast<int>(var_names.size()); }

  int add_var(std::string name, double lo = -kInf, double hi = kInf) {
    var_names.push_back(std::move(name));
    const auto n = static_cast<Eigen::Index>(var_names.size());
    lower.conservativeResize(n);
    upper.conservativeResize(n);
    lower[n - 1] = lo;
    upper[n - 1] = hi;
    return static_cast<int>(n - 1);
  }

  void fix(int index, double value) {
    lower[index] = value;
    upper[index] = value;
  }

  bool is_fixed(int index) const { return lower[index] == upper[index]; }

  int count(BlockKind k) const {
    int n = 0;
    for (const auto& c : constraints) n += c.kind == k;
    return n;
  }

  // max(0, largest constraint or bound violation)
  double max_violation(const VectorXd& x) const {
    double v = 0.0;
    for (const auto& c : constraints) v = std::max(v, c.value(x));
    for (int i = 0; i < num_vars(); ++i) {
      v = std::max(v, lower[i] - x[i]);
      v = std::max(v, x[i] - upper[i]);
    }
    return v;
  }
};

// Text dump listing variables and constraint blocks.
inline void dump(const ConvexProgram& p, std::ostream& os) {
  auto form = [&](const LinearForm& l) {
    os << l.constant;
    for (auto [i, c] : l.terms)
      os << (c < 0 ? " - " : " + ") << std::abs(c) << "*" << p.var_names[i];
  };
  os << "variables " << p.num_vars() << "\n";
  for (int i = 0; i < p.num_vars(); ++i)
    os << "  [" << i << "] " << p.var_names[i] << " in [" << p.lower[i] << ", "
       << p.upper[i] << "]\n";
  os << "maximize ";
  form(p.objective);
  os << "\nconstraints " << p.constraints.size() << "\n";
  for (const auto& c : p.constraints) {
    os << "  " << to_string(c.kind) << " " << c.name << ":";
    switch (c.kind) {
      case BlockKind::kAffine:
        break;
      case BlockKind::kQuadratic:
        os << " " << c.weight << " * sum of squares of";
        for (const auto& l : c.squares) { os << " ("; form(l); os << ")"; }
        break;
      case BlockKind::kQuadOverLinear:
        os << " sum of squares of";
        for (const auto& l : c.squares) { os << " ("; form(l); os << ")"; }
        os << " over ("; form(c.denominator); os << ")";
        break;
      case BlockKind::kExponential:
        os << " 2^("; form(c.exponent); os << ")";
        break;
      case BlockKind::kPowerBall:
        os << " squared norm of {";
        for (std::size_t k = 0; k < c.ball.size(); ++k)
          os << (k ? ", " : "") << p.var_names[c.ball[k]];
        os << "}";
        break;
    }
    os << " + (";
    form(c.affine);
    os << ") <= 0\n";
  }
}

}  // namespace crs
