#pragma once

// First-order surrogates used by successive convex approximation. Each one
// is tight at its expansion point and bounds its target from one side:
//
//   phi_lb   <= theta * beta
//   theta_ub >= theta * beta
//   psi_lb   <= |h^H p|^2 / rho
//   omega_lb <= |g^H pa|^2 + |g^H pb|^2
//   gamma_tangent <= 2^beta
//
// Besides plain evaluators, every surrogate is exposed as a coefficient
// bundle (constant + linear + squared-linear parts) over its own arguments
// so the subproblem assembler can stamp it into constraint rows. Complex
// vectors enter in realified form [Re p; Im p].

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

#include "crs/channel_model.hpp"
#include "crs/error.hpp"

namespace crs {

using Eigen::VectorXd;

inline VectorXd realify(const CVec& v) {
  VectorXd r(2 * v.size());
  r.head(v.size()) = v.real();
  r.tail(v.size()) = v.imag();
  return r;
}

inline CVec complexify(const VectorXd& r) {
  const auto n = r.size() / 2;
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {r[i], r[n + i]};
  return v;
}

// Real row vectors (a, b) with Re(h^H p) = a.x and Im(h^H p) = b.x for
// x = realify(p), so |h^H p|^2 = (a.x)^2 + (b.x)^2.
struct GainForms {
  VectorXd re;
  VectorXd im;
};

inline GainForms gain_forms(const CVec& h) {
  const auto n = h.size();
  GainForms f{VectorXd(2 * n), VectorXd(2 * n)};
  f.re.head(n) = h.real();
  f.re.tail(n) = h.imag();
  f.im.head(n) = -h.imag();
  f.im.tail(n) = h.real();
  return f;
}

// ---------------------------------------------------------------------------
// Products theta * beta

struct ExpansionPair {
  double theta0;
  double beta0;
};

// c0 + c_theta * theta + c_beta * beta + w * (theta + s * beta)^2
struct PairBundle {
  double c0 = 0, c_theta = 0, c_beta = 0;
  double w = 0;
  double s = 0;

  double operator()(double theta, double beta) const {
    const double q = theta + s * beta;
    return c0 + c_theta * theta + c_beta * beta + w * q * q;
  }
  std::array<double, 2> gradient(double theta, double beta) const {
    const double q = theta + s * beta;
    return {c_theta + 2 * w * q, c_beta + 2 * w * s * q};
  }
};

// Minorant of theta * beta: linearize (theta + beta)^2 / 4, keep
// -(theta - beta)^2 / 4 exact.
inline PairBundle phi_bundle(ExpansionPair at) {
  const double a = at.theta0 + at.beta0;
  return {-0.25 * a * a, 0.5 * a, 0.5 * a, -0.25, -1.0};
}

inline double phi_lb(double theta, double beta, ExpansionPair at) {
  return phi_bundle(at)(theta, beta);
}

// Majorant of theta * beta: keep (theta + beta)^2 / 4 exact, linearize
// -(theta - beta)^2 / 4.
inline PairBundle theta_bundle(ExpansionPair at) {
  const double d = at.theta0 - at.beta0;
  return {0.25 * d * d, -0.5 * d, 0.5 * d, 0.25, 1.0};
}

inline double theta_ub(double theta, double beta, ExpansionPair at) {
  return theta_bundle(at)(theta, beta);
}

// ---------------------------------------------------------------------------
// Quadratic-over-linear |h^H p|^2 / rho, linearized at (p0, rho0).

struct PsiBundle {
  VectorXd coeff_p;  // over realify(p)
  double coeff_rho = 0;

  double operator()(const VectorXd& p, double rho) const {
    return coeff_p.dot(p) + coeff_rho * rho;
  }
};

inline PsiBundle psi_bundle(const CVec& h, const CVec& p0, double rho0) {
  if (!(rho0 > 0)) throw DomainError("psi expansion requires rho0 > 0");
  if (h.size() != p0.size()) throw InvalidDimension("psi: h and p0 differ in length");
  const auto f = gain_forms(h);
  const Complex z0 = h.dot(p0);
  PsiBundle b;
  b.coeff_p = (2.0 / rho0) * (z0.real() * f.re + z0.imag() * f.im);
  b.coeff_rho = -std::norm(z0) / (rho0 * rho0);
  return b;
}

inline double psi_lb(const CVec& p, const CVec& h, double rho, const CVec& p0,
                     double rho0) {
  if (!(rho > 0)) throw DomainError("psi requires rho > 0");
  return psi_bundle(h, p0, rho0)(realify(p), rho);
}

// ---------------------------------------------------------------------------
// |g^H pa|^2 + |g^H pb|^2 linearized at (pa0, pb0).

struct OmegaBundle {
  VectorXd coeff_a;  // over realify(pa)
  VectorXd coeff_b;  // over realify(pb)
  double c0 = 0;

  double operator()(const VectorXd& pa, const VectorXd& pb) const {
    return c0 + coeff_a.dot(pa) + coeff_b.dot(pb);
  }
};

inline OmegaBundle omega_bundle(const CVec& g, const CVec& pa0, const CVec& pb0) {
  if (g.size() != pa0.size() || g.size() != pb0.size())
    throw InvalidDimension("omega: vector lengths differ");
  const auto f = gain_forms(g);
  const Complex za = g.dot(pa0), zb = g.dot(pb0);
  OmegaBundle b;
  b.coeff_a = 2.0 * (za.real() * f.re + za.imag() * f.im);
  b.coeff_b = 2.0 * (zb.real() * f.re + zb.imag() * f.im);
  b.c0 = -std::norm(za) - std::norm(zb);
  return b;
}

inline double omega_lb(const CVec& pa, const CVec& pb, const CVec& g,
                       const CVec& pa0, const CVec& pb0) {
  return omega_bundle(g, pa0, pb0)(realify(pa), realify(pb));
}

// ---------------------------------------------------------------------------
// Tangent of 2^beta at beta0.

struct GammaBundle {
  double c0 = 0;
  double slope = 0;

  double operator()(double beta) const { return c0 + slope * beta; }
};

inline GammaBundle gamma_bundle(double beta0) {
  const double e = std::exp2(beta0);
  const double slope = std::numbers::ln2 * e;
  return {e - slope * beta0, slope};
}

inline double gamma_tangent(double beta, double beta0) {
  return std::exp2(beta0) * (1.0 + std::numbers::ln2 * (beta - beta0));
}

}  // namespace crs
