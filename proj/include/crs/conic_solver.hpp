#pragma once

// Log-barrier interior-point method for the smooth convex programs in
// convex_program.hpp. Damped Newton centering with backtracking line search;
// a slack-variable Phase I locates a strictly feasible start when needed.
//
// All linear algebra is dense and sequential, so results are bitwise
// reproducible for identical (program, config, warm start).

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <vector>

#include "crs/convex_program.hpp"

namespace crs {

struct SolverConfig {
  double kkt_tol = 1e-8;
  int max_iters = 100;             // Newton steps per solve, Phase I included
  double initial_weight = 1.0;     // barrier weight w; tau = 1 / w
  double reduction_factor = 0.05;  // w <- reduction_factor * w per stage
  double centering_tol = 1e-9;     // stop centering when decrement^2 / 2 <= this
  double armijo = 0.25;
  double backtrack = 0.5;
  int verbosity = 0;
  std::ostream* log = nullptr;

  void validate() const {
    if (!(kkt_tol > 0)) throw DomainError("kkt_tol must be positive");
    if (!(reduction_factor > 0 && reduction_factor < 1))
      throw DomainError("reduction_factor must lie in (0, 1)");
    if (!(initial_weight > 0)) throw DomainError("initial_weight must be positive");
    if (max_iters < 1) throw DomainError("max_iters must be positive");
  }
};

enum class SolverStatus { kOptimal, kMaxIters, kInfeasible, kNumericalFailure };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::kOptimal: return "optimal";
    case SolverStatus::kMaxIters: return "max-iters";
    case SolverStatus::kInfeasible: return "infeasible-detected";
    case SolverStatus::kNumericalFailure: return "numerical-failure";
  }
  return "?";
}

struct KktResiduals {
  double stationarity = 0;
  double primal = 0;
  double complementarity = 0;

  double max() const { return std::max({stationarity, primal, complementarity}); }
};

struct SolverResult {
  VectorXd x;
  double objective = 0;
  SolverStatus status = SolverStatus::kNumericalFailure;
  KktResiduals residuals;
  VectorXd multipliers;        // one per constraint
  VectorXd lower_multipliers;  // one per variable, 0 where unbounded or fixed
  VectorXd upper_multipliers;
  double barrier_weight = 0;
  int iterations = 0;
  int phase1_iterations = 0;
  double wall_ms = 0;
  bool merit_monotone = true;  // every accepted step decreased the stage merit
  double max_violation = 0;    // only meaningful for kInfeasible
};

// Residuals recomputed from scratch out of a primal point and multipliers.
// The objective is maximized, i.e. we test the KKT system of min -c^T x.
inline KktResiduals compute_kkt(const ConvexProgram& p, const VectorXd& x,
                                const VectorXd& lambda, const VectorXd& mu_lo,
                                const VectorXd& mu_hi) {
  const int n = p.num_vars();
  VectorXd r = VectorXd::Zero(n);
  p.objective.scatter(r, -1.0);
  KktResiduals k;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    const double li = lambda[static_cast<Eigen::Index>(i)];
    c.add_gradient(x, r, li);
    const double f = c.value(x);
    k.complementarity = std::max(k.complementarity, std::abs(li * f));
  }
  for (int j = 0; j < n; ++j) {
    if (p.is_fixed(j)) {
      r[j] = 0;
      continue;
    }
    r[j] += mu_hi[j] - mu_lo[j];
    if (std::isfinite(p.lower[j]))
      k.complementarity = std::max(k.complementarity, std::abs(mu_lo[j] * (x[j] - p.lower[j])));
    if (std::isfinite(p.upper[j]))
      k.complementarity = std::max(k.complementarity, std::abs(mu_hi[j] * (p.upper[j] - x[j])));
  }
  k.stationarity = r.lpNorm<Eigen::Infinity>();
  k.primal = p.max_violation(x);
  return k;
}

inline KktResiduals check_kkt(const ConvexProgram& p, const SolverResult& r) {
  return compute_kkt(p, r.x, r.multipliers, r.lower_multipliers, r.upper_multipliers);
}

// Max relative deviation between analytic first/second derivatives of every
// nonlinear constraint and central finite differences at x. Hessians are
// compared through Hessian-vector products along a fixed probe direction.
inline double gradient_check(const ConvexProgram& p, const VectorXd& x,
                             double step = 1e-6) {
  const int n = p.num_vars();
  double worst = 0.0;
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };
  VectorXd probe(n);
  for (int i = 0; i < n; ++i) probe[i] = 1.0 / (1.0 + i) * ((i % 2) ? -1.0 : 1.0);
  probe /= probe.norm();
  for (const auto& c : p.constraints) {
    if (c.kind == BlockKind::kAffine) continue;
    const VectorXd g = c.gradient(x);
    const VectorXd hv = c.hessian(x) * probe;
    for (int i = 0; i < n; ++i) {
      VectorXd xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      if (!c.in_domain(xp) || !c.in_domain(xm)) continue;
      worst = std::max(worst, rel(g[i], (c.value(xp) - c.value(xm)) / (2 * step)));
    }
    const VectorXd xp = x + step * probe, xm = x - step * probe;
    if (c.in_domain(xp) && c.in_domain(xm)) {
      const VectorXd fd = (c.gradient(xp) - c.gradient(xm)) / (2 * step);
      for (int i = 0; i < n; ++i) worst = std::max(worst, rel(hv[i], fd[i]));
    }
  }
  return worst;
}

namespace detail {

// Minimizes  tau * (-objective(x)) + barrier(x)  along the central path.
class BarrierEngine {
 public:
  BarrierEngine(const ConvexProgram& p, const SolverConfig& cfg)
      : p_(p), cfg_(cfg), n_(p.num_vars()) {
    for (int j = 0; j < n_; ++j)
      if (!p.is_fixed(j)) free_.push_back(j);
    m_ = static_cast<int>(p.constraints.size());
    for (int j : free_)
      m_ += std::isfinite(p.lower[j]) + std::isfinite(p.upper[j]);
    grad_obj_ = VectorXd::Zero(n_);
    p.objective.scatter(grad_obj_, -1.0);
  }

  int barrier_terms() const { return m_; }

  bool strictly_feasible(const VectorXd& x) const {
    for (int j : free_) {
      if (!(x[j] > p_.lower[j] && x[j] < p_.upper[j])) return false;
    }
    for (const auto& c : p_.constraints) {
      if (!c.in_domain(x)) return false;
      const double f = c.value(x);
      if (!(f < 0.0) || !std::isfinite(f)) return false;
    }
    return true;
  }

  double merit(const VectorXd& x, double tau) const {
    double v = tau * grad_obj_.dot(x);
    for (const auto& c : p_.constraints) v -= std::log(-c.value(x));
    for (int j : free_) {
      if (std::isfinite(p_.lower[j])) v -= std::log(x[j] - p_.lower[j]);
      if (std::isfinite(p_.upper[j])) v -= std::log(p_.upper[j] - x[j]);
    }
    return v;
  }

  struct Derivs {
    VectorXd grad;
    MatrixXd hess;
  };

  Derivs derivatives(const VectorXd& x, double tau) const {
    Derivs d{tau * grad_obj_, MatrixXd::Zero(n_, n_)};
    VectorXd g(n_);
    for (const auto& c : p_.constraints) {
      const double f = c.value(x);
      const double inv = -1.0 / f;  // > 0
      g.setZero();
      c.add_gradient(x, g, 1.0);
      d.grad += inv * g;
      d.hess.noalias() += (inv * inv) * g * g.transpose();
      c.add_hessian(x, d.hess, inv);
    }
    for (int j : free_) {
      if (std::isfinite(p_.lower[j])) {
        const double s = x[j] - p_.lower[j];
        d.grad[j] -= 1.0 / s;
        d.hess(j, j) += 1.0 / (s * s);
      }
      if (std::isfinite(p_.upper[j])) {
        const double s = p_.upper[j] - x[j];
        d.grad[j] += 1.0 / s;
        d.hess(j, j) += 1.0 / (s * s);
      }
    }
    return d;
  }

  enum class StepOutcome { kConverged, kStepped, kStalled };

  // One damped Newton step at fixed tau. decrement2 receives lambda^2.
  StepOutcome newton_step(VectorXd& x, double tau, double tol, double& decrement2,
                          double& step_len, bool& monotone) const {
    const auto d = derivatives(x, tau);
    const auto nf = static_cast<Eigen::Index>(free_.size());
    VectorXd gf(nf);
    MatrixXd hf(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      gf[a] = d.grad[free_[a]];
      for (Eigen::Index b = 0; b < nf; ++b) hf(a, b) = d.hess(free_[a], free_[b]);
    }
    VectorXd dxf;
    double reg = 0.0;
    const double scale = std::max(1.0, hf.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::LDLT<MatrixXd> ldlt(hf + reg * MatrixXd::Identity(nf, nf));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        dxf = ldlt.solve(-gf);
        if (dxf.allFinite() && gf.dot(dxf) < 0) break;
      }
      dxf.resize(0);
      reg = reg == 0.0 ? 1e-14 * scale : reg * 100.0;
    }
    if (dxf.size() == 0) return StepOutcome::kStalled;
    decrement2 = -gf.dot(dxf);
    if (decrement2 / 2.0 <= tol) return StepOutcome::kConverged;

    VectorXd dx = VectorXd::Zero(n_);
    for (Eigen::Index a = 0; a < nf; ++a) dx[free_[a]] = dxf[a];

    // Largest step keeping bounds strict, then backtrack into the domain.
    double t = 1.0;
    for (int j : free_) {
      if (dx[j] < 0 && std::isfinite(p_.lower[j]))
        t = std::min(t, 0.99 * (p_.lower[j] - x[j]) / dx[j]);
      if (dx[j] > 0 && std::isfinite(p_.upper[j]))
        t = std::min(t, 0.99 * (p_.upper[j] - x[j]) / dx[j]);
    }
    const double m0 = merit(x, tau);
    const double slope = -decrement2;
    VectorXd xn;
    while (true) {
      if (t < 1e-16) return StepOutcome::kStalled;
      xn = x + t * dx;
      if (strictly_feasible(xn)) {
        const double m1 = merit(xn, tau);
        // Near the end of the path the merit is dominated by tau * c^T x and
        // its decrease falls below roundoff; allow that much slack.
        const double roundoff = 1e-13 * (1.0 + std::abs(m0));
        if (std::isfinite(m1) && m1 <= m0 + cfg_.armijo * t * slope + roundoff) {
          if (m1 > m0 + roundoff) monotone = false;
          if (t * dx.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>()))
            return StepOutcome::kConverged;
          break;
        }
      }
      t *= cfg_.backtrack;
    }
    x = std::move(xn);
    step_len = t;
    return StepOutcome::kStepped;
  }

  void multipliers(const VectorXd& x, double tau, SolverResult& r) const {
    r.multipliers.resize(static_cast<Eigen::Index>(p_.constraints.size()));
    for (std::size_t i = 0; i < p_.constraints.size(); ++i)
      r.multipliers[static_cast<Eigen::Index>(i)] = 1.0 / (-tau * p_.constraints[i].value(x));
    r.lower_multipliers = VectorXd::Zero(n_);
    r.upper_multipliers = VectorXd::Zero(n_);
    for (int j : free_) {
      if (std::isfinite(p_.lower[j])) r.lower_multipliers[j] = 1.0 / (tau * (x[j] - p_.lower[j]));
      if (std::isfinite(p_.upper[j])) r.upper_multipliers[j] = 1.0 / (tau * (p_.upper[j] - x[j]));
    }
  }

  // Least-change correction of the barrier multipliers that zeroes the
  // stationarity residual. Each multiplier moves by u_k / s_k where s_k is its
  // constraint slack, so complementarity changes by at most |u_k|.
  void refine_multipliers(const VectorXd& x, SolverResult& r) const {
    const auto nf = static_cast<Eigen::Index>(free_.size());
    if (nf == 0) return;
    VectorXd res = VectorXd::Zero(n_);
    p_.objective.scatter(res, -1.0);
    struct Col {
      int kind;  // 0 constraint, 1 lower, 2 upper
      int index;
      double slack;
    };
    std::vector<Col> cols;
    std::vector<VectorXd> grads;
    for (std::size_t i = 0; i < p_.constraints.size(); ++i) {
      const auto& c = p_.constraints[i];
      VectorXd g = c.gradient(x);
      res += r.multipliers[static_cast<Eigen::Index>(i)] * g;
      cols.push_back({0, static_cast<int>(i), -c.value(x)});
      grads.push_back(std::move(g));
    }
    for (int j : free_) {
      res[j] += r.upper_multipliers[j] - r.lower_multipliers[j];
      if (std::isfinite(p_.lower[j])) {
        VectorXd g = VectorXd::Zero(n_);
        g[j] = -1.0;
        cols.push_back({1, j, x[j] - p_.lower[j]});
        grads.push_back(std::move(g));
      }
      if (std::isfinite(p_.upper[j])) {
        VectorXd g = VectorXd::Zero(n_);
        g[j] = 1.0;
        cols.push_back({2, j, p_.upper[j] - x[j]});
        grads.push_back(std::move(g));
      }
    }
    const auto k = static_cast<Eigen::Index>(cols.size());
    if (k == 0) return;
    MatrixXd m(nf, k);
    VectorXd rf(nf);
    for (Eigen::Index a = 0; a < nf; ++a) rf[a] = res[free_[a]];
    for (Eigen::Index b = 0; b < k; ++b)
      for (Eigen::Index a = 0; a < nf; ++a) m(a, b) = grads[b][free_[a]] / cols[b].slack;
    const VectorXd u = m.completeOrthogonalDecomposition().solve(-rf);
    if (!u.allFinite()) return;
    SolverResult trial = r;
    for (Eigen::Index b = 0; b < k; ++b) {
      const auto& col = cols[b];
      const double d = u[b] / col.slack;
      double* slot = col.kind == 0   ? &trial.multipliers[col.index]
                     : col.kind == 1 ? &trial.lower_multipliers[col.index]
                                     : &trial.upper_multipliers[col.index];
      *slot = std::max(0.0, *slot + d);
    }
    if (compute_kkt(p_, x, trial.multipliers, trial.lower_multipliers, trial.upper_multipliers).max() <
        compute_kkt(p_, x, r.multipliers, r.lower_multipliers, r.upper_multipliers).max()) {
      r.multipliers = trial.multipliers;
      r.lower_multipliers = trial.lower_multipliers;
      r.upper_multipliers = trial.upper_multipliers;
    }
  }

  const std::vector<int>& free_vars() const { return free_; }

 private:
  const ConvexProgram& p_;
  const SolverConfig& cfg_;
  int n_;
  int m_ = 0;
  std::vector<int> free_;
  VectorXd grad_obj_;
};

inline void log_step(const SolverConfig& cfg, const char* phase, int iter,
                     double weight, double step, double decrement2, double obj) {
  if (cfg.verbosity <= 0 || cfg.log == nullptr) return;
  *cfg.log << std::setprecision(6) << phase << " it=" << iter << " w=" << weight
           << " step=" << step << " dec2=" << decrement2 << " obj=" << obj << "\n";
}

// Moves x strictly inside the variable bounds; fixed variables take their value.
inline void clamp_into_bounds(const ConvexProgram& p, VectorXd& x) {
  for (int j = 0; j < p.num_vars(); ++j) {
    const double lo = p.lower[j], hi = p.upper[j];
    if (lo == hi) {
      x[j] = lo;
      continue;
    }
    double margin = 1e-6 * std::max(1.0, std::abs(x[j]));
    if (std::isfinite(lo) && std::isfinite(hi)) margin = std::min(margin, 0.25 * (hi - lo));
    if (std::isfinite(lo) && x[j] < lo + margin) x[j] = lo + margin;
    if (std::isfinite(hi) && x[j] > hi - margin) x[j] = hi - margin;
  }
}

}  // namespace detail

struct PhaseOneResult {
  VectorXd x;
  bool feasible = false;
  double max_violation = 0;  // largest constraint value at x (< 0 when feasible)
  int iterations = 0;
};

// Minimizes the largest constraint value s over (x, s) subject to the hard
// variable bounds. Returns as soon as a strictly feasible point is reached
// at the end of a centering stage, or reports the smallest violation found.
inline PhaseOneResult find_feasible(const ConvexProgram& p, VectorXd x0,
                                    const SolverConfig& cfg, int max_iters) {
  detail::clamp_into_bounds(p, x0);
  PhaseOneResult out;
  for (const auto& c : p.constraints)
    if (!c.in_domain(x0)) {
      out.x = x0;
      out.max_violation = kInf;
      return out;
    }

  ConvexProgram aug = p;
  const int s = aug.add_var("phase1_slack");
  for (auto& c : aug.constraints) c.affine.add(s, -1.0);
  aug.objective = LinearForm{};
  aug.objective.add(s, -1.0);

  auto worst = [&](const VectorXd& x) {
    double v = -kInf;
    for (const auto& c : p.constraints) v = std::max(v, c.value(x));
    return v;
  };

  VectorXd z(aug.num_vars());
  z.head(p.num_vars()) = x0;
  const double w0 = worst(x0);
  z[s] = (p.constraints.empty() ? 0.0 : w0) + 1.0;
  out.x = x0;
  out.max_violation = p.constraints.empty() ? -kInf : w0;
  if (out.max_violation < 0) {
    out.feasible = true;
    return out;
  }

  detail::BarrierEngine eng(aug, cfg);
  double w = cfg.initial_weight;
  int it = 0;
  while (it < max_iters) {
    const double tau = 1.0 / w;
    bool monotone = true;
    while (it < max_iters) {
      double dec2 = 0, step = 0;
      const auto r = eng.newton_step(z, tau, cfg.centering_tol, dec2, step, monotone);
      if (r != detail::BarrierEngine::StepOutcome::kStepped) break;
      ++it;
      detail::log_step(cfg, "phase1", it, w, step, dec2, z[s]);
      const VectorXd xv = z.head(p.num_vars());
      if (worst(xv) < out.max_violation) {
        out.x = xv;
        out.max_violation = worst(xv);
      }
    }
    out.iterations = it;
    if (out.max_violation < 0) {
      out.feasible = true;
      return out;
    }
    if (eng.barrier_terms() * w <= cfg.kkt_tol) break;
    w *= cfg.reduction_factor;
  }
  out.iterations = it;
  return out;
}

inline bool strictly_feasible(const ConvexProgram& p, const VectorXd& x) {
  if (x.size() != p.num_vars()) return false;
  return detail::BarrierEngine(p, SolverConfig{}).strictly_feasible(x);
}

inline SolverResult solve(const ConvexProgram& p, const SolverConfig& cfg = {},
                          std::optional<VectorXd> warm = std::nullopt) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  auto finish = [&](SolverResult& r) {
    r.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
    return r;
  };

  SolverResult res;
  const int n = p.num_vars();
  VectorXd x = warm.value_or(VectorXd::Zero(n));
  if (x.size() != n) throw InvalidDimension("warm start has the wrong length");
  for (int j = 0; j < n; ++j)
    if (p.is_fixed(j)) x[j] = p.lower[j];

  detail::BarrierEngine eng(p, cfg);
  if (!eng.strictly_feasible(x)) {
    const auto ph1 = find_feasible(p, x, cfg, cfg.max_iters);
    res.phase1_iterations = ph1.iterations;
    res.iterations = ph1.iterations;
    if (!ph1.feasible) {
      res.x = ph1.x;
      res.objective = p.objective(ph1.x);
      res.max_violation = ph1.max_violation;
      res.status = std::isfinite(ph1.max_violation) ? SolverStatus::kInfeasible
                                                    : SolverStatus::kNumericalFailure;
      res.multipliers = VectorXd::Zero(static_cast<Eigen::Index>(p.constraints.size()));
      res.lower_multipliers = res.upper_multipliers = VectorXd::Zero(n);
      res.residuals.primal = p.max_violation(ph1.x);
      return finish(res);
    }
    x = ph1.x;
  }

  const int m = std::max(1, eng.barrier_terms());
  double w = cfg.initial_weight;
  int it = res.iterations;
  bool stalled = false;
  bool done = false;
  while (!done) {
    const double tau = 1.0 / w;
    const bool last = m * w <= cfg.kkt_tol;
    const double ctol = last ? cfg.centering_tol * 1e-3 : cfg.centering_tol;
    while (it < cfg.max_iters) {
      double dec2 = 0, step = 0;
      const auto r = eng.newton_step(x, tau, ctol, dec2, step, res.merit_monotone);
      if (r == detail::BarrierEngine::StepOutcome::kConverged) break;
      if (r == detail::BarrierEngine::StepOutcome::kStalled) {
        stalled = true;
        break;
      }
      ++it;
      detail::log_step(cfg, "barrier", it, w, step, dec2, p.objective(x));
    }
    if (last || it >= cfg.max_iters || stalled) {
      done = true;
    } else {
      w = std::max(w * cfg.reduction_factor, 0.999 * cfg.kkt_tol / m);
    }
  }

  res.x = x;
  res.objective = p.objective(x);
  res.iterations = it;
  res.barrier_weight = w;
  eng.multipliers(x, 1.0 / w, res);
  eng.refine_multipliers(x, res);
  res.residuals = check_kkt(p, res);
  if (res.residuals.max() <= cfg.kkt_tol)
    res.status = SolverStatus::kOptimal;
  else if (it >= cfg.max_iters)
    res.status = SolverStatus::kMaxIters;
  else
    res.status = SolverStatus::kNumericalFailure;
  return finish(res);
}

}  // namespace crs
