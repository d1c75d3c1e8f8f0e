#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crs/case_programs.hpp"
#include "crs/conic_solver.hpp"

namespace crs {

struct CaseSolution;

struct ScaConfig {
  double epsilon = 1e-3;
  int max_outer_iters = 200;
  int restoration_steps = 10;
  bool parallel_cases = true;
  SolverConfig solver{.max_iters = 300};
  // Sees every per-start SCA run, not only the kept ones. Must be thread-safe
  // when parallel_cases is set.
  std::function<void(const CaseSolution&)> observer;

  void validate() const {
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
    if (max_outer_iters < 1) throw DomainError("max_outer_iters must be positive");
    if (restoration_steps < 0) throw DomainError("restoration_steps must be nonnegative");
    solver.validate();
  }
};

enum class CaseStatus { kConverged, kIterationCap, kDegraded, kInfeasible };

inline const char* to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::kConverged: return "converged";
    case CaseStatus::kIterationCap: return "iteration-cap";
    case CaseStatus::kDegraded: return "degraded";
    case CaseStatus::kInfeasible: return "infeasible";
  }
  return "?";
}

struct IterationStats {
  SolverStatus status = SolverStatus::kOptimal;
  int newton_iters = 0;
  int phase1_iters = 0;
  double wall_ms = 0;
  KktResiduals residuals;
};

struct CaseSolution {
  CaseId case_id = CaseId::kCase1;
  CaseStatus status = CaseStatus::kInfeasible;
  ScaIterate iterate;
  std::vector<double> trace;  // surrogate objective t^[0], t^[1], ...
  double ssr = 0;             // exact secrecy sum rate at iterate.design
  RateBundle rates;
  int iterations = 0;
  int restoration_steps = 0;
  double min_residual = 0;    // worst original-case slack over accepted iterates
  std::vector<IterationStats> stats;
  std::string start = "init";  // which start produced this solution

  bool feasible() const { return status != CaseStatus::kInfeasible; }
  double solver_ms() const {
    double t = 0;
    for (const auto& s : stats) t += s.wall_ms;
    return t;
  }
};

struct Solution {
  std::string scheme = "CRS";
  Restriction restriction;
  CaseSolution best;
  std::vector<CaseSolution> cases;
  std::string fingerprint;
  ScaConfig config;
  PowerBudget budget;

  double ssr() const { return best.ssr; }
};

namespace detail {

inline CVec unit(const CVec& v) {
  const double n = v.norm();
  return n > 0 ? CVec(v / n) : CVec(v);
}

inline double start_objective(const CaseProgram& cp, const ScaIterate& it) {
  return cp.program.objective(pack_start(cp, it));
}

inline bool self_feasible(CaseId cid, const ScaIterate& it, const ChannelSet& cs,
                          const PowerBudget& pb, const Restriction& rs) {
  try {
    const auto cp = assemble(cid, it, cs, pb, rs);
    return strictly_feasible(cp.program, pack_start(cp, it));
  } catch (const DomainError&) {
    return false;
  }
}

}  // namespace detail

// Matched-filter directions with a 40/30/30 split of P_T (1 - delta); blocks
// removed by the restriction are zero and their share is redistributed.
inline PrecoderDesign matched_filter_design(const ChannelSet& cs, const PowerBudget& pb,
                                            const Restriction& rs = {}, double delta = 1e-3) {
  double wc = rs.no_common ? 0.0 : 0.4;
  double w1 = 0.3;
  double w2 = rs.no_private2 ? 0.0 : 0.3;
  const double total = wc + w1 + w2;
  const double budget = pb.p_t * (1.0 - delta);
  PrecoderDesign d = PrecoderDesign::zeros(cs.n_t, rs.theta_one ? 1.0 : 0.5);
  const CVec c = detail::unit(detail::unit(cs.h1) + detail::unit(cs.h2));
  d.p_c = c * std::sqrt(budget * wc / total);
  d.p_1 = detail::unit(cs.h1) * std::sqrt(budget * w1 / total);
  d.p_2 = detail::unit(cs.h2) * std::sqrt(budget * w2 / total);
  return d;
}

// Strictly feasible iterate for the subproblem assembled at itself, built from
// `d`. Falls back to a restoration sequence of Phase I solves, each one
// re-expanded at the previous best point.
inline std::optional<ScaIterate> prepare_start(CaseId cid, const PrecoderDesign& d,
                                               const ChannelSet& cs, const PowerBudget& pb,
                                               const ScaConfig& cfg, const Restriction& rs = {},
                                               int* steps_used = nullptr) {
  if (steps_used) *steps_used = 0;
  for (double margin : {1e-7, 1e-9, 1e-11}) {
    auto it = iterate_from_design(cid, d, cs, pb, rs, margin);
    if (detail::self_feasible(cid, it, cs, pb, rs)) return it;
  }
  auto it = iterate_from_design(cid, d, cs, pb, rs, 0.0);
  for (int step = 1; step <= cfg.restoration_steps; ++step) {
    if (steps_used) *steps_used = step;
    CaseProgram cp;
    try {
      cp = assemble(cid, it, cs, pb, rs);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    const auto ph1 = find_feasible(cp.program, pack_start(cp, it), cfg.solver, cfg.solver.max_iters);
    if (!std::isfinite(ph1.max_violation)) return std::nullopt;
    it = cp.layout.unpack(ph1.x);
    if (!ph1.feasible) continue;
    for (double margin : {1e-7, 1e-9, 1e-11}) {
      auto tight = iterate_from_design(cid, it.design, cs, pb, rs, margin);
      if (detail::self_feasible(cid, tight, cs, pb, rs)) return tight;
    }
    if (detail::self_feasible(cid, it, cs, pb, rs)) return it;
  }
  return std::nullopt;
}

// Every stream steered into the null space of the eavesdropper's channel,
// with theta close to one so the relay phase leaks little.
inline PrecoderDesign eve_null_design(const ChannelSet& cs, const PowerBudget& pb,
                                      const Restriction& rs = {}, double delta = 1e-3) {
  auto null_dir = [&](const CVec& h) {
    const double gg = cs.g1.squaredNorm();
    CVec v = gg > 0 ? CVec(h - cs.g1 * (cs.g1.dot(h) / gg)) : h;
    return v.norm() > 1e-9 * h.norm() ? detail::unit(v) : detail::unit(h);
  };
  PrecoderDesign d = matched_filter_design(cs, pb, rs, delta);
  d.p_c = null_dir(detail::unit(cs.h1) + detail::unit(cs.h2)) * d.p_c.norm();
  d.p_1 = null_dir(cs.h1) * d.p_1.norm();
  d.p_2 = null_dir(cs.h2) * d.p_2.norm();
  if (!rs.theta_one) d.theta = 0.9;
  return d;
}

inline std::optional<ScaIterate> initialize(CaseId cid, const ChannelSet& cs, const PowerBudget& pb,
                                            const ScaConfig& cfg = {}, const Restriction& rs = {},
                                            int* steps_used = nullptr) {
  int first = 0, second = 0;
  auto it = prepare_start(cid, matched_filter_design(cs, pb, rs), cs, pb, cfg, rs, &first);
  if (!it) it = prepare_start(cid, eve_null_design(cs, pb, rs), cs, pb, cfg, rs, &second);
  if (steps_used) *steps_used = first + second;
  return it;
}

inline CaseSolution sca_solve_case(CaseId cid, const ScaIterate& init, const ChannelSet& cs,
                                   const PowerBudget& pb, const ScaConfig& cfg,
                                   const Restriction& rs = {}) {
  cfg.validate();
  CaseSolution out;
  out.case_id = cid;
  out.iterate = init;
  out.status = CaseStatus::kIterationCap;
  out.min_residual = original_case_residuals(cid, init, cs, pb).min();

  ScaIterate cur = init;
  double t_prev = detail::start_objective(assemble(cid, cur, cs, pb, rs), cur);
  out.trace.push_back(t_prev);
  for (int n = 1; n <= cfg.max_outer_iters; ++n) {
    const auto cp = assemble(cid, cur, cs, pb, rs);
    const auto r = solve(cp.program, cfg.solver, pack_start(cp, cur));
    out.stats.push_back({r.status, r.iterations, r.phase1_iterations, r.wall_ms, r.residuals});
    const bool usable = r.status != SolverStatus::kInfeasible && r.x.size() == cp.program.num_vars() &&
                        strictly_feasible(cp.program, r.x) && r.objective >= t_prev - 1e-6;
    if (!usable) {
      out.status = CaseStatus::kDegraded;
      break;
    }
    cur = cp.layout.unpack(r.x);
    out.iterate = cur;
    out.iterations = n;
    out.trace.push_back(r.objective);
    out.min_residual = std::min(out.min_residual, original_case_residuals(cid, cur, cs, pb).min());
    if (std::abs(r.objective - t_prev) <= cfg.epsilon) {
      out.status = CaseStatus::kConverged;
      break;
    }
    t_prev = r.objective;
  }
  out.rates = achievable_rates(out.iterate.design, cs, pb);
  out.ssr = out.rates.total;
  return out;
}

// Case implied by the strict private sign pattern of a design, if any.
inline std::optional<CaseId> case_of_design(const PrecoderDesign& d, const ChannelSet& cs,
                                            const PowerBudget& pb, const Restriction& rs = {}) {
  const auto r = achievable_rates(d, cs, pb);
  const double s1 = r.r_p1 - r.c_1e;
  const double s2 = r.r_p2 - r.c_2e;
  if (s1 == 0 || (!rs.no_private2 && s2 == 0)) return std::nullopt;
  const bool keep2 = rs.no_private2 || s2 > 0;
  if (s1 > 0) return keep2 ? CaseId::kCase1 : CaseId::kCase2;
  return keep2 ? CaseId::kCase3 : CaseId::kCase4;
}

inline std::vector<CaseId> cases_for(const Restriction& rs) {
  if (rs.no_private2) return {CaseId::kCase1, CaseId::kCase3};
  return {kAllCases.begin(), kAllCases.end()};
}

inline CaseSolution solve_case_from_starts(CaseId cid, const std::vector<PrecoderDesign>& warm,
                                           const ChannelSet& cs, const PowerBudget& pb,
                                           const ScaConfig& cfg, const Restriction& rs) {
  CaseSolution best;
  best.case_id = cid;
  int steps = 0;
  if (auto init = initialize(cid, cs, pb, cfg, rs, &steps)) {
    best = sca_solve_case(cid, *init, cs, pb, cfg, rs);
    best.restoration_steps = steps;
    if (cfg.observer) cfg.observer(best);
  } else {
    best.restoration_steps = steps;
  }
  for (std::size_t k = 0; k < warm.size(); ++k) {
    auto start = prepare_start(cid, warm[k], cs, pb, cfg, rs, &steps);
    if (!start) continue;
    auto sol = sca_solve_case(cid, *start, cs, pb, cfg, rs);
    sol.restoration_steps = steps;
    sol.start = "warm" + std::to_string(k);
    if (cfg.observer) cfg.observer(sol);
    if (!best.feasible() || sol.ssr > best.ssr) best = std::move(sol);
  }
  return best;
}

// Feasible case with the largest exact SSR; ties keep the lower case number.
inline std::optional<std::size_t> best_case_index(const std::vector<CaseSolution>& cases) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cases.size(); ++i)
    if (cases[i].feasible() && (!best || cases[i].ssr > cases[*best].ssr)) best = i;
  return best;
}

inline Solution solve_ssr(const ChannelSet& cs, const PowerBudget& pb, const ScaConfig& cfg = {},
                          const std::vector<PrecoderDesign>& warm = {}, const Restriction& rs = {}) {
  validate(cs);
  validate(pb);
  cfg.validate();
  const auto cases = cases_for(rs);

  // Each warm design only seeds the case its own sign pattern belongs to.
  std::vector<std::vector<PrecoderDesign>> seeds(cases.size());
  for (const auto& d : warm) {
    const auto cid = case_of_design(d, cs, pb, rs);
    if (!cid) continue;
    for (std::size_t i = 0; i < cases.size(); ++i)
      if (cases[i] == *cid) seeds[i].push_back(d);
  }

  Solution sol;
  sol.restriction = rs;
  sol.fingerprint = fingerprint(cs);
  sol.config = cfg;
  sol.budget = pb;
  sol.cases.resize(cases.size());
  if (cfg.parallel_cases && cases.size() > 1) {
    std::vector<std::future<CaseSolution>> jobs;
    for (std::size_t i = 0; i < cases.size(); ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return solve_case_from_starts(cases[i], seeds[i], cs, pb, cfg, rs);
      }));
    for (std::size_t i = 0; i < cases.size(); ++i) sol.cases[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < cases.size(); ++i)
      sol.cases[i] = solve_case_from_starts(cases[i], seeds[i], cs, pb, cfg, rs);
  }

  if (const auto k = best_case_index(sol.cases)) {
    sol.best = sol.cases[*k];
  } else {
    sol.best.iterate.design = PrecoderDesign::zeros(cs.n_t, rs.theta_one ? 1.0 : 0.5);
    sol.best.rates = achievable_rates(sol.best.iterate.design, cs, pb);
    sol.best.ssr = 0.0;
  }
  return sol;
}

inline nlohmann::json complex_array(const CVec& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
  return a;
}

inline nlohmann::json to_json(const RateBundle& r) {
  return {{"r_c1", r.r_c1},   {"r_c2", r.r_c2},       {"r_c", r.r_c},
          {"r_p1", r.r_p1},   {"r_p2", r.r_p2},       {"c_ce", r.c_ce},
          {"c_1e", r.c_1e},   {"c_2e", r.c_2e},       {"r_c_sec", r.r_c_sec},
          {"r_p1_sec", r.r_p1_sec}, {"r_p2_sec", r.r_p2_sec}, {"total", r.total}};
}

inline nlohmann::json to_json(const Solution& s) {
  nlohmann::json j;
  j["scheme"] = s.scheme;
  j["channel_fingerprint"] = s.fingerprint;
  const auto& d = s.best.iterate.design;
  j["design"] = {{"p_c", complex_array(d.p_c)},
                 {"p_1", complex_array(d.p_1)},
                 {"p_2", complex_array(d.p_2)}};
  j["theta"] = d.theta;
  j["ssr_bits"] = s.best.ssr;
  j["best_case"] = case_number(s.best.case_id);
  j["rates"] = to_json(s.best.rates);
  auto cases = nlohmann::json::array();
  for (const auto& c : s.cases)
    cases.push_back({{"case", case_number(c.case_id)},
                     {"status", to_string(c.status)},
                     {"ssr_bits", c.ssr},
                     {"iterations", c.iterations},
                     {"restoration_steps", c.restoration_steps},
                     {"start", c.start},
                     {"trace", c.trace}});
  j["cases"] = cases;
  j["config"] = {{"epsilon", s.config.epsilon},
                 {"max_outer_iters", s.config.max_outer_iters},
                 {"kkt_tol", s.config.solver.kkt_tol},
                 {"solver_max_iters", s.config.solver.max_iters},
                 {"p_t", s.budget.p_t},
                 {"p_r", s.budget.p_r}};
  return j;
}

}  // namespace crs
