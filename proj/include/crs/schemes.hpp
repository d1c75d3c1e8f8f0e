#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "crs/sca_driver.hpp"

namespace crs {

enum class SchemeId { kCRS, kNRS, kMULP, kCNOMA };

inline constexpr std::array<SchemeId, 4> kAllSchemes = {SchemeId::kCRS, SchemeId::kNRS,
                                                        SchemeId::kMULP, SchemeId::kCNOMA};

inline const char* to_string(SchemeId s) {
  switch (s) {
    case SchemeId::kCRS: return "CRS";
    case SchemeId::kNRS: return "NRS";
    case SchemeId::kMULP: return "MULP";
    case SchemeId::kCNOMA: return "CNOMA";
  }
  return "?";
}

inline std::string scheme_list() { return "crs, nrs, mulp, cnoma"; }

inline SchemeId parse_scheme(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (name == "MU-LP") name = "MULP";
  if (name == "C-NOMA") name = "CNOMA";
  for (SchemeId s : kAllSchemes)
    if (name == to_string(s)) return s;
  throw ParseError("scheme", "unknown scheme '" + name + "' (expected one of " + scheme_list() + ")");
}

inline Restriction restriction_of(SchemeId s) {
  switch (s) {
    case SchemeId::kCRS: return {};
    case SchemeId::kNRS: return {.theta_one = true};
    case SchemeId::kMULP: return {.theta_one = true, .no_common = true};
    case SchemeId::kCNOMA: return {.no_private2 = true};
  }
  return {};
}

inline Solution solve_scheme(SchemeId s, const ChannelSet& cs, const PowerBudget& pb,
                             const ScaConfig& cfg = {},
                             const std::vector<PrecoderDesign>& warm = {}) {
  auto sol = solve_ssr(cs, pb, cfg, warm, restriction_of(s));
  sol.scheme = to_string(s);
  return sol;
}

namespace detail {

inline CVec project_out(const CVec& v, const CVec& g) {
  const double gg = g.squaredNorm();
  if (gg == 0) return v;
  return v - g * (g.dot(v) / gg);
}

inline bool is_zero_block(const CVec& p, double p_t) { return p.squaredNorm() <= 1e-12 * p_t; }

inline std::vector<CVec> seed_directions(const std::vector<CVec>& raw) {
  std::vector<CVec> out;
  for (const auto& v : raw)
    if (v.norm() > 1e-9) out.push_back(unit(v));
  return out;
}

}  // namespace detail

// Lifts a restricted design into the full CRS space: the relay slot is
// opened by a hair and removed streams get a tiny seed so that the design
// satisfies some case sign pattern strictly. Among the seeds tried, the one
// with the largest exact SSR is kept.
inline PrecoderDesign embed_design(const PrecoderDesign& d, const ChannelSet& cs,
                                   const PowerBudget& pb) {
  PrecoderDesign base = d;
  base.theta = std::min(base.theta, 1.0 - 1e-6);
  const bool zc = detail::is_zero_block(base.p_c, pb.p_t);
  const bool z2 = detail::is_zero_block(base.p_2, pb.p_t);
  const CVec h1 = detail::unit(cs.h1), h2 = detail::unit(cs.h2), g = detail::unit(cs.g1);

  std::vector<CVec> dir_c{CVec()}, dir_2{CVec()};
  if (zc)
    dir_c = detail::seed_directions({detail::project_out(h1 + h2, cs.g1), h1 + h2, h1, h2});
  if (z2)
    dir_2 = detail::seed_directions(
        {h2, detail::project_out(h2, cs.g1), detail::project_out(g, cs.h2), g});

  const double p0 = std::min(base.power(), pb.p_t * (1.0 - 1e-7));
  std::optional<PrecoderDesign> best;
  double best_ssr = -1;
  auto consider = [&](const PrecoderDesign& cand) {
    const auto cid = case_of_design(cand, cs, pb);
    if (!cid || original_case_residuals(*cid, cand, cs, pb).min() <= 1e-9) return;
    const double ssr = secrecy_sum_rate(cand, cs, pb);
    if (ssr > best_ssr) {
      best_ssr = ssr;
      best = cand;
    }
  };
  for (double frac : {1e-4, 1e-3, 1e-2}) {
    if (!zc && !z2 && frac > 1e-4) break;
    for (const auto& uc : dir_c)
      for (const auto& u2 : dir_2) {
        PrecoderDesign cand = base;
        const int seeds = (zc ? 1 : 0) + (z2 ? 1 : 0);
        const double q = seeds * frac * p0;
        const double shrink = p0 > 0 && base.power() > 0 ? std::sqrt((p0 - q) / base.power()) : 0.0;
        cand.p_c *= shrink;
        cand.p_1 *= shrink;
        cand.p_2 *= shrink;
        if (zc) cand.p_c = uc * std::sqrt(frac * p0);
        if (z2) cand.p_2 = u2 * std::sqrt(frac * p0);
        consider(cand);
      }
  }
  if (best) return *best;
  PrecoderDesign fallback = base;
  if (base.power() > p0) {
    const double s = std::sqrt(p0 / base.power());
    fallback.p_c *= s;
    fallback.p_1 *= s;
    fallback.p_2 *= s;
  }
  return fallback;
}

// Exact embedding of a baseline solution into the CRS variable space: removed
// streams stay zero and their auxiliaries neutral, the rest are recomputed by
// equality from the exact rates.
inline ScaIterate map_to_crs_iterate(SchemeId s, const Solution& sol, const ChannelSet& cs,
                                     const PowerBudget& pb) {
  const auto rs = restriction_of(s);
  const auto& d = sol.best.iterate.design;
  const CaseId cid = case_of_design(d, cs, pb, rs).value_or(sol.best.case_id);
  return iterate_from_design(cid, d, cs, pb, rs, 0.0);
}

// CRS seeded with every baseline solution mapped into its variable space.
inline Solution solve_crs_nested(const ChannelSet& cs, const PowerBudget& pb, const ScaConfig& cfg,
                                 const std::vector<std::pair<SchemeId, const Solution*>>& baselines) {
  std::vector<PrecoderDesign> warm;
  for (const auto& [s, sol] : baselines)
    warm.push_back(embed_design(map_to_crs_iterate(s, *sol, cs, pb).design, cs, pb));
  return solve_scheme(SchemeId::kCRS, cs, pb, cfg, warm);
}

}  // namespace crs
