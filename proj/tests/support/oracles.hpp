#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "crs/sca_driver.hpp"

namespace crs::testing {

// Channels with real entries and the same per-entry variances as the generator.
inline ChannelSet real_channels(std::uint64_t seed, int n_t = 2, const ChannelStats& st = {}) {
  ChannelSet cs = generate_channel_set(seed, n_t, st);
  auto re = [](CVec& v) { v = v.real().cast<Complex>() * std::sqrt(2.0); };
  re(cs.h1);
  re(cs.h2);
  re(cs.g1);
  cs.h3 = cs.h3.real() * std::sqrt(2.0);
  cs.g2 = cs.g2.real() * std::sqrt(2.0);
  return order_users(cs);
}

struct GridBest {
  double ssr = 0;
  PrecoderDesign design;
};

// Exhaustive search over a 3-parameter family: matched-filter directions,
// a power split (common, private 1, private 2) on the simplex and theta.
// Designs that let Eve decode the common stream are not admissible.
inline GridBest grid_search_best(const ChannelSet& cs, const PowerBudget& pb, int split_steps = 20,
                                 int theta_steps = 20) {
  const CVec u1 = cs.h1 / cs.h1.norm();
  const CVec u2 = cs.h2 / cs.h2.norm();
  CVec uc = u1 + u2;
  uc /= uc.norm();
  GridBest best;
  best.design = PrecoderDesign::zeros(cs.n_t, 1.0);
  for (int a = 0; a <= split_steps; ++a)
    for (int b = 0; a + b <= split_steps; ++b) {
      const double fc = double(a) / split_steps;
      const double f1 = double(b) / split_steps;
      const double f2 = 1.0 - fc - f1;
      for (int t = 1; t <= theta_steps; ++t) {
        PrecoderDesign d;
        d.p_c = uc * std::sqrt(fc * pb.p_t);
        d.p_1 = u1 * std::sqrt(f1 * pb.p_t);
        d.p_2 = u2 * std::sqrt(std::max(f2, 0.0) * pb.p_t);
        d.theta = double(t) / theta_steps;
        const auto r = achievable_rates(d, cs, pb);
        // The common stream only counts as noise at Eve while it stays undecodable there.
        if (r.r_c < r.c_ce) continue;
        if (r.total > best.ssr) best = {r.total, d};
      }
    }
  return best;
}

inline double trace_bound(const ChannelSet& cs, const PowerBudget& pb) {
  const auto& s = cs.sigma2;
  const double min_noise = std::min({s.u1, s.u2, s.u3, s.e1, s.e2});
  const double gain = std::max({pb.p_t * cs.h1.squaredNorm(), pb.p_t * cs.h2.squaredNorm(),
                                pb.p_t * cs.g1.squaredNorm(), pb.p_r * std::norm(cs.h3),
                                pb.p_r * std::norm(cs.g2)});
  return 3.0 * std::log2(1.0 + gain / min_noise);
}

// Largest drop between consecutive trace entries (0 when nondecreasing).
inline double worst_drop(const std::vector<double>& trace) {
  double d = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) d = std::max(d, trace[i - 1] - trace[i]);
  return d;
}

inline double final_step(const std::vector<double>& trace) {
  if (trace.size() < 2) return 0;
  return std::abs(trace.back() - trace[trace.size() - 2]);
}

inline PowerBudget budget_db(double snr_db) {
  const double p = std::pow(10.0, snr_db / 10.0);
  return {p, p};
}

}  // namespace crs::testing
