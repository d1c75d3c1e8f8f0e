#pragma once

// Closed-form SINRs and rates of cooperative rate-splitting with an
// eavesdropper. Everything the optimizer reports is scored here.

#include <algorithm>
#include <cmath>

#include "crs/channel_model.hpp"

namespace crs {

struct PrecoderDesign {
  CVec p_c;            // common stream
  CVec p_1;            // private stream of U1
  CVec p_2;            // private stream of U2
  double theta = 1.0;  // phase-I time fraction, (0, 1]

  static PrecoderDesign zeros(int n_t, double theta = 1.0) {
    return {CVec::Zero(n_t), CVec::Zero(n_t), CVec::Zero(n_t), theta};
  }

  double power() const {
    return p_c.squaredNorm() + p_1.squaredNorm() + p_2.squaredNorm();
  }
};

struct SinrBundle {
  double gc1 = 0, gc2 = 0;  // common stream at U1, U2 (phase I)
  double gp1 = 0, gp2 = 0;  // private streams after SIC
  double gc2_p2 = 0;        // relay phase at U2
  double gce1 = 0;          // common stream at E, phase I
  double gce2 = 0;          // common stream at E, relay phase
  double g1e = 0, g2e = 0;  // private streams at E
};

struct RateBundle {
  double r_c1 = 0, r_c2 = 0, r_c = 0;
  double r_p1 = 0, r_p2 = 0;
  double c_ce = 0, c_1e = 0, c_2e = 0;
  double r_c_sec = 0, r_p1_sec = 0, r_p2_sec = 0;
  double total = 0;
};

// |a^H b|^2
inline double gain(const CVec& a, const CVec& b) { return std::norm(a.dot(b)); }

inline SinrBundle compute_sinrs(const PrecoderDesign& d, const ChannelSet& cs,
                                const PowerBudget& pb) {
  const auto& s = cs.sigma2;
  SinrBundle g;

  const double h1c = gain(cs.h1, d.p_c), h11 = gain(cs.h1, d.p_1),
               h12 = gain(cs.h1, d.p_2);
  const double h2c = gain(cs.h2, d.p_c), h21 = gain(cs.h2, d.p_1),
               h22 = gain(cs.h2, d.p_2);
  const double ec = gain(cs.g1, d.p_c), e1 = gain(cs.g1, d.p_1),
               e2 = gain(cs.g1, d.p_2);

  g.gc1 = h1c / (h11 + h12 + s.u1);
  g.gc2 = h2c / (h21 + h22 + s.u2);
  g.gp1 = h11 / (h12 + s.u1);
  g.gp2 = h22 / (h21 + s.u2);
  g.gc2_p2 = pb.p_r * std::norm(cs.h3) / s.u3;
  g.gce1 = ec / (e1 + e2 + s.e1);
  g.gce2 = pb.p_r * std::norm(cs.g2) / s.e2;
  g.g1e = e1 / (ec + e2 + s.e1);
  g.g2e = e2 / (ec + e1 + s.e1);
  return g;
}

inline RateBundle rates_from_sinrs(const SinrBundle& g, double theta) {
  const double relay = 1.0 - theta;
  RateBundle r;
  r.r_c1 = theta * std::log2(1.0 + g.gc1);
  r.r_c2 = theta * std::log2(1.0 + g.gc2);
  if (relay != 0.0) r.r_c2 += relay * std::log2(1.0 + g.gc2_p2);
  r.r_c = std::min(r.r_c1, r.r_c2);
  r.r_p1 = theta * std::log2(1.0 + g.gp1);
  r.r_p2 = theta * std::log2(1.0 + g.gp2);
  r.c_ce = theta * std::log2(1.0 + g.gce1);
  if (relay != 0.0) r.c_ce += relay * std::log2(1.0 + g.gce2);
  r.c_1e = theta * std::log2(1.0 + g.g1e);
  r.c_2e = theta * std::log2(1.0 + g.g2e);
  r.r_c_sec = std::max(r.r_c - r.c_ce, 0.0);
  r.r_p1_sec = std::max(r.r_p1 - r.c_1e, 0.0);
  r.r_p2_sec = std::max(r.r_p2 - r.c_2e, 0.0);
  r.total = r.r_c_sec + r.r_p1_sec + r.r_p2_sec;
  return r;
}

inline RateBundle achievable_rates(const PrecoderDesign& d,
                                   const ChannelSet& cs,
                                   const PowerBudget& pb) {
  return rates_from_sinrs(compute_sinrs(d, cs, pb), d.theta);
}

inline double secrecy_sum_rate(const PrecoderDesign& d, const ChannelSet& cs,
                               const PowerBudget& pb) {
  return achievable_rates(d, cs, pb).total;
}

}  // namespace crs
