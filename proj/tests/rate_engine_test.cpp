#include "crs/rate_engine.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace crs {
namespace {

CVec v2(Complex a, Complex b) {
  CVec v(2);
  v << a, b;
  return v;
}

ChannelSet unit_channels() {
  ChannelSet cs;
  cs.n_t = 2;
  cs.h1 = v2(1, 0);
  cs.h2 = v2(1, 0);
  cs.g1 = v2(0, 0);
  cs.h3 = 1;
  cs.g2 = 0;
  return cs;
}

ChannelSet random_channels(std::uint64_t seed, int n_t = 2) {
  return generate_channel_set(seed, n_t, ChannelStats{});
}

PrecoderDesign random_design(CounterRng& rng, int n_t) {
  PrecoderDesign d = PrecoderDesign::zeros(n_t);
  for (int i = 0; i < n_t; ++i) {
    d.p_c[i] = rng.next_complex_gaussian(1.0);
    d.p_1[i] = rng.next_complex_gaussian(1.0);
    d.p_2[i] = rng.next_complex_gaussian(1.0);
  }
  d.theta = 0.05 + 0.95 * rng.next_unit();
  return d;
}

TEST(Sinr, OrthogonalInterferenceVanishes) {
  auto cs = unit_channels();
  PrecoderDesign d{v2(3, 0), v2(0, 1), v2(0, 1), 1.0};
  EXPECT_DOUBLE_EQ(compute_sinrs(d, cs, {1, 1}).gc1, 9.0);
}

TEST(Sinr, ZeroPrecodersGiveZeroPhaseOne) {
  const auto cs = random_channels(3);
  const auto g = compute_sinrs(PrecoderDesign::zeros(2, 0.5), cs, {10, 10});
  for (double v : {g.gc1, g.gc2, g.gp1, g.gp2, g.gce1, g.g1e, g.g2e}) EXPECT_EQ(v, 0.0);
  EXPECT_GT(g.gc2_p2, 0.0);
}

TEST(Sinr, ComplexHandOracle) {
  auto cs = unit_channels();
  cs.h1 = v2({1, 1}, {1, -1});
  cs.sigma2.u1 = 2;
  PrecoderDesign d{v2(1, 0), v2(0, 1), v2(0, 0), 1.0};
  EXPECT_DOUBLE_EQ(compute_sinrs(d, cs, {1, 1}).gc1, 0.5);
}

TEST(Sinr, RelayPhaseClosedForms) {
  auto cs = unit_channels();
  cs.h3 = {1, 2};
  cs.g2 = {0.5, 0};
  cs.sigma2.u3 = 2;
  cs.sigma2.e2 = 4;
  const auto g = compute_sinrs(PrecoderDesign::zeros(2), cs, {7, 3});
  EXPECT_DOUBLE_EQ(g.gc2_p2, 3 * 5 / 2.0);
  EXPECT_DOUBLE_EQ(g.gce2, 3 * 0.25 / 4.0);
}

TEST(Rates, NoEavesdropperMeansNoLeak) {
  auto cs = random_channels(8);
  cs.g1.setZero();
  cs.g2 = 0;
  CounterRng rng(1);
  const auto d = random_design(rng, 2);
  const auto r = achievable_rates(d, cs, {5, 5});
  EXPECT_EQ(r.c_ce, 0.0);
  EXPECT_EQ(r.c_1e, 0.0);
  EXPECT_EQ(r.c_2e, 0.0);
  EXPECT_DOUBLE_EQ(r.total, r.r_c + r.r_p1 + r.r_p2);
}

TEST(Rates, ThetaOneDropsRelayTerms) {
  const auto cs = random_channels(9);
  CounterRng rng(2);
  auto d = random_design(rng, 2);
  d.theta = 1.0;
  const auto g = compute_sinrs(d, cs, {5, 5});
  const auto r = achievable_rates(d, cs, {5, 5});
  EXPECT_DOUBLE_EQ(r.r_c2, std::log2(1 + g.gc2));
  EXPECT_DOUBLE_EQ(r.c_ce, std::log2(1 + g.gce1));
}

TEST(Rates, ScalarHandEvaluation) {
  auto cs = unit_channels();
  PrecoderDesign d{v2(1, 0), v2(0, 0), v2(0, 0), 0.5};
  const auto r = achievable_rates(d, cs, {1, 3});
  EXPECT_DOUBLE_EQ(r.r_c1, 0.5);
  EXPECT_DOUBLE_EQ(r.r_c2, 1.5);
  EXPECT_DOUBLE_EQ(r.r_c, 0.5);
}

TEST(Ssr, ZeroPrecodersGiveZero) {
  const auto cs = random_channels(4);
  EXPECT_EQ(secrecy_sum_rate(PrecoderDesign::zeros(2, 0.3), cs, {10, 10}), 0.0);
}

// Independent single-expression evaluator, written directly from the rate
// definitions without sharing code with the engine.
double reference_ssr(const PrecoderDesign& d, const ChannelSet& c, const PowerBudget& pb) {
  auto g = [](const CVec& h, const CVec& p) { return std::norm((h.adjoint() * p)(0)); };
  const auto& s = c.sigma2;
  const double t = d.theta;
  const double rc = std::min(
      t * std::log2(1 + g(c.h1, d.p_c) / (g(c.h1, d.p_1) + g(c.h1, d.p_2) + s.u1)),
      t * std::log2(1 + g(c.h2, d.p_c) / (g(c.h2, d.p_1) + g(c.h2, d.p_2) + s.u2)) +
          (1 - t) * std::log2(1 + pb.p_r * std::norm(c.h3) / s.u3));
  const double cce =
      t * std::log2(1 + g(c.g1, d.p_c) / (g(c.g1, d.p_1) + g(c.g1, d.p_2) + s.e1)) +
      (1 - t) * std::log2(1 + pb.p_r * std::norm(c.g2) / s.e2);
  const double rp1 = t * std::log2(1 + g(c.h1, d.p_1) / (g(c.h1, d.p_2) + s.u1));
  const double rp2 = t * std::log2(1 + g(c.h2, d.p_2) / (g(c.h2, d.p_1) + s.u2));
  const double c1e = t * std::log2(1 + g(c.g1, d.p_1) / (g(c.g1, d.p_c) + g(c.g1, d.p_2) + s.e1));
  const double c2e = t * std::log2(1 + g(c.g1, d.p_2) / (g(c.g1, d.p_c) + g(c.g1, d.p_1) + s.e1));
  return std::max(rc - cce, 0.0) + std::max(rp1 - c1e, 0.0) + std::max(rp2 - c2e, 0.0);
}

TEST(Ssr, MatchesIndependentEvaluator) {
  CounterRng rng(1234);
  for (int i = 0; i < 200; ++i) {
    const auto cs = random_channels(1000 + i);
    const auto d = random_design(rng, 2);
    const PowerBudget pb{1 + 9 * rng.next_unit(), 1 + 9 * rng.next_unit()};
    EXPECT_NEAR(secrecy_sum_rate(d, cs, pb), reference_ssr(d, cs, pb), 1e-12);
  }
}

TEST(RateProperties, InvariantsOnRandomDesigns) {
  CounterRng rng(77);
  for (int i = 0; i < 500; ++i) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    auto cs = random_channels(5000 + i, n);
    const auto d = random_design(rng, n);
    const PowerBudget pb{10, 10};
    const auto r = achievable_rates(d, cs, pb);
    EXPECT_LE(r.r_c, r.r_c1);
    EXPECT_LE(r.r_c, r.r_c2);
    EXPECT_EQ(r.r_c_sec, std::max(r.r_c - r.c_ce, 0.0));
    EXPECT_EQ(r.r_p1_sec, std::max(r.r_p1 - r.c_1e, 0.0));
    EXPECT_EQ(r.r_p2_sec, std::max(r.r_p2 - r.c_2e, 0.0));
    EXPECT_GE(r.total, 0.0);

    // Common phase rotation leaves every SINR unchanged.
    const Complex ph = std::polar(1.0, 6.283 * rng.next_unit());
    PrecoderDesign rot{d.p_c * ph, d.p_1 * ph, d.p_2 * ph, d.theta};
    const auto a = compute_sinrs(d, cs, pb), b = compute_sinrs(rot, cs, pb);
    EXPECT_NEAR(a.gc1, b.gc1, 1e-12 * (1 + a.gc1));
    EXPECT_NEAR(a.gp2, b.gp2, 1e-12 * (1 + a.gp2));
    EXPECT_NEAR(a.g1e, b.g1e, 1e-12 * (1 + a.g1e));

    // More eavesdropper noise never hurts secrecy.
    auto noisier = cs;
    noisier.sigma2.e1 *= 1.0 + 3.0 * rng.next_unit();
    const auto r2 = achievable_rates(d, noisier, pb);
    EXPECT_GE(r2.r_c_sec, r.r_c_sec - 1e-12);
    EXPECT_GE(r2.r_p1_sec, r.r_p1_sec - 1e-12);
    EXPECT_GE(r2.r_p2_sec, r.r_p2_sec - 1e-12);
  }
}

}  // namespace
}  // namespace crs
