#include "crs/sca_driver.hpp"

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace crs {
namespace {

using testing::budget_db;

ScaConfig serial() {
  ScaConfig cfg;
  cfg.parallel_cases = false;
  return cfg;
}

TEST(Initialize, SilentEavesdropperNeedsNoRestoration) {
  auto cs = generate_channel_set(1, 2, ChannelStats{});
  cs.g1.setZero();
  cs.g2 = 0;
  int steps = -1;
  const auto it = initialize(CaseId::kCase1, cs, budget_db(20), serial(), {}, &steps);
  ASSERT_TRUE(it.has_value());
  EXPECT_EQ(steps, 0);
  EXPECT_GT(original_case_residuals(CaseId::kCase1, *it, cs, budget_db(20)).min(), 0.0);
}

TEST(Initialize, Case1AndCase4PatternsExcludeEachOther) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto cs = generate_channel_set(seed, 2, ChannelStats{});
    const auto d = matched_filter_design(cs, budget_db(10));
    const bool one = original_case_residuals(CaseId::kCase1, d, cs, budget_db(10)).min() > 0;
    const bool four = original_case_residuals(CaseId::kCase4, d, cs, budget_db(10)).min() > 0;
    EXPECT_FALSE(one && four) << seed;
  }
}

TEST(Initialize, MatchedFilterSplitAndTheta) {
  const auto cs = generate_channel_set(2, 3, ChannelStats{});
  const PowerBudget pb{10, 10};
  const auto d = matched_filter_design(cs, pb);
  EXPECT_NEAR(d.p_c.squaredNorm(), 0.4 * 10 * (1 - 1e-3), 1e-12);
  EXPECT_NEAR(d.p_1.squaredNorm(), 0.3 * 10 * (1 - 1e-3), 1e-12);
  EXPECT_EQ(d.theta, 0.5);
  EXPECT_NEAR(std::abs(cs.h1.dot(d.p_1)), cs.h1.norm() * d.p_1.norm(), 1e-12);
}

TEST(Initialize, Case1StartAuditAt20dB) {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto cs = generate_channel_set(700 + seed, 2, ChannelStats{});
    int steps = 0;
    const auto it = initialize(CaseId::kCase1, cs, budget_db(20), serial(), {}, &steps);
    if (it && steps <= 10) ++ok;
  }
  EXPECT_GE(ok, 45);
}

TEST(ScaSolveCase, TraceMonotoneFeasibleAndConverged) {
  const auto cfg = serial();
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto cs = generate_channel_set(40 + seed, 2 + 2 * (seed % 2), ChannelStats{});
    const auto pb = budget_db(seed % 3 == 0 ? 10 : 20);
    for (CaseId cid : kAllCases) {
      const auto init = initialize(cid, cs, pb, cfg);
      if (!init) continue;
      const auto sol = sca_solve_case(cid, *init, cs, pb, cfg);
      EXPECT_EQ(sol.status, CaseStatus::kConverged);
      EXPECT_LE(testing::worst_drop(sol.trace), 1e-6);
      EXPECT_LE(testing::final_step(sol.trace), cfg.epsilon);
      EXPECT_GE(sol.min_residual, -1e-6);
      EXPECT_LE(sol.trace.back(), testing::trace_bound(cs, pb));
      // The surrogate objective is a lower bound of the exact value.
      EXPECT_LE(sol.trace.back(), sol.ssr + 1e-6);
      EXPECT_EQ(sol.trace.size(), static_cast<std::size_t>(sol.iterations) + 1);
    }
  }
}

TEST(ScaSolveCase, FixedPointStartStopsAfterOneIteration) {
  const auto cfg = serial();
  const auto cs = generate_channel_set(77, 2, ChannelStats{});
  const auto pb = budget_db(15);
  ScaConfig tight = cfg;
  tight.epsilon = 1e-7;
  const auto first = sca_solve_case(CaseId::kCase1, *initialize(CaseId::kCase1, cs, pb, cfg), cs, pb, tight);
  const auto again = sca_solve_case(CaseId::kCase1, first.iterate, cs, pb, cfg);
  EXPECT_EQ(again.iterations, 1);
  EXPECT_EQ(again.status, CaseStatus::kConverged);
  EXPECT_LE(testing::final_step(again.trace), cfg.epsilon);
}

TEST(ScaSolveCase, StepCapIsReported) {
  auto cfg = serial();
  cfg.max_outer_iters = 1;
  cfg.epsilon = 1e-12;
  const auto cs = generate_channel_set(78, 2, ChannelStats{});
  const auto sol = sca_solve_case(CaseId::kCase1, *initialize(CaseId::kCase1, cs, budget_db(20), cfg), cs,
                                  budget_db(20), cfg);
  EXPECT_EQ(sol.status, CaseStatus::kIterationCap);
  EXPECT_EQ(sol.iterations, 1);
}

TEST(SolveSsr, ReportedSsrIsExact) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto cs = generate_channel_set(90 + seed, 2, ChannelStats{});
    const auto pb = budget_db(10);
    const auto sol = solve_ssr(cs, pb, serial());
    EXPECT_NEAR(sol.ssr(), secrecy_sum_rate(sol.best.iterate.design, cs, pb), 1e-9);
    for (const auto& c : sol.cases)
      if (c.feasible()) {
        EXPECT_LE(c.ssr, sol.ssr());
      }
    EXPECT_EQ(sol.fingerprint, fingerprint(cs));
  }
}

TEST(SolveSsr, SilentEavesdropperPicksCase1) {
  auto cs = generate_channel_set(5, 2, ChannelStats{});
  cs.g1.setZero();
  cs.g2 = 0;
  const auto pb = budget_db(10);
  const auto sol = solve_ssr(cs, pb, serial());
  EXPECT_EQ(sol.best.case_id, CaseId::kCase1);
  const auto& r = sol.best.rates;
  EXPECT_NEAR(sol.ssr(), r.r_c + r.r_p1 + r.r_p2, 1e-12);
  EXPECT_EQ(r.c_ce + r.c_1e + r.c_2e, 0.0);
}

TEST(SolveSsr, ArgmaxSkipsInfeasibleCases) {
  std::vector<CaseSolution> cases(4);
  const double ssr[4] = {0.8, 0.5, 5.0, 0.2};
  for (int i = 0; i < 4; ++i) {
    cases[i].case_id = kAllCases[i];
    cases[i].ssr = ssr[i];
    cases[i].status = i == 2 ? CaseStatus::kInfeasible : CaseStatus::kConverged;
  }
  EXPECT_EQ(best_case_index(cases), 0u);
  for (auto& c : cases) c.status = CaseStatus::kInfeasible;
  EXPECT_FALSE(best_case_index(cases).has_value());
}

TEST(SolveSsr, ParallelMatchesSerial) {
  const auto cs = generate_channel_set(6, 2, ChannelStats{});
  auto par = serial();
  par.parallel_cases = true;
  const auto a = solve_ssr(cs, budget_db(10), serial());
  const auto b = solve_ssr(cs, budget_db(10), par);
  EXPECT_EQ(a.ssr(), b.ssr());
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(SolveSsr, GridOracleOnRealChannels) {
  int within = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cs = testing::real_channels(500 + seed);
    const auto pb = budget_db(10);
    const double grid = testing::grid_search_best(cs, pb).ssr;
    if (solve_ssr(cs, pb, serial()).ssr() >= grid - 0.05) ++within;
  }
  EXPECT_GE(within, 16);
}

TEST(SolveSsr, JsonDocumentShape) {
  const auto cs = generate_channel_set(7, 2, ChannelStats{});
  const auto j = to_json(solve_ssr(cs, budget_db(5), serial()));
  for (const char* key : {"scheme", "channel_fingerprint", "design", "theta", "ssr_bits", "rates",
                          "cases", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["design"]["p_c"].size(), 2u);
  EXPECT_EQ(j["design"]["p_c"][0].size(), 2u);
  EXPECT_EQ(j["cases"].size(), 4u);
  EXPECT_EQ(j["config"]["epsilon"], 1e-3);
}

TEST(ScaConfig, RejectsNonpositiveEpsilon) {
  ScaConfig cfg;
  cfg.epsilon = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

}  // namespace
}  // namespace crs
