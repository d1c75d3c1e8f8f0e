#include "crs/conic_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace crs {
namespace {

LinearForm lf(std::initializer_list<std::pair<int, double>> terms, double c = 0) {
  LinearForm l;
  for (auto [i, v] : terms) l.add(i, v);
  l.constant = c;
  return l;
}

TEST(ConicSolver, EpigraphOfMin) {
  ConvexProgram p;
  const int t = p.add_var("t");
  p.objective.add(t, 1.0);
  p.constraints.push_back(Constraint::affine_le("t<=3", lf({{t, 1}}, -3)));
  p.constraints.push_back(Constraint::affine_le("t<=5", lf({{t, 1}}, -5)));
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolverStatus::kOptimal);
  EXPECT_NEAR(r.x[t], 3.0, 1e-7);
}

ConvexProgram ball_program() {
  ConvexProgram p;
  const int x = p.add_var("x");
  const int y = p.add_var("y");
  p.objective.add(x, 1.0).add(y, 1.0);
  Constraint c;
  c.kind = BlockKind::kPowerBall;
  c.name = "ball";
  c.ball = {x, y};
  c.affine.constant = -2.0;
  p.constraints.push_back(c);
  return p;
}

TEST(ConicSolver, SymmetricBall) {
  const auto p = ball_program();
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolverStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.x[1], 1.0, 1e-6);
  EXPECT_NEAR(r.objective, 2.0, 1e-7);
}

// 2^x <= 1 + y, y <= 3, maximize x.
ConvexProgram exp_program() {
  ConvexProgram p;
  const int x = p.add_var("x");
  const int y = p.add_var("y", -kInf, 3.0);
  p.objective.add(x, 1.0);
  Constraint c;
  c.kind = BlockKind::kExponential;
  c.name = "exp";
  c.exponent = lf({{x, 1}});
  c.affine = lf({{y, -1}}, -1);
  p.constraints.push_back(c);
  return p;
}

TEST(ConicSolver, ExponentialMatchesGridSearch) {
  // Grid oracle: for each y on a fine grid the best x is log2(1 + y); scan x
  // on a 1e-4 grid and keep the largest feasible value.
  double grid_best = -kInf;
  for (int iy = 0; iy <= 400; ++iy) {
    const double y = -0.99 + iy * (3.99 / 400);
    for (int ix = 0; ix <= 40000; ++ix) {
      const double x = -2.0 + ix * 1e-4;
      if (std::exp2(x) <= 1.0 + y + 1e-15) grid_best = std::max(grid_best, x);
    }
  }
  EXPECT_NEAR(grid_best, 2.0, 1e-4);
  const auto r = solve(exp_program());
  ASSERT_EQ(r.status, SolverStatus::kOptimal);
  EXPECT_NEAR(r.x[0], grid_best, 1e-4);
  EXPECT_NEAR(r.x[0], 2.0, 1e-6);
}

TEST(ConicSolver, CheckKktReproducesReportedResiduals) {
  for (const auto& p : {ball_program(), exp_program()}) {
    const auto r = solve(p);
    ASSERT_EQ(r.status, SolverStatus::kOptimal);
    const auto k = check_kkt(p, r);
    EXPECT_NEAR(k.stationarity, r.residuals.stationarity, 1e-10);
    EXPECT_NEAR(k.primal, r.residuals.primal, 1e-10);
    EXPECT_NEAR(k.complementarity, r.residuals.complementarity, 1e-10);
    EXPECT_LE(k.max(), SolverConfig{}.kkt_tol);
  }
}

TEST(ConicSolver, PerturbedPointFailsStationarity) {
  const auto p = ball_program();
  auto r = solve(p);
  ASSERT_EQ(r.status, SolverStatus::kOptimal);
  r.x[0] += 1e-3;
  EXPECT_GT(check_kkt(p, r).stationarity, SolverConfig{}.kkt_tol);
}

TEST(ConicSolver, PrimalResidualIsConstraintViolation) {
  const auto p = ball_program();
  SolverResult r;
  r.x = VectorXd::Constant(2, 2.0);
  r.multipliers = VectorXd::Zero(1);
  r.lower_multipliers = r.upper_multipliers = VectorXd::Zero(2);
  EXPECT_NEAR(check_kkt(p, r).primal, 6.0, 1e-12);
}

TEST(ConicSolver, GradientCheckAffineIsExact) {
  ConvexProgram p;
  const int a = p.add_var("a"), b = p.add_var("b");
  p.constraints.push_back(Constraint::affine_le("l", lf({{a, 2}, {b, -1}}, 1)));
  EXPECT_EQ(gradient_check(p, VectorXd::Constant(2, 0.3)), 0.0);
}

TEST(ConicSolver, GradientCheckNonlinearFamilies) {
  ConvexProgram p;
  const int a = p.add_var("a"), b = p.add_var("b"), d = p.add_var("d");
  Constraint q;
  q.kind = BlockKind::kQuadOverLinear;
  q.squares = {lf({{a, 1.5}, {b, -0.5}}, 0.2), lf({{b, 1}})};
  q.denominator = lf({{d, 2}}, 0.1);
  q.affine = lf({{a, 1}});
  p.constraints.push_back(q);
  Constraint e;
  e.kind = BlockKind::kExponential;
  e.exponent = lf({{a, 0.7}, {d, -0.3}}, 0.4);
  e.affine = lf({{b, -1}});
  p.constraints.push_back(e);
  Constraint s;
  s.kind = BlockKind::kQuadratic;
  s.weight = 0.25;
  s.squares = {lf({{a, 1}, {b, -1}})};
  p.constraints.push_back(s);
  VectorXd x(3);
  x << 0.3, -0.8, 0.9;
  EXPECT_LE(gradient_check(p, x), 1e-5);
}

TEST(ConicSolver, DetectsInfeasibleProgram) {
  ConvexProgram p;
  const int x = p.add_var("x");
  p.objective.add(x, 1.0);
  p.constraints.push_back(Constraint::affine_le("x<=-1", lf({{x, 1}}, 1)));
  p.constraints.push_back(Constraint::affine_le("x>=1", lf({{x, -1}}, 1)));
  EXPECT_EQ(solve(p).status, SolverStatus::kInfeasible);
}

TEST(ConicSolver, FixedVariablesStayFixed) {
  auto p = ball_program();
  p.fix(1, 0.5);
  const auto r = solve(p);
  ASSERT_EQ(r.status, SolverStatus::kOptimal);
  EXPECT_EQ(r.x[1], 0.5);
  EXPECT_NEAR(r.x[0], std::sqrt(2.0 - 0.25), 1e-6);
}

TEST(ConicSolver, DeterministicAndMonotone) {
  const auto p = exp_program();
  VectorXd warm(2);
  warm << 0.0, 1.0;
  const auto a = solve(p, {}, warm);
  const auto b = solve(p, {}, warm);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_TRUE(a.merit_monotone);
  EXPECT_EQ(a.phase1_iterations, 0);
}

TEST(ConicSolver, RejectsBadConfig) {
  SolverConfig cfg;
  cfg.reduction_factor = 1.5;
  EXPECT_THROW(solve(ball_program(), cfg), DomainError);
}

}  // namespace
}  // namespace crs
