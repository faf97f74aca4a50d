#include <gtest/gtest.h>

#include <cmath>

#include "covertmimo/errors.hpp"
#include "covertmimo/optimizer.hpp"
#include "oracles.hpp"

using namespace covertmimo;

namespace {

SystemConfig system(int n_a, int n_w, double power, double delta, std::int64_t n) {
  SystemConfig s;
  s.n_a = n_a;
  s.n_b = n_a;
  s.n_w = n_w;
  s.power = power;
  s.delta = delta;
  s.blocklength = n;
  return s;
}

GramMatrix diag(std::initializer_list<double> v) {
  RVector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return GramMatrix::diagonal(r);
}

}  // namespace

TEST(Waterfill, TwoModeClosedForm) {
  // mu = (P + 1/4 + 1) / 2 with both modes active: allocations mu - 1/lambda_i.
  const RVector a = standard_waterfill(diag({4.0, 1.0}), 1.0, 1.0);
  EXPECT_NEAR(a(0), 0.875, 1e-14);
  EXPECT_NEAR(a(1), 0.125, 1e-14);
  EXPECT_NEAR(waterfill_level(diag({4.0, 1.0}), 1.0, 1.0), 1.125, 1e-14);
}

TEST(Waterfill, InactiveModeAndBudget) {
  const RVector a = standard_waterfill(diag({4.0, 1.0}), 1.0, 0.5);
  EXPECT_NEAR(a(0), 0.5, 1e-14);
  EXPECT_EQ(a(1), 0.0);
  const RVector b = standard_waterfill(diag({3.0, 2.0, 0.0}), 0.5, 7.0);
  EXPECT_NEAR(b.sum(), 7.0, 1e-12);
  EXPECT_EQ(b(2), 0.0);
}

TEST(Solver, ScalarSecretMatchesInverseOfPenalty) {
  // Unit gains: the covertness constraint alone fixes v with g(v) = budget.
  const SystemConfig s = system(1, 1, 10.0, 0.1, 100);
  const CovarianceSolution sol = solve_secret(s, diag({1.0}));
  EXPECT_NEAR(sol.divergence, s.lpd_budget(), 1e-12 * s.lpd_budget());
  EXPECT_NEAR(sol.rate, std::log1p(sol.alloc(0)), 1e-15);
  EXPECT_GT(sol.multipliers.eta, 0.0);
  EXPECT_LE(kkt_residual(sol, s, diag({1.0})).max(), 1e-6);
}

TEST(Solver, NoSecretScalarIsExact) {
  const SystemConfig s = system(1, 1, 10.0, 0.1, 100);
  const CovarianceSolution sol = solve_nosecret(s, diag({1.0}));
  EXPECT_NEAR(sol.alloc(0), std::expm1(s.lpd_budget()), 1e-15);
  EXPECT_NEAR(sol.rate, s.lpd_budget(), 1e-15);
}

TEST(Solver, PowerLimitedReturnsWaterfill) {
  const SystemConfig s = system(2, 2, 0.1, 0.9, 1);
  const GramMatrix w = diag({3.0, 1.0});
  for (Mode m : {Mode::secret, Mode::no_secret}) {
    const CovarianceSolution sol = solve(m, s, w);
    const RVector wf = standard_waterfill(w, 1.0, 0.1);
    EXPECT_LT((sol.alloc - wf).norm(), 1e-9);
    EXPECT_EQ(sol.multipliers.eta, 0.0);
    EXPECT_LE(kkt_residual(sol, s, w).max(), 1e-6);
  }
}

TEST(Solver, ZeroDeltaGivesZeroCovariance) {
  const SystemConfig s = system(2, 2, 1.0, 0.0, 100);
  const CovarianceSolution sol = solve_secret(s, diag({1.0, 1.0}));
  EXPECT_EQ(sol.rate, 0.0);
  EXPECT_EQ(sol.alloc.norm(), 0.0);
  EXPECT_TRUE(std::isinf(sol.multipliers.eta));
}

TEST(Solver, DegenerateChannelThrows) {
  EXPECT_THROW(solve_secret(system(2, 2, 1.0, 0.1, 10), diag({0.0, 0.0})), DegenerateChannel);
  EXPECT_THROW(solve_secret(system(3, 2, 1.0, 0.1, 10), diag({1.0, 1.0})), InvalidArgument);
}

// Randomized cross-check against the brute-force oracle on a coarser grid.
TEST(SolverProperty, MatchesGridOracleAndKkt) {
  Rng rng(101);
  std::uniform_real_distribution<double> gain(0.2, 4.0), logp(-2.0, 1.5), dlt(0.05, 0.9);
  for (int t = 0; t < 24; ++t) {
    const int na = 1 + t % 2, nw = 1 + (t / 2) % 2;
    const double g0 = gain(rng), g1 = std::min(g0, gain(rng));
    const SystemConfig s = system(na, nw, std::pow(10.0, logp(rng)), dlt(rng), 1 + t % 5);
    const GramMatrix w = na == 1 ? diag({g0}) : diag({g0, g1});
    for (Mode m : {Mode::secret, Mode::no_secret}) {
      const CovarianceSolution sol = solve(m, s, w);
      oracle::TwoModeProblem p;
      p.a = na == 1 ? std::vector<double>{g0} : std::vector<double>{g0, g1};
      p.m_w = std::min(na, nw);
      p.power = s.power;
      p.budget = s.lpd_budget();
      p.secret = m == Mode::secret;
      const auto g = oracle::grid_search(p, 20000);
      EXPECT_GE(sol.rate, g.rate - 1e-12) << "case " << t;
      EXPECT_LE(sol.rate - g.rate, 1e-3) << "case " << t;
      const KktReport k = kkt_residual(sol, s, w);
      EXPECT_LE(k.max(), 1e-6) << "case " << t << " " << to_string(m);
      EXPECT_LE(k.power_violation, 1e-9);
      EXPECT_LE(k.lpd_violation, 1e-9);
      EXPECT_FALSE(sol.diagnostics.duality_gap);
    }
  }
}

TEST(SolverProperty, MonotoneInDeltaAndPower) {
  const GramMatrix w = diag({2.0, 0.5});
  for (Mode m : {Mode::secret, Mode::no_secret}) {
    double prev = 0.0;
    for (double d : {0.01, 0.05, 0.1, 0.3, 0.6}) {
      const double r = solve(m, system(2, 2, 5.0, d, 50), w).rate;
      EXPECT_GE(r, prev - 1e-14);
      prev = r;
    }
    prev = 0.0;
    for (double p : {0.001, 0.01, 0.1, 1.0}) {
      const double r = solve(m, system(2, 2, p, 0.5, 5), w).rate;
      EXPECT_GE(r, prev - 1e-14);
      prev = r;
    }
  }
}

TEST(SolverProperty, ExactDominatesAchievableAndIsDeterministic) {
  const GramMatrix w = diag({1.5, 1.0, 0.25});
  for (int nw : {1, 2, 3}) {
    const SystemConfig s = system(3, nw, 10.0, 0.05, 1000);
    for (Mode m : {Mode::secret, Mode::no_secret}) {
      const CovarianceSolution ex = solve(m, s, w), ach = achievable_scheme(m, s, w);
      EXPECT_GE(ex.rate, ach.rate - 1e-15);
      EXPECT_LE(ach.constraint_value, s.lpd_budget() * (1 + 1e-9));
      EXPECT_EQ(ex.rate, solve(m, s, w).rate);
      EXPECT_LE(kkt_residual(ex, s, w).max(), 1e-6);
    }
  }
}

TEST(SolverProperty, TopMSplitsAcrossModesWillieCannotSee) {
  // Equal gains, one Willie mode: spreading power below the epigraph level is free.
  const SystemConfig s = system(2, 1, 10.0, 0.1, 10000);
  const CovarianceSolution sol = solve_secret(s, diag({3.0, 3.0}));
  EXPECT_NEAR(sol.alloc(0), sol.alloc(1), 1e-9 * sol.alloc(0));
  EXPECT_GT(sol.t_level, 0.0);
  EXPECT_LE(kkt_residual(sol, s, diag({3.0, 3.0})).max(), 1e-6);
}

TEST(Achievable, ClosedFormPowers) {
  const SystemConfig s = system(2, 2, 10.0, 0.01, 10000);
  EXPECT_NEAR(achievable_power_secret(s), std::sqrt(2.0) * 2 * 0.01 / std::sqrt(10000.0 * 2), 1e-15);
  EXPECT_NEAR(achievable_power_nosecret(s), 2.0 * 2 * 1e-4 / (10000.0 * 2), 1e-18);
  const SystemConfig tight = system(1, 1, 1e-6, 0.5, 1);
  EXPECT_EQ(achievable_power_secret(tight), 1e-6);
}
