#include <gtest/gtest.h>

#include <cmath>

#include "covertmimo/errors.hpp"
#include "covertmimo/optimizer.hpp"
#include "covertmimo/scaling.hpp"

using namespace covertmimo;

namespace {

SystemConfig system(int n_a, int n_w, double delta, std::int64_t n) {
  SystemConfig s;
  s.n_a = n_a;
  s.n_b = n_a;
  s.n_w = n_w;
  s.power = 10.0;
  s.delta = delta;
  s.blocklength = n;
  return s;
}

}  // namespace

TEST(Bounds, SecretLowerClosedForm) {
  const SystemConfig s = system(2, 2, 0.01, 10000);
  const BoundsReport b = srl_bounds_secret(s, RVector::Ones(2));
  const double arg = std::sqrt(2.0) * 0.01 / std::sqrt(10000.0 * 2);
  EXPECT_NEAR(b.lower, 2 * std::log1p(arg), 1e-18);
  EXPECT_NEAR(b.lower, 1.99990000667e-4, 1e-14);
  EXPECT_GE(b.xi, 1.0);
  EXPECT_NEAR(b.upper, 2 * std::log1p(b.xi * arg), 1e-15 * b.upper);
}

TEST(Bounds, XiTendsToOne) {
  double prev = 2.0;
  for (std::int64_t n : {100LL, 10000LL, 1000000LL}) {
    const double xi = secret_xi(system(2, 2, 0.01, n));
    EXPECT_GE(xi, 1.0);
    EXPECT_LE(xi, prev);
    prev = xi;
  }
  EXPECT_LT(prev - 1.0, 1e-6);
  EXPECT_NEAR(nosecret_xi(system(2, 2, 0.1, 100)), 200.0 / (200.0 - 0.02), 1e-15);
  EXPECT_THROW(nosecret_xi(system(1, 1, 0.9, 1)), InvalidRegime);
}

TEST(Bounds, AchievableWithinBoundsForEqualGains) {
  for (Mode m : {Mode::secret, Mode::no_secret}) {
    for (std::int64_t n : {1000LL, 100000LL}) {
      const SystemConfig s = system(2, 2, 0.01, n);
      const GramMatrix w = GramMatrix::diagonal(RVector::Ones(2));
      const BoundsReport b = m == Mode::secret ? srl_bounds_secret(s, RVector::Ones(2))
                                               : srl_bounds_nosecret(s, RVector::Ones(2));
      const double ach = achievable_scheme(m, s, w).rate;
      EXPECT_GE(ach, b.lower * (1 - 1e-9));
      EXPECT_LE(ach, b.upper * (1 + 1e-9));
    }
  }
}

// The exact optimum over covariances exceeds the upper expression by a factor
// tending to sqrt(2) in the secret regime; this pins the observed value.
TEST(Bounds, ExactOverUpperRatioIsSqrtTwoAsymptotically) {
  const SystemConfig s = system(1, 1, 0.01, 1000000);
  const double exact = solve_secret(s, GramMatrix::diagonal(RVector::Ones(1))).rate;
  const BoundsReport b = srl_bounds_secret(s, RVector::Ones(1));
  EXPECT_NEAR(exact / b.upper, std::sqrt(2.0), 1e-3);
  EXPECT_GE(exact, b.lower);
}

TEST(Bounds, NoSecretSandwichHoldsForEqualGains) {
  for (std::int64_t n : {1000LL, 1000000LL}) {
    const SystemConfig s = system(2, 2, 0.01, n);
    const double exact = solve_nosecret(s, GramMatrix::diagonal(RVector::Ones(2))).rate;
    const BoundsReport b = srl_bounds_nosecret(s, RVector::Ones(2));
    EXPECT_GE(exact, b.lower * (1 - 1e-9));
    EXPECT_LE(exact, b.upper * (1 + 1e-6));
  }
}

TEST(Rank1, OrthogonalDirectionsGiveFullRate) {
  const SystemConfig s = system(2, 1, 0.01, 1000);
  const BoundsReport b = rank1_bounds(s, 1.0, 1.0, 0.0, true);
  EXPECT_TRUE(b.infinite_l);
  EXPECT_NEAR(b.lower, std::log1p(10.0), 1e-15);
  const BoundsReport aligned = rank1_bounds(s, 1.0, 1.0, 1.0, true);
  EXPECT_FALSE(aligned.infinite_l);
  EXPECT_LT(aligned.lower, b.lower);
  EXPECT_THROW(rank1_bounds(s, 1.0, 1.0, 1.5, true), InvalidArgument);
}

TEST(Rank1, UnitRankWillieNeedsWellConditionedBob) {
  const SystemConfig s = system(2, 1, 0.01, 1000);
  EXPECT_NO_THROW(unit_rank_willie_bounds(s, 1.0, 1.0, true));
  EXPECT_THROW(unit_rank_willie_bounds(s, 1.0, 1.0, false), InvalidRegime);
}

TEST(Estimators, SequencesConvergeForExactRates) {
  const SystemConfig s = system(1, 1, 0.01, 1000);
  const GramMatrix w = GramMatrix::diagonal(RVector::Ones(1));
  const auto l = l_estimator(s, [&](const SystemConfig& c) { return solve_secret(c, w).rate; });
  EXPECT_TRUE(l.converged);
  EXPECT_NEAR(l.value, std::sqrt(2.0), 1e-3);
  const auto lh = lhat_estimator(s, [&](const SystemConfig& c) { return solve_nosecret(c, w).rate; });
  EXPECT_TRUE(lh.converged);
  EXPECT_TRUE(lhat_bracket(s, RVector::Ones(1)).contains(lh.value, 1e-3));
  EXPECT_EQ(decade_ladder(2, 4), (std::vector<double>{100.0, 1000.0, 10000.0}));
}

TEST(Estimators, ScalarBracketCollapses) {
  SystemConfig s = system(1, 1, 1e-4, 1000000);
  const Bracket b = l_bracket(s, RVector::Ones(1));
  EXPECT_NEAR(b.lower, 1.0, 1e-15);
  EXPECT_NEAR(b.upper, 1.0, 1e-9);
}

TEST(Massive, FullRateProbabilityMatchesBeta) {
  SystemConfig s = system(2, 1, 0.01, 1000000000);
  s.sigma_b2 = s.sigma_w2 = 1e-2;
  s.power = 1e-2 * std::pow(10.0, 1.5) / 1e-3;
  const auto p = full_rate_probability(Mode::secret, s, 1e-3, 100);
  const double g = std::sqrt(2.0) * 1e-2 * 1e-2 / (std::sqrt(1e9) * 1e-3 * s.power);
  EXPECT_NEAR(p.g, g, 1e-22);
  // 1 - (1 - g)^99 by its alternating binomial series; pow loses digits at tiny g.
  double series = 0.0, term = 1.0;
  for (int k = 1; k <= 99; ++k) {
    term *= -g * (99 - k + 1) / k;
    series -= term;
  }
  EXPECT_NEAR(p.exact, series, 1e-15 * series);
  EXPECT_LT(p.raw_bound, 0.0);
  EXPECT_EQ(p.bound, 0.0);
  EXPECT_FALSE(p.saturated);
  const auto q = full_rate_probability(Mode::no_secret, s, 1e-3, 100);
  EXPECT_LT(q.g, p.g);
}

TEST(Massive, GrowthAndExpectedRateMonotone) {
  SystemConfig s = system(2, 1, 0.01, 1000000000);
  s.sigma_b2 = s.sigma_w2 = 1e-2;
  s.power = 316.22776601683796;
  double prev_s = 0.0, prev_n = 0.0;
  for (int na : {2, 5, 10, 50, 100, 200}) {
    const double rs = expected_rank1_rate(Mode::secret, s, 1e-3, 1e-3, na);
    const double rn = expected_rank1_rate(Mode::no_secret, s, 1e-3, 1e-3, na);
    EXPECT_GE(rs, prev_s);
    EXPECT_GE(rn, prev_n);
    EXPECT_GT(rs, rn);
    EXPECT_LE(rs, std::log1p(s.power * 1e-3 / s.sigma_b2));
    prev_s = rs;
    prev_n = rn;
  }
  EXPECT_NEAR(kn_growth(Mode::secret, s, 1e-3, 2), std::sqrt(1e9 / 2.0), 1e-6);
  EXPECT_TRUE(std::isinf(kn_growth(Mode::secret, s, 1e-3, 2, 0.0)));
}

TEST(Massive, ExpectedRateAgainstMidpointQuadrature) {
  SystemConfig s = system(2, 1, 0.3, 100);
  s.power = 2.0;
  const int na = 6;
  const double arg = rank1_bounds(s, 1.0, 1.0, 1.0, true).lower_argument;
  const double cap = std::log1p(s.power);
  const int m = na - 1;
  const int steps = 2000000;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double u = (i + 0.5) / steps;
    acc += std::min(std::log1p(arg / u), cap) * m * std::pow(1.0 - u, m - 1);
  }
  EXPECT_NEAR(expected_rank1_rate(Mode::secret, s, 1.0, 1.0, na), acc / steps, 1e-6);
}
