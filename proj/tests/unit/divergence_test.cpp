#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "covertmimo/divergence.hpp"
#include "covertmimo/errors.hpp"
#include "covertmimo/geometry.hpp"
#include "oracles.hpp"

using namespace covertmimo;

namespace {

CMatrix random_complex(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  CMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

}  // namespace

TEST(ModeDivergence, SeriesMatchesClosedFormAtSwitch) {
  for (double x : {1e-8, 1e-4, 9.99e-3, 1e-2, 1.01e-2, 0.5, 10.0}) {
    const double closed = std::log1p(x) - x / (1.0 + x);
    // The closed form cancels to absolute error of order eps * x.
    EXPECT_NEAR(mode_divergence(x), closed, 4e-16 * x + 1e-14 * closed) << x;
  }
  EXPECT_EQ(mode_divergence(0.0), 0.0);
  // x^2/2 - 2x^3/3 + 3x^4/4 - ...
  EXPECT_NEAR(mode_divergence(1e-6), 0.5e-12 - 2e-18 / 3 + 0.75e-24, 1e-28);
}

TEST(ModeDivergence, SlopeIsDerivative) {
  for (double x : {1e-3, 0.3, 2.0}) {
    const double h = 1e-6 * x;
    const double fd = (mode_divergence(x + h) - mode_divergence(x - h)) / (2 * h);
    EXPECT_NEAR(mode_divergence_slope(x), fd, 1e-7 * std::abs(fd));
  }
}

TEST(KlWillie, ScalarValue) {
  const auto d = kl_willie(ChannelMatrix::from_real(Eigen::MatrixXd::Ones(1, 1)), CMatrix::Ones(1, 1), 1.0);
  EXPECT_NEAR(d.total, std::numbers::ln2 - 0.5, 1e-15);
  EXPECT_NEAR(d.capacity_term, std::numbers::ln2, 1e-15);
  EXPECT_NEAR(d.penalty_term, -0.5, 1e-15);
}

TEST(KlWillie, MatchesDenseFormulaOnRandomCases) {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const int nw = 1 + t % 3, na = 1 + (t / 3) % 3;
    const CMatrix h = random_complex(nw, na, rng);
    const CMatrix a = random_complex(na, na, rng);
    const CMatrix q = a * a.adjoint();
    const double sigma = 0.5 + 0.1 * (t % 5);
    EXPECT_NEAR(kl_willie(ChannelMatrix(h), q, sigma).total, oracle::willie_kl(h, q, sigma), 1e-10);
  }
}

TEST(KlWillie, ZeroForZeroCovarianceAndNullSteering) {
  Rng rng(4);
  EXPECT_EQ(kl_willie(ChannelMatrix(random_complex(2, 3, rng)), CMatrix::Zero(3, 3), 1.0).total, 0.0);
  const CVector ub = random_unit_vector(5, rng), uw = random_unit_vector(5, rng);
  const CVector v = null_steering(ub, uw);
  EXPECT_LE(std::abs(kl_willie(ChannelMatrix(CMatrix(uw.adjoint())), v * v.adjoint(), 1.0).total), 1e-12);
}

TEST(KlWillie, RejectsBadInputs) {
  const ChannelMatrix h(CMatrix::Identity(2, 2));
  EXPECT_THROW(kl_willie(h, CMatrix::Identity(3, 3), 1.0), InvalidArgument);
  EXPECT_THROW(kl_willie(h, CMatrix::Identity(2, 2), 0.0), InvalidArgument);
  CMatrix neg = CMatrix::Identity(2, 2);
  neg(0, 0) = -1.0;
  EXPECT_THROW(kl_willie(h, neg, 1.0), InvalidArgument);
}

TEST(KlIsotropic, UsesLargestMAllocations) {
  RVector alloc(3);
  alloc << 0.1, 0.5, 0.3;
  const auto d = kl_isotropic(alloc, 2.0, 1.0, 2);
  EXPECT_NEAR(d.total, mode_divergence(1.0) + mode_divergence(0.6), 1e-15);
  SystemConfig s;
  s.n_a = 3;
  s.n_w = 2;
  s.gamma_w = 2.0;
  const CMatrix q = alloc.cast<Complex>().asDiagonal();
  // Worst-case channel with sorted allocation matches the isotropic shortcut.
  RVector sorted = alloc;
  std::sort(sorted.data(), sorted.data() + 3, std::greater<>());
  const CMatrix qs = sorted.cast<Complex>().asDiagonal();
  EXPECT_NEAR(kl_willie(worst_case_willie_channel(s), qs, 1.0).total, d.total, 1e-14);
  EXPECT_LE(kl_willie(worst_case_willie_channel(s), q, 1.0).total, d.total + 1e-14);
}

TEST(KlProperties, NonnegativeAndMonotoneInWillieGram) {
  Rng rng(23);
  for (int t = 0; t < 40; ++t) {
    const CMatrix a = random_complex(3, 3, rng), b = random_complex(3, 3, rng), c = random_complex(3, 3, rng);
    const CMatrix q = c * c.adjoint();
    const GramMatrix w2 = GramMatrix::from_hermitian(a * a.adjoint());
    const GramMatrix w1 = GramMatrix::from_hermitian(a * a.adjoint() + b * b.adjoint());
    const auto witness = kl_monotone_check(w1, w2, q, 1.0);
    EXPECT_TRUE(witness.holds);
    EXPECT_GE(witness.d_smaller, 0.0);
    EXPECT_GE(witness.d_larger + 1e-12, witness.d_smaller);
    const auto d = kl_gram(w1, q, 1.0);
    EXPECT_GE(d.capacity_term, 0.0);
    EXPECT_LE(d.penalty_term, 0.0);
  }
  EXPECT_THROW(kl_monotone_check(GramMatrix::diagonal(RVector::Zero(2)), GramMatrix::diagonal(RVector::Ones(2)),
                                 CMatrix::Identity(2, 2), 1.0),
               InvalidArgument);
}

TEST(Pinsker, BoundAndFloor) {
  EXPECT_DOUBLE_EQ(pinsker_bound(0.02), 0.1);
  EXPECT_DOUBLE_EQ(sum_error_floor(0.1), 0.9);
  EXPECT_EQ(pinsker_bound(0.0), 0.0);
}
