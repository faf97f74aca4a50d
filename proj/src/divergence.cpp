#include "covertmimo/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "covertmimo/errors.hpp"

namespace covertmimo {
namespace {

constexpr double kPsdTol = 1e-12;

// Q^{1/2} for a PSD matrix; rejects anything with a clearly negative eigenvalue.
CMatrix psd_sqrt(const CMatrix& q, const char* who) {
  if (q.rows() != q.cols()) throw InvalidArgument(std::string(who) + ": Q must be square");
  GramMatrix f = [&] {
    try {
      return GramMatrix::from_hermitian(q);
    } catch (const InvalidArgument&) {
      throw InvalidArgument(std::string(who) + ": Q is not positive semidefinite");
    }
  }();
  const RVector roots = f.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return f.eigenvectors() * roots.cast<Complex>().asDiagonal() * f.eigenvectors().adjoint();
}

DivergenceBreakdown from_mode_powers(const std::vector<double>& x) {
  DivergenceBreakdown d;
  for (double xi : x) {
    if (xi <= 0.0) continue;  // limit value ln 1 + 1 - 1 = 0
    d.capacity_term += std::log1p(xi);
    d.penalty_term -= xi / (1.0 + xi);
    d.total += mode_divergence(xi);
  }
  return d;
}

}  // namespace

double mode_divergence(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 1e-2) {
    // sum_{k>=2} (-1)^k (k-1)/k x^k
    double term = x * x;
    double sum = 0.0;
    for (int k = 2; k <= 14; ++k) {
      const double c = static_cast<double>(k - 1) / k;
      sum += (k % 2 == 0 ? c : -c) * term;
      term *= x;
    }
    return sum;
  }
  return std::log1p(x) - x / (1.0 + x);
}

double mode_divergence_slope(double x) {
  if (x <= 0.0) return 0.0;
  return x / ((1.0 + x) * (1.0 + x));
}

DivergenceBreakdown kl_gram(const GramMatrix& w, const CMatrix& q, double sigma_w2) {
  if (!(sigma_w2 > 0.0)) throw InvalidArgument("kl: sigma_w2 must be positive");
  if (q.rows() != w.dim()) throw InvalidArgument("kl: Q and W dimensions differ");
  const CMatrix root = psd_sqrt(q, "kl");
  const CMatrix inner = root * w.matrix() * root;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("kl: eigensolver failed on Q^1/2 W Q^1/2");

  const RVector& mu = solver.eigenvalues();
  // Roundoff in Q^1/2 W Q^1/2 is relative to ||W|| ||Q||, not to its own spectrum.
  const double q_norm = root.cwiseAbs2().rowwise().sum().maxCoeff();
  const double scale = std::max({mu.cwiseAbs().maxCoeff(), w.spectral_norm() * q_norm, 1e-300});
  std::vector<double> x;
  x.reserve(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu(i) < -kPsdTol * scale) throw NumericalError("kl: W Q has a negative eigenvalue");
    // Roundoff floor: eigenvalues this small relative to the scale are zero.
    x.push_back(mu(i) <= kPsdTol * scale ? 0.0 : mu(i) / sigma_w2);
  }
  return from_mode_powers(x);
}

DivergenceBreakdown kl_willie(const ChannelMatrix& h_w, const CMatrix& q, double sigma_w2) {
  if (q.rows() != h_w.cols() || q.cols() != h_w.cols())
    throw InvalidArgument("kl_willie: Q must be N_a x N_a with N_a = cols(H_w)");
  return kl_gram(gram(h_w), q, sigma_w2);
}

DivergenceBreakdown kl_isotropic(const RVector& alloc, double gamma_w, double sigma_w2, int n_w) {
  if (!(sigma_w2 > 0.0)) throw InvalidArgument("kl_isotropic: sigma_w2 must be positive");
  if (!(gamma_w >= 0.0)) throw InvalidArgument("kl_isotropic: gamma_w must be >= 0");
  if (n_w < 1) throw InvalidArgument("kl_isotropic: n_w must be >= 1");
  std::vector<double> sorted(alloc.data(), alloc.data() + alloc.size());
  for (double v : sorted)
    if (!(v >= 0.0)) throw InvalidArgument("kl_isotropic: allocations must be >= 0");
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  sorted.resize(std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(n_w)));
  for (double& v : sorted) v *= gamma_w / sigma_w2;
  return from_mode_powers(sorted);
}

double pinsker_bound(double d_total) {
  if (!(d_total >= 0.0)) throw InvalidArgument("pinsker_bound: divergence must be >= 0");
  return std::sqrt(0.5 * d_total);
}

double sum_error_floor(double tv) {
  if (!(tv >= 0.0 && tv <= 1.0)) throw InvalidArgument("sum_error_floor: tv must lie in [0, 1]");
  return 1.0 - tv;
}

MonotoneWitness kl_monotone_check(const GramMatrix& w1, const GramMatrix& w2, const CMatrix& q,
                                  double sigma_w2) {
  if (w1.dim() != w2.dim()) throw InvalidArgument("kl_monotone_check: dimension mismatch");
  const CMatrix diff = w1.matrix() - w2.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  const double scale = std::max({w1.spectral_norm(), w2.spectral_norm(), 1e-300});
  if (solver.info() != Eigen::Success || solver.eigenvalues()(0) < -1e-10 * scale)
    throw InvalidArgument("kl_monotone_check: w1 - w2 is not positive semidefinite");

  MonotoneWitness out;
  out.d_larger = kl_gram(w1, q, sigma_w2).total;
  out.d_smaller = kl_gram(w2, q, sigma_w2).total;
  out.holds = out.d_larger >= out.d_smaller - 1e-10;
  return out;
}

}  // namespace covertmimo
