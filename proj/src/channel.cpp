#include "covertmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "covertmimo/errors.hpp"

namespace covertmimo {
namespace {

constexpr double kUnitNormTol = 1e-12;

bool all_finite(const CMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

// Rotate v so that its largest-modulus entry is real and positive.
void normalize_phase(Eigen::Ref<CVector> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs * (1.0 + 1e-12)) {
      best = i;
      best_abs = a;
    }
  }
  if (best_abs > 0.0) v *= std::conj(v(best)) / best_abs;
}

bool lex_less(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace

ChannelMatrix::ChannelMatrix(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1)
    throw InvalidArgument("ChannelMatrix: needs at least one row and one column");
  if (!all_finite(entries_)) throw InvalidArgument("ChannelMatrix: non-finite entry");
}

ChannelMatrix ChannelMatrix::from_real(const Eigen::MatrixXd& entries) {
  return ChannelMatrix(entries.cast<Complex>());
}

GramMatrix GramMatrix::from_hermitian(const CMatrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw InvalidArgument("GramMatrix: matrix must be square and non-empty");
  if (!all_finite(a)) throw InvalidArgument("GramMatrix: non-finite entry");

  CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("GramMatrix: eigensolver failed");

  const Eigen::Index n = sym.rows();
  const RVector& raw_values = solver.eigenvalues();  // ascending
  const CMatrix& raw_vectors = solver.eigenvectors();
  const double scale = std::max(raw_values.cwiseAbs().maxCoeff(), 0.0);
  if (raw_values(0) < -1e-12 * std::max(scale, 1e-300))
    throw InvalidArgument("GramMatrix: matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(raw_values(0)) + ")");

  std::vector<CVector> vecs(n);
  std::vector<double> vals(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    vals[k] = std::max(raw_values(k), 0.0);
    vecs[k] = raw_vectors.col(k);
    normalize_phase(vecs[k]);
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return vals[i] > vals[j]; });

  // Break ties lexicographically within runs of numerically equal eigenvalues.
  const double tie_tol = 1e-12 * std::max(scale, 1.0);
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && vals[order[start]] - vals[order[end]] <= tie_tol) ++end;
    std::sort(order.begin() + start, order.begin() + end,
              [&](Eigen::Index i, Eigen::Index j) { return lex_less(vecs[i], vecs[j]); });
    start = end;
  }

  RVector values(n);
  CMatrix vectors(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    values(k) = vals[order[k]];
    vectors.col(k) = vecs[order[k]];
  }
  return GramMatrix(std::move(sym), std::move(values), std::move(vectors));
}

GramMatrix GramMatrix::diagonal(const RVector& values) {
  return from_hermitian(values.cast<Complex>().asDiagonal().toDenseMatrix());
}

CMatrix GramMatrix::reconstruct() const {
  return eigenvectors_ * eigenvalues_.cast<Complex>().asDiagonal() * eigenvectors_.adjoint();
}

CompoundWillieSet::CompoundWillieSet(double gamma, int m) : gamma_w(gamma), m_active(m) {
  if (!(gamma_w > 0.0)) throw InvalidArgument("CompoundWillieSet: gamma_w must be positive");
  if (m_active < 1) throw InvalidArgument("CompoundWillieSet: m_active must be >= 1");
}

bool CompoundWillieSet::contains(const GramMatrix& w, double rel_tol) const {
  return w.spectral_norm() <= gamma_w * (1.0 + rel_tol);
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw InvalidArgument("SystemConfig." + field + ": " + why);
  };
  if (n_a < 1) fail("n_a", "must be >= 1");
  if (n_b < 1) fail("n_b", "must be >= 1");
  if (n_w < 1) fail("n_w", "must be >= 1");
  if (!(sigma_b2 > 0.0) || !std::isfinite(sigma_b2)) fail("sigma_b2", "must be positive");
  if (!(sigma_w2 > 0.0) || !std::isfinite(sigma_w2)) fail("sigma_w2", "must be positive");
  if (!(power > 0.0) || !std::isfinite(power)) fail("power", "must be positive");
  if (!(delta >= 0.0 && delta < 1.0)) fail("delta", "must lie in [0, 1)");
  if (blocklength < 1) fail("blocklength", "must be >= 1");
  if (!(gamma_w > 0.0) || !std::isfinite(gamma_w)) fail("gamma_w", "must be positive");
}

GramMatrix gram(const ChannelMatrix& h) {
  return GramMatrix::from_hermitian(h.entries().adjoint() * h.entries());
}

GramMatrix worst_case_willie(const SystemConfig& cfg) {
  cfg.validate();
  RVector d = RVector::Zero(cfg.n_a);
  d.head(cfg.willie_modes()).setConstant(cfg.gamma_w);
  return GramMatrix::diagonal(d);
}

ChannelMatrix worst_case_willie_channel(const SystemConfig& cfg) {
  cfg.validate();
  CMatrix h = CMatrix::Zero(cfg.n_w, cfg.n_a);
  const double g = std::sqrt(cfg.gamma_w);
  for (int i = 0; i < cfg.willie_modes(); ++i) h(i, i) = g;
  return ChannelMatrix(std::move(h));
}

CVector random_unit_vector(Eigen::Index dim, Rng& rng) {
  if (dim < 1) throw InvalidArgument("random_unit_vector: dim must be >= 1");
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CVector v(dim);
  for (;;) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      v(i) = Complex(re, im);
    }
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

ChannelMatrix make_unit_rank(double lambda, const CVector& left, const CVector& right) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw InvalidArgument("make_unit_rank: lambda must be finite and >= 0");
  if (left.size() < 1 || right.size() < 1)
    throw InvalidArgument("make_unit_rank: empty singular vector");
  if (std::abs(left.norm() - 1.0) > kUnitNormTol || std::abs(right.norm() - 1.0) > kUnitNormTol)
    throw InvalidArgument("make_unit_rank: singular vectors must have unit norm");
  return ChannelMatrix(std::sqrt(lambda) * left * right.adjoint());
}

ChannelMatrix make_unit_rank(const UnitRankChannel& spec) {
  return make_unit_rank(spec.lambda, spec.left, spec.right);
}

}  // namespace covertmimo
