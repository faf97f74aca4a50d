#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "covertmimo/random.hpp"

namespace covertmimo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Complex channel gains; rows are receive antennas, columns are Alice's
/// transmit antennas. Real channels are stored with zero imaginary parts.
class ChannelMatrix {
 public:
  explicit ChannelMatrix(CMatrix entries);
  static ChannelMatrix from_real(const Eigen::MatrixXd& entries);

  Eigen::Index rows() const noexcept { return entries_.rows(); }
  Eigen::Index cols() const noexcept { return entries_.cols(); }
  const CMatrix& entries() const noexcept { return entries_; }

 private:
  CMatrix entries_;
};

/// Hermitian PSD matrix with a cached eigendecomposition.
///
/// Eigenvalues are nonincreasing. Each eigenvector is phase-normalized so its
/// largest-modulus component is real and positive; eigenvectors belonging to
/// (numerically) tied eigenvalues are ordered lexicographically so that
/// repeated factorizations of the same matrix give the same basis.
class GramMatrix {
 public:
  /// Symmetrizes (A + A^H)/2 and factors. Throws InvalidArgument for
  /// non-square/non-finite input or eigenvalues below -1e-12 * ||A||,
  /// NumericalError if the eigensolver fails.
  static GramMatrix from_hermitian(const CMatrix& a);
  static GramMatrix diagonal(const RVector& values);

  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const CMatrix& matrix() const noexcept { return matrix_; }
  const RVector& eigenvalues() const noexcept { return eigenvalues_; }
  const CMatrix& eigenvectors() const noexcept { return eigenvectors_; }
  double spectral_norm() const noexcept { return eigenvalues_.size() ? eigenvalues_(0) : 0.0; }
  CMatrix reconstruct() const;

 private:
  GramMatrix(CMatrix m, RVector values, CMatrix vectors)
      : matrix_(std::move(m)), eigenvalues_(std::move(values)), eigenvectors_(std::move(vectors)) {}

  CMatrix matrix_;
  RVector eigenvalues_;
  CMatrix eigenvectors_;
};

/// The adversary class {W_w : ||W_w||_op <= gamma_w} with M = min(N_a, N_w)
/// active modes.
struct CompoundWillieSet {
  CompoundWillieSet(double gamma_w, int m_active);

  bool contains(const GramMatrix& w, double rel_tol = 1e-12) const;

  double gamma_w;
  int m_active;
};

struct UnitRankChannel {
  double lambda = 0.0;
  CVector left;
  CVector right;
};

struct SystemConfig {
  int n_a = 1;
  int n_b = 1;
  int n_w = 1;
  double sigma_b2 = 1.0;
  double sigma_w2 = 1.0;
  double power = 1.0;
  double delta = 0.1;
  std::int64_t blocklength = 1;
  double gamma_w = 1.0;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;

  int bob_modes() const noexcept { return n_a < n_b ? n_a : n_b; }     // N
  int willie_modes() const noexcept { return n_a < n_w ? n_a : n_w; }  // M
  double n() const noexcept { return static_cast<double>(blocklength); }
  /// Per-use divergence budget 2 delta^2 / n.
  double lpd_budget() const noexcept { return 2.0 * delta * delta / n(); }
};

GramMatrix gram(const ChannelMatrix& h);

/// gamma_w * I_hat: gamma_w on the first M diagonal entries, zero elsewhere.
GramMatrix worst_case_willie(const SystemConfig& cfg);

/// A channel whose Gram matrix is worst_case_willie(cfg), i.e.
/// sqrt(gamma_w) on the first M diagonal entries of an N_w x N_a matrix.
ChannelMatrix worst_case_willie_channel(const SystemConfig& cfg);

/// Uniform on the complex unit sphere in C^dim (normalized standard
/// complex Gaussian).
CVector random_unit_vector(Eigen::Index dim, Rng& rng);

/// sqrt(lambda) * left * right^H.
ChannelMatrix make_unit_rank(double lambda, const CVector& left, const CVector& right);
ChannelMatrix make_unit_rank(const UnitRankChannel& spec);

}  // namespace covertmimo
