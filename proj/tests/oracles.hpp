#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's numerics: dense matrix formulas, brute-force grids and plain
// quadrature only.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// D(CN(0, s0) || CN(0, s1)) = log det s1 - log det s0 + tr(s1^{-1} s0) - d.
inline double gaussian_kl(const CMat& s0, const CMat& s1) {
  Eigen::PartialPivLU<CMat> lu0(s0), lu1(s1);
  const double logdet0 = std::log(std::abs(lu0.determinant()));
  const double logdet1 = std::log(std::abs(lu1.determinant()));
  const double trace = lu1.solve(s0).trace().real();
  return logdet1 - logdet0 + trace - static_cast<double>(s0.rows());
}

// Willie's divergence for transmit covariance q through h.
inline double willie_kl(const CMat& h, const CMat& q, double sigma2) {
  const CMat s0 = sigma2 * CMat::Identity(h.rows(), h.rows());
  return gaussian_kl(s0, s0 + h * q * h.adjoint());
}

// Classical Gram-Schmidt step: unit vector along b orthogonal to w.
inline CVec gram_schmidt(const CVec& b, const CVec& w) {
  const CVec wn = w / w.norm();
  CVec r = b - wn * wn.dot(b);
  return r / r.norm();
}

// Total variation between the exponential laws of |y|^2 for CN(0,1) and
// CN(0,s), by trapezoidal quadrature on [0, r_max].
inline double tv_scalar_complex_gaussian(double s, int points = 2000000, double r_max = 200.0) {
  const double h = r_max / points;
  double acc = 0.0;
  for (int i = 0; i <= points; ++i) {
    const double r = i * h;
    const double f = std::abs(std::exp(-r) - std::exp(-r / s) / s);
    acc += (i == 0 || i == points) ? 0.5 * f : f;
  }
  return 0.5 * acc * h;
}

// Two-mode covert rate problem with diagonal Bob gains a_i = lambda_i / sigma_b2
// and an isotropic Willie of gain c = gamma_w / sigma_w2 that sees the m_w
// largest allocations. The constraint is the full divergence (secret) or the
// capacity term only (no secret), compared against budget = 2 delta^2 / n.
struct TwoModeProblem {
  std::vector<double> a;  // 1 or 2 entries
  double c = 1.0;
  int m_w = 2;
  double power = 1.0;
  double budget = 0.0;
  bool secret = true;

  double rate(const std::vector<double>& v) const {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r += std::log1p(a[i] * v[i]);
    return r;
  }
  double per_mode(double v) const {
    const double x = c * v;
    return secret ? std::log1p(x) - x / (1.0 + x) : std::log1p(x);
  }
  double constraint(std::vector<double> v) const {
    std::sort(v.begin(), v.end(), std::greater<>());
    double d = 0.0;
    for (int i = 0; i < std::min<int>(m_w, static_cast<int>(v.size())); ++i) d += per_mode(v[i]);
    return d;
  }
  bool feasible(const std::vector<double>& v) const {
    double total = 0.0;
    for (double x : v) total += x;
    return total <= power * (1 + 1e-15) && constraint(v) <= budget * (1 + 1e-15);
  }
  // Largest single-mode allocation meeting the constraint, by bisection on the penalty.
  double box_edge() const {
    double lo = 0.0, hi = power;
    if (per_mode(hi) <= budget) return hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (per_mode(mid) <= budget ? lo : hi) = mid;
    }
    return lo;
  }
};

struct GridOptimum {
  double rate = 0.0;
  std::vector<double> alloc;
};

// Exhaustive search over `points` grid values of v_1 in the feasible box; for
// two modes, v_2 is pushed to the largest feasible value by bisection (the
// rate is increasing in v_2), so every grid point is a boundary candidate.
inline GridOptimum grid_search(const TwoModeProblem& p, int points = 1000000) {
  const double edge = p.box_edge();
  GridOptimum best{-1.0, {}};
  for (int i = 0; i <= points; ++i) {
    const double v1 = edge * i / points;
    std::vector<double> v{v1};
    if (p.a.size() == 2) {
      double lo = 0.0, hi = std::min(edge, p.power - v1);
      if (hi < 0.0) continue;
      if (!p.feasible({v1, lo})) continue;
      if (p.feasible({v1, hi})) {
        lo = hi;
      } else {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          (p.feasible({v1, mid}) ? lo : hi) = mid;
        }
      }
      v.push_back(lo);
    } else if (!p.feasible(v)) {
      continue;
    }
    const double r = p.rate(v);
    if (r > best.rate) best = {r, v};
  }
  return best;
}

// Regularized incomplete beta I_x(1, m) = 1 - (1 - x)^m, the law of |<u, v>|^2
// for independent uniform unit vectors in C^(m+1).
inline double beta1_cdf(double x, int m) { return 1.0 - std::pow(1.0 - x, m); }

}  // namespace oracle
