#pragma once

#include "covertmimo/channel.hpp"

namespace covertmimo {

/// Relative entropy D(P0 || P1) at Willie for one channel use, in nats.
///   total         = capacity_term + penalty_term
///   capacity_term = log|I + H Q H^H / sigma_w^2|           (>= 0)
///   penalty_term  = tr[(I + H Q H^H / sigma_w^2)^-1] - N_w  (<= 0)
/// Multiply by n for a block of n i.i.d. uses.
struct DivergenceBreakdown {
  double total = 0.0;
  double capacity_term = 0.0;
  double penalty_term = 0.0;
};

/// Per-mode divergence ln(1+x) + 1/(1+x) - 1 at normalized receive power x.
/// Series expansion near zero keeps full relative accuracy for tiny x.
double mode_divergence(double x);
/// Derivative of mode_divergence: x / (1+x)^2.
double mode_divergence_slope(double x);

/// Divergence from the eigenvalues of W Q (Hermitian form Q^1/2 W Q^1/2).
DivergenceBreakdown kl_gram(const GramMatrix& w, const CMatrix& q, double sigma_w2);

/// Divergence for Willie channel h_w and input covariance q.
/// Throws InvalidArgument for non-PSD q, mismatched shapes or sigma_w2 <= 0.
DivergenceBreakdown kl_willie(const ChannelMatrix& h_w, const CMatrix& q, double sigma_w2);

/// Closed form against the isotropic worst case gamma_w * I_hat: the
/// M = min(len, n_w) largest allocations are observed.
DivergenceBreakdown kl_isotropic(const RVector& alloc, double gamma_w, double sigma_w2, int n_w);

/// sqrt(d / 2), the total-variation ceiling implied by divergence d (nats
/// over the whole block).
double pinsker_bound(double d_total);

/// 1 - tv: the smallest alpha + beta any detector can reach.
double sum_error_floor(double tv);

struct MonotoneWitness {
  bool holds = false;
  double d_larger = 0.0;   // divergence under w1
  double d_smaller = 0.0;  // divergence under w2
};

/// Checks D(w1) >= D(w2) - 1e-10 given w1 - w2 PSD.
MonotoneWitness kl_monotone_check(const GramMatrix& w1, const GramMatrix& w2, const CMatrix& q,
                                  double sigma_w2);

}  // namespace covertmimo
