#pragma once

#include <functional>
#include <string>
#include <vector>

#include "covertmimo/channel.hpp"
#include "covertmimo/optimizer.hpp"

namespace covertmimo {

enum class Regime { secret, no_secret, rank1_secret, rank1_no_secret };

std::string to_string(Regime r);

/// Bounds on the covert capacity in nats per channel use.
struct BoundsReport {
  double lower = 0.0;
  double upper = 0.0;
  double xi = 1.0;
  Regime regime = Regime::secret;
  bool infinite_l = false;       // rank-1 with orthogonal directions: full rate, L unbounded
  double lower_argument = 0.0;   // SNR-like argument inside the lower log (rank-1: before clamping)
};

/// Converse slack for the secret regime: the smallest xi >= 1 with
///   log|I + gamma_w Q / sigma_w2| - M >= tr(gamma_w Q / sigma_w2) - xi M
/// at Q = equal split of the lower-bound power over the N Bob modes.
double secret_xi(const SystemConfig& cfg);

/// nM / (nM - 2 delta^2). Throws InvalidRegime when nM <= 2 delta^2.
double nosecret_xi(const SystemConfig& cfg);

/// eigs_b are the eigenvalues of W_b in nonincreasing order; the N = min(N_a, N_b)
/// largest are used.
BoundsReport srl_bounds_secret(const SystemConfig& cfg, const RVector& eigs_b);
BoundsReport srl_bounds_nosecret(const SystemConfig& cfg, const RVector& eigs_b);

/// Unit-rank Bob and Willie at principal angle theta, clamped by the
/// unconstrained capacity C = log(1 + P lambda_b / sigma_b2).
BoundsReport rank1_bounds(const SystemConfig& cfg, double lambda_b, double lambda_w, double cos2_theta,
                          bool secret);

/// N equal Bob modes against a unit-rank Willie aligned with them.
/// Throws InvalidRegime unless bob_well_conditioned.
BoundsReport unit_rank_willie_bounds(const SystemConfig& cfg, double lambda_b, double lambda_w,
                                     bool bob_well_conditioned = true);

struct ScalingEstimate {
  double value = 0.0;
  std::vector<double> ladder;    // blocklengths
  std::vector<double> sequence;  // normalized estimate at each blocklength
  bool converged = false;        // last two entries within 1e-3 relative
};

using RateFunction = std::function<double(const SystemConfig&)>;

/// Geometric blocklength ladder 10^lo_exp .. 10^hi_exp.
std::vector<double> decade_ladder(int lo_exp, int hi_exp);

/// sqrt(n / 2 delta^2) * C(n) over the ladder.
ScalingEstimate l_estimator(const SystemConfig& cfg, const RateFunction& rate_fn,
                            const std::vector<double>& ladder = decade_ladder(4, 10));
/// n / sqrt(2 delta^2) * C(n) over the ladder.
ScalingEstimate lhat_estimator(const SystemConfig& cfg, const RateFunction& rate_fn,
                               const std::vector<double>& ladder = decade_ladder(4, 10));

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v, double rel_tol = 0.0) const {
    return v >= lower * (1.0 - rel_tol) && v <= upper * (1.0 + rel_tol);
  }
};

/// [sum sigma_w2 lambda_i / (sigma_b2 gamma_w sqrt M), xi * same], xi at cfg's blocklength.
Bracket l_bracket(const SystemConfig& cfg, const RVector& eigs_b);
/// [sum sqrt2 sigma_w2 delta lambda_i / (sigma_b2 gamma_w M), xi * same].
Bracket lhat_bracket(const SystemConfig& cfg, const RVector& eigs_b);

struct FullRateProbability {
  double g = 0.0;      // cos^2 threshold below which the full rate is reached
  double bound = 0.0;  // 1 - K sqrt(N_a) (1 - g)^((N_a - 2)/2), clamped to [0, 1]
  double raw_bound = 0.0;  // same before clamping; negative means vacuous
  double exact = 0.0;  // 1 - (1 - g)^(N_a - 1): cos^2 ~ Beta(1, N_a - 1)
  bool saturated = false;  // g > 1 was clamped to 1
};

/// Probability that a uniformly random unit-rank Willie leaves Alice at full
/// rate. Secret: g = sqrt2 sigma_w2 delta / (sqrt(n) lambda_w P); no secret:
/// the same constant over n instead of sqrt(n).
FullRateProbability full_rate_probability(Mode mode, const SystemConfig& cfg, double lambda_w, int n_a,
                                          double k = 1.0);

/// Growth law of the codebook size in the massive-antenna limit.
/// Secret: sqrt(n / (K^2 N_a)) (1 + c/sqrt(n))^((N_a-2)/2); no secret:
/// sqrt(1 / (K^2 N_a)) (1 + c/n)^((N_a-2)/2), c = sqrt2 sigma_w2 delta / (lambda_w P).
double kn_growth(Mode mode, const SystemConfig& cfg, double lambda_w, int n_a, double k = 1.0);

/// E[min(log(1 + arg / cos^2 theta), C)] with cos^2 theta ~ Beta(1, N_a - 1),
/// arg the rank-1 lower-bound argument at cos^2 = 1. Nats per channel use.
double expected_rank1_rate(Mode mode, const SystemConfig& cfg, double lambda_b, double lambda_w, int n_a);

}  // namespace covertmimo
