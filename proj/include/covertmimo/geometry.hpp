#pragma once

#include <cstdint>
#include <vector>

#include "covertmimo/channel.hpp"

namespace covertmimo {

/// Principal angle between two complex unit vectors, via |<u, v>|.
struct AngleSample {
  double theta = 0.0;  // [0, pi/2]
  double cos2 = 1.0;   // |<u, v>|^2
};

AngleSample angle_between(const CVector& u, const CVector& v);

/// [I - u_w u_w^H] u_b, normalized: the direction orthogonal to Willie with the
/// largest gain toward Bob. Throws DegenerateGeometry when the projection
/// norm is below 1e-10.
CVector null_steering(const CVector& u_b, const CVector& u_w);

/// lambda_w * p_th * cos^2: the one nonzero eigenvalue of W_w Q for unit-rank
/// W_w = lambda_w u_w u_w^H and Q = p_th u_b u_b^H.
double unit_rank_product_eig(double lambda_w, double p_th, double cos2);

/// 1 - k sqrt(p) cos(zeta)^(p-2). May be negative (vacuous).
double lemma1_bound(int p, double zeta, double k = 1.0);

/// Pr(|theta - pi/2| <= zeta) = Pr(cos^2 <= sin^2 zeta) = 1 - cos(zeta)^(2(p-1)).
double lemma1_exact(int p, double zeta);

struct AngleProbability {
  double estimate = 0.0;
  double ci_low = 0.0;  // Wilson interval at the requested confidence
  double ci_high = 0.0;
  double exact = 0.0;
  std::int64_t samples = 0;
};

/// Fraction of uniformly random pairs in C^p with |theta - pi/2| <= zeta.
/// Sample i draws from make_stream(seed, i), so results do not depend on threading.
/// confidence is two-sided, in (0, 1).
AngleProbability lemma1_monte_carlo(int p, double zeta, std::int64_t samples, std::uint64_t seed,
                                    double confidence = 0.95);

struct GridPoint {
  int p = 2;
  double zeta = 0.0;
};

/// Smallest K making 1 - K sqrt(p) cos(zeta)^(p-2) <= exact probability on every point.
double calibrate_k(const std::vector<GridPoint>& grid);

/// Same, against the lower edge of each point's Monte Carlo Wilson interval.
double calibrate_k(const std::vector<GridPoint>& grid, std::int64_t samples, std::uint64_t seed);

}  // namespace covertmimo
