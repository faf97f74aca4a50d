#pragma once

#include <cstdint>
#include <string>

#include "covertmimo/channel.hpp"
#include "covertmimo/optimizer.hpp"

namespace covertmimo {

struct DetectionEstimate {
  double alpha = 0.0;  // false alarm at the minimizing threshold
  double beta = 0.0;   // missed detection at the minimizing threshold
  double min_sum = 1.0;
  double tv_estimate = 0.0;  // 1 - min_sum
  std::int64_t trials = 0;   // blocks per hypothesis
  double ci_halfwidth = 0.0;  // 1.96 sqrt(a(1-a)/T + b(1-b)/T)
  double threshold = 0.0;
  double mean_llr_h0 = 0.0;  // per block; about -n D(P0 || P1)
  double mean_llr_h1 = 0.0;  // per block; about +n D(P1 || P0)
  double var_llr_h0 = 0.0;
};

enum class Sampler {
  // Whitened eigenbasis: per block the LLR depends on n-use energies that are
  // Gamma(n, 1) under H0 and s_i Gamma(n, 1) under H1. Exact for every n.
  sufficient_statistic,
  // Cholesky draws of every observation vector; cost grows with n.
  direct,
};

/// Willie's n-use likelihood-ratio test between CN(0, sigma0) and CN(0, sigma1).
/// Block i under H0 uses make_stream(seed, 2i), under H1 make_stream(seed, 2i+1).
/// Throws NumericalError if a covariance is not positive definite.
DetectionEstimate simulate_lrt(const CMatrix& sigma0, const CMatrix& sigma1, std::int64_t n_uses,
                               std::int64_t trials, std::uint64_t seed,
                               Sampler sampler = Sampler::sufficient_statistic);

struct CovertnessReport {
  DetectionEstimate estimate;
  double n_divergence = 0.0;  // n D(P0 || P1) at the simulated Willie
  double pinsker = 0.0;       // sqrt(n D / 2)
  double floor = 0.0;         // 1 - delta
  bool sum_ok = false;        // min_sum >= 1 - delta - 3 ci
  bool pinsker_ok = false;    // tv <= pinsker + 3 ci
  bool passed = false;
  std::string note;
};

/// Simulates Willie against the worst-case channel (or h_w) for the full
/// blocklength. Throws InvalidArgument if sol exceeds the covertness budget.
CovertnessReport verify_covertness(const SystemConfig& cfg, const CovarianceSolution& sol, std::int64_t trials,
                                   std::uint64_t seed);
CovertnessReport verify_covertness(const SystemConfig& cfg, const CovarianceSolution& sol,
                                   const ChannelMatrix& h_w, std::int64_t trials, std::uint64_t seed);

}  // namespace covertmimo
