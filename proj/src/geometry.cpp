#include "covertmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "covertmimo/errors.hpp"

namespace covertmimo {
namespace {

constexpr double kUnitTol = 1e-10;

void require_unit(const CVector& v, const char* who) {
  if (v.size() < 1 || std::abs(v.norm() - 1.0) > kUnitTol)
    throw InvalidArgument(std::string(who) + ": vectors must be nonempty with unit norm");
}

void check_lemma_args(int p, double zeta) {
  if (p < 2) throw InvalidArgument("angle bound: p must be >= 2");
  if (!(zeta > 0.0 && zeta < std::numbers::pi / 2)) throw InvalidArgument("angle bound: zeta must lie in (0, pi/2)");
}

// cos(zeta)^(p-2) scaled by sqrt(p); the denominator when solving the bound for K.
double lemma1_tail(int p, double zeta) {
  return std::sqrt(static_cast<double>(p)) * std::pow(std::cos(zeta), p - 2);
}

double k_needed(int p, double zeta, double prob_lower) {
  // 1 - K tail <= prob  <=>  K >= (1 - prob) / tail
  return std::max(1.0 - prob_lower, 0.0) / lemma1_tail(p, zeta);
}

}  // namespace

AngleSample angle_between(const CVector& u, const CVector& v) {
  require_unit(u, "angle_between");
  require_unit(v, "angle_between");
  if (u.size() != v.size()) throw InvalidArgument("angle_between: dimension mismatch");
  const double c = std::min(std::abs(u.dot(v)), 1.0);
  return {std::acos(c), c * c};
}

CVector null_steering(const CVector& u_b, const CVector& u_w) {
  require_unit(u_b, "null_steering");
  require_unit(u_w, "null_steering");
  if (u_b.size() != u_w.size()) throw InvalidArgument("null_steering: dimension mismatch");
  CVector r = u_b - u_w * u_w.dot(u_b);
  // One re-projection removes the rounding left by the first pass.
  r -= u_w * u_w.dot(r);
  const double norm = r.norm();
  if (norm < 1e-10) throw DegenerateGeometry("null_steering: u_b is parallel to u_w");
  return r / norm;
}

double unit_rank_product_eig(double lambda_w, double p_th, double cos2) {
  if (!(lambda_w >= 0.0) || !(p_th >= 0.0) || !(cos2 >= 0.0 && cos2 <= 1.0))
    throw InvalidArgument("unit_rank_product_eig: inputs must be nonnegative, cos2 <= 1");
  return lambda_w * p_th * cos2;
}

double lemma1_bound(int p, double zeta, double k) {
  check_lemma_args(p, zeta);
  return std::min(1.0 - k * lemma1_tail(p, zeta), 1.0);
}

double lemma1_exact(int p, double zeta) {
  check_lemma_args(p, zeta);
  const double c = std::cos(zeta);
  return -std::expm1(2.0 * (p - 1) * std::log(c));
}

AngleProbability lemma1_monte_carlo(int p, double zeta, std::int64_t samples, std::uint64_t seed,
                                    double confidence) {
  check_lemma_args(p, zeta);
  if (samples < 1000) throw InvalidArgument("lemma1_monte_carlo: needs at least 1000 samples");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw InvalidArgument("lemma1_monte_carlo: confidence must lie in (0, 1)");
  const double threshold = std::pow(std::sin(zeta), 2);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    const CVector u = random_unit_vector(p, rng);
    const CVector v = random_unit_vector(p, rng);
    if (std::norm(u.dot(v)) <= threshold) ++hits;
  }

  AngleProbability out;
  out.samples = samples;
  out.exact = lemma1_exact(p, zeta);
  const double n = static_cast<double>(samples);
  const double ph = hits / n;
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * confidence);
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  out.estimate = ph;
  out.ci_low = std::max(centre - half, 0.0);
  out.ci_high = std::min(centre + half, 1.0);
  return out;
}

double calibrate_k(const std::vector<GridPoint>& grid) {
  if (grid.empty()) throw InvalidArgument("calibrate_k: grid must be nonempty");
  double k = 0.0;
  for (const auto& g : grid) k = std::max(k, k_needed(g.p, g.zeta, lemma1_exact(g.p, g.zeta)));
  return k;
}

double calibrate_k(const std::vector<GridPoint>& grid, std::int64_t samples, std::uint64_t seed) {
  if (grid.empty()) throw InvalidArgument("calibrate_k: grid must be nonempty");
  double k = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const AngleProbability mc = lemma1_monte_carlo(grid[i].p, grid[i].zeta, samples, stream_seed(seed, i));
    k = std::max(k, k_needed(grid[i].p, grid[i].zeta, mc.ci_low));
  }
  return k;
}

}  // namespace covertmimo
