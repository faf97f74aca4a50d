#include "covertmimo/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "covertmimo/errors.hpp"

namespace covertmimo {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// 1 + seen (x - ln(1+x)) / m, the log-det slack of `seen` modes at normalized power x.
double xi_from(double x, int seen, int m) {
  const double xi = 1.0 + seen * (x - std::log1p(x)) / m;
  return std::isfinite(xi) ? std::max(xi, 1.0) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> bob_gains(const SystemConfig& cfg, const RVector& eigs_b) {
  const int n_modes = std::min<int>(cfg.bob_modes(), static_cast<int>(eigs_b.size()));
  std::vector<double> out;
  for (int i = 0; i < n_modes; ++i) {
    if (!(eigs_b(i) >= 0.0) || !std::isfinite(eigs_b(i)))
      throw InvalidArgument("bounds: eigenvalues of W_b must be finite and >= 0");
    out.push_back(eigs_b(i));
  }
  return out;
}

BoundsReport sum_bounds(const std::vector<double>& args, double xi, Regime regime) {
  BoundsReport r;
  r.regime = regime;
  r.xi = xi;
  for (double a : args) {
    r.lower += std::log1p(a);
    r.upper += std::log1p(xi * a);
    r.lower_argument += a;
  }
  return r;
}

double power_of_complement(double g, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::exp(exponent * std::log1p(-g));
}

void check_massive(const SystemConfig& cfg, double lambda_w, int n_a, double k) {
  cfg.validate();
  if (n_a < 2) throw InvalidArgument("massive-MIMO law: n_a must be >= 2");
  if (!(lambda_w > 0.0) || !std::isfinite(lambda_w)) throw InvalidArgument("massive-MIMO law: lambda_w must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("massive-MIMO law: k must be >= 0");
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::secret: return "secret";
    case Regime::no_secret: return "no-secret";
    case Regime::rank1_secret: return "rank1-secret";
    case Regime::rank1_no_secret: return "rank1-no-secret";
  }
  return "unknown";
}

double secret_xi(const SystemConfig& cfg) {
  cfg.validate();
  const int m = cfg.willie_modes();
  const double x = kSqrt2 * cfg.delta / std::sqrt(cfg.n() * m);
  const double xi = xi_from(x, std::min(cfg.bob_modes(), m), m);
  return std::isnan(xi) ? 1.0 + cfg.delta : xi;
}

double nosecret_xi(const SystemConfig& cfg) {
  cfg.validate();
  const double nm = cfg.n() * cfg.willie_modes();
  const double d2 = 2.0 * cfg.delta * cfg.delta;
  if (!(nm > d2)) throw InvalidRegime("no-secret bounds need n M > 2 delta^2");
  return nm / (nm - d2);
}

BoundsReport srl_bounds_secret(const SystemConfig& cfg, const RVector& eigs_b) {
  const double xi = secret_xi(cfg);
  const double scale = kSqrt2 * cfg.sigma_w2 * cfg.delta /
                       (cfg.sigma_b2 * cfg.gamma_w * std::sqrt(cfg.n() * cfg.willie_modes()));
  std::vector<double> args = bob_gains(cfg, eigs_b);
  for (double& a : args) a *= scale;
  return sum_bounds(args, xi, Regime::secret);
}

BoundsReport srl_bounds_nosecret(const SystemConfig& cfg, const RVector& eigs_b) {
  const double xi = nosecret_xi(cfg);
  const double scale = 2.0 * cfg.sigma_w2 * cfg.delta * cfg.delta /
                       (cfg.sigma_b2 * cfg.gamma_w * cfg.n() * cfg.willie_modes());
  std::vector<double> args = bob_gains(cfg, eigs_b);
  for (double& a : args) a *= scale;
  return sum_bounds(args, xi, Regime::no_secret);
}

BoundsReport rank1_bounds(const SystemConfig& cfg, double lambda_b, double lambda_w, double cos2_theta,
                          bool secret) {
  cfg.validate();
  if (!(cos2_theta >= 0.0 && cos2_theta <= 1.0)) throw InvalidArgument("rank1_bounds: cos2_theta must lie in [0, 1]");
  if (!(lambda_b >= 0.0) || !(lambda_w > 0.0)) throw InvalidArgument("rank1_bounds: need lambda_b >= 0, lambda_w > 0");

  BoundsReport r;
  r.regime = secret ? Regime::rank1_secret : Regime::rank1_no_secret;
  const double cap = std::log1p(cfg.power * lambda_b / cfg.sigma_b2);
  if (secret) {
    r.xi = xi_from(kSqrt2 * cfg.delta / std::sqrt(cfg.n()), 1, 1);
    if (std::isnan(r.xi)) r.xi = 1.0 + cfg.delta;
  } else {
    const double d2 = 2.0 * cfg.delta * cfg.delta;
    if (!(cfg.n() > d2)) throw InvalidRegime("rank1_bounds: no-secret bounds need n > 2 delta^2");
    r.xi = cfg.n() / (cfg.n() - d2);
  }
  if (cos2_theta == 0.0) {
    // Willie sees no power at all: the covertness budget never binds.
    r.lower = r.upper = cap;
    r.infinite_l = true;
    r.lower_argument = std::numeric_limits<double>::infinity();
    return r;
  }
  const double num = secret ? kSqrt2 * cfg.sigma_w2 * cfg.delta * lambda_b / std::sqrt(cfg.n())
                            : 2.0 * cfg.sigma_w2 * cfg.delta * cfg.delta * lambda_b / cfg.n();
  r.lower_argument = num / (cfg.sigma_b2 * lambda_w * cos2_theta);
  r.lower = std::min(std::log1p(r.lower_argument), cap);
  r.upper = std::min(std::log1p(r.xi * r.lower_argument), cap);
  return r;
}

BoundsReport unit_rank_willie_bounds(const SystemConfig& cfg, double lambda_b, double lambda_w,
                                     bool bob_well_conditioned) {
  cfg.validate();
  if (!bob_well_conditioned) throw InvalidRegime("unit_rank_willie_bounds: requires a well-conditioned Bob channel");
  if (!(lambda_b >= 0.0) || !(lambda_w > 0.0)) throw InvalidArgument("unit_rank_willie_bounds: need lambda_b >= 0, lambda_w > 0");
  double xi = xi_from(kSqrt2 * cfg.delta / std::sqrt(cfg.n()), 1, 1);
  if (std::isnan(xi)) xi = 1.0 + cfg.delta;
  const double arg = kSqrt2 * cfg.sigma_w2 * cfg.delta * lambda_b / (cfg.sigma_b2 * lambda_w * std::sqrt(cfg.n()));
  return sum_bounds(std::vector<double>(cfg.bob_modes(), arg), xi, Regime::secret);
}

std::vector<double> decade_ladder(int lo_exp, int hi_exp) {
  if (hi_exp < lo_exp) throw InvalidArgument("decade_ladder: empty range");
  std::vector<double> out;
  for (int e = lo_exp; e <= hi_exp; ++e) out.push_back(std::pow(10.0, e));
  return out;
}

namespace {

ScalingEstimate estimate(const SystemConfig& cfg, const RateFunction& rate_fn, const std::vector<double>& ladder,
                         bool sqrt_law) {
  cfg.validate();
  if (ladder.empty()) throw InvalidArgument("estimator: ladder must be nonempty");
  if (!std::is_sorted(ladder.begin(), ladder.end()) ||
      std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end())
    throw InvalidArgument("estimator: ladder must be strictly increasing");

  ScalingEstimate est;
  est.ladder = ladder;
  const double d = std::sqrt(2.0) * cfg.delta;
  for (double n : ladder) {
    if (!(n >= 1.0)) throw InvalidArgument("estimator: blocklengths must be >= 1");
    if (d == 0.0) {
      est.sequence.push_back(0.0);
      continue;
    }
    SystemConfig c = cfg;
    c.blocklength = std::llround(n);
    const double rate = rate_fn(c);
    est.sequence.push_back(sqrt_law ? std::sqrt(c.n()) / d * rate : c.n() / d * rate);
  }
  est.value = est.sequence.back();
  if (est.sequence.size() >= 2) {
    const double a = est.sequence[est.sequence.size() - 2], b = est.sequence.back();
    const double scale = std::max(std::abs(a), std::abs(b));
    est.converged = scale == 0.0 || std::abs(a - b) < 1e-3 * scale;
  }
  return est;
}

double gain_sum(const SystemConfig& cfg, const RVector& eigs_b) {
  double s = 0.0;
  for (double l : bob_gains(cfg, eigs_b)) s += l;
  return s;
}

}  // namespace

ScalingEstimate l_estimator(const SystemConfig& cfg, const RateFunction& rate_fn, const std::vector<double>& ladder) {
  return estimate(cfg, rate_fn, ladder, true);
}

ScalingEstimate lhat_estimator(const SystemConfig& cfg, const RateFunction& rate_fn,
                               const std::vector<double>& ladder) {
  return estimate(cfg, rate_fn, ladder, false);
}

Bracket l_bracket(const SystemConfig& cfg, const RVector& eigs_b) {
  const double base = cfg.sigma_w2 * gain_sum(cfg, eigs_b) /
                      (cfg.sigma_b2 * cfg.gamma_w * std::sqrt(static_cast<double>(cfg.willie_modes())));
  return {base, secret_xi(cfg) * base};
}

Bracket lhat_bracket(const SystemConfig& cfg, const RVector& eigs_b) {
  const double base = kSqrt2 * cfg.sigma_w2 * cfg.delta * gain_sum(cfg, eigs_b) /
                      (cfg.sigma_b2 * cfg.gamma_w * cfg.willie_modes());
  return {base, nosecret_xi(cfg) * base};
}

FullRateProbability full_rate_probability(Mode mode, const SystemConfig& cfg, double lambda_w, int n_a, double k) {
  check_massive(cfg, lambda_w, n_a, k);
  const double c = kSqrt2 * cfg.sigma_w2 * cfg.delta / (lambda_w * cfg.power);
  FullRateProbability out;
  out.g = mode == Mode::secret ? c / std::sqrt(cfg.n()) : c / cfg.n();
  if (out.g > 1.0) {
    out.g = 1.0;
    out.saturated = true;
  }
  out.exact = std::clamp(-std::expm1((n_a - 1) * std::log1p(-out.g)), 0.0, 1.0);
  out.raw_bound = 1.0 - k * std::sqrt(static_cast<double>(n_a)) * power_of_complement(out.g, 0.5 * (n_a - 2));
  out.bound = std::clamp(out.raw_bound, 0.0, 1.0);
  return out;
}

double kn_growth(Mode mode, const SystemConfig& cfg, double lambda_w, int n_a, double k) {
  check_massive(cfg, lambda_w, n_a, k);
  if (k == 0.0) return std::numeric_limits<double>::infinity();
  const double c = kSqrt2 * cfg.sigma_w2 * cfg.delta / (lambda_w * cfg.power);
  const double step = mode == Mode::secret ? c / std::sqrt(cfg.n()) : c / cfg.n();
  const double lead = mode == Mode::secret ? cfg.n() : 1.0;
  const double log_value = 0.5 * std::log(lead / (k * k * n_a)) + 0.5 * (n_a - 2) * std::log1p(step);
  return std::exp(log_value);
}

double expected_rank1_rate(Mode mode, const SystemConfig& cfg, double lambda_b, double lambda_w, int n_a) {
  check_massive(cfg, lambda_w, n_a, 1.0);
  if (!(lambda_b > 0.0)) throw InvalidArgument("expected_rank1_rate: lambda_b must be positive");
  const double snr = cfg.power * lambda_b / cfg.sigma_b2;
  const double cap = std::log1p(snr);
  const double arg = rank1_bounds(cfg, lambda_b, lambda_w, 1.0, mode == Mode::secret).lower_argument;
  if (arg == 0.0) return 0.0;

  // Below u* = arg / snr the rate is clamped at C.
  const double u_star = arg / snr;
  if (u_star >= 1.0) return cap;
  const double m = n_a - 1.0;
  const double s_star = -std::expm1(m * std::log1p(-u_star));

  // Integrate the density m (1 - u)^(m - 1) in x = log u; smooth on [log u*, 0].
  auto integrand = [&](double x) {
    const double u = std::exp(x);
    const double weight = m * u * std::exp((m - 1.0) * std::log1p(-std::min(u, 1.0 - 1e-16)));
    return std::log1p(arg / u) * weight;
  };
  using boost::math::quadrature::gauss_kronrod;
  double total = cap * s_star;
  const double x0 = std::log(u_star);
  constexpr int kPieces = 8;
  for (int i = 0; i < kPieces; ++i) {
    const double a = x0 * (1.0 - static_cast<double>(i) / kPieces);
    const double b = x0 * (1.0 - static_cast<double>(i + 1) / kPieces);
    total += gauss_kronrod<double, 31>::integrate(integrand, a, b, 10, 1e-12);
  }
  return std::min(total, cap);
}

}  // namespace covertmimo
