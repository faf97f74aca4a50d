#include "covertmimo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "covertmimo/detection.hpp"
#include "covertmimo/divergence.hpp"
#include "covertmimo/errors.hpp"
#include "covertmimo/geometry.hpp"
#include "covertmimo/scaling.hpp"

namespace covertmimo {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Config parsing

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(where + (where.empty() ? "" : ".") + it.key() + ": unknown field");
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path + ": must be finite");
  return d;
}

std::int64_t as_integer(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  const double d = as_number(v, path);
  if (d != std::floor(d) || std::abs(d) > 9.0e18) throw ConfigError(path + ": expected an integer");
  return static_cast<std::int64_t>(d);
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Mode parse_mode(const std::string& s) {
  if (s == "secret") return Mode::secret;
  if (s == "no-secret") return Mode::no_secret;
  throw ConfigError("mode: expected \"secret\" or \"no-secret\", got \"" + s + "\"");
}

Units parse_units(const std::string& s) {
  if (s == "nats") return Units::nats;
  if (s == "bits") return Units::bits;
  throw ConfigError("units: expected \"nats\" or \"bits\", got \"" + s + "\"");
}

bool is_antenna_scenario(const std::string& s) { return s == "sweep-antennas" || s == "massive-limit"; }

// ---------------------------------------------------------------------------
// Output helpers

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

// Runs f(i) for i in [0, count) on a small worker pool; results keep index order.
template <class F>
auto parallel_map(std::size_t count, F f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min<std::size_t>(hw, count);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// ---------------------------------------------------------------------------
// Rate rows (capacity, sweep-n, sweep-antennas)

struct RateRow {
  std::vector<Cell> cells;
  bool failed = false;
  bool in_bounds = true;
};

std::vector<Column> rate_columns(const std::string& key) {
  return {{key, false},
          {"rate_exact", true},
          {"rate_achievable", true},
          {"lower", true},
          {"upper", true},
          {"p_th_exact", false},
          {"p_th_achievable", false},
          {"divergence", true},
          {"constraint_value", true},
          {"l_estimate", false},
          {"kkt_residual", false},
          {"in_bounds", false},
          {"status", false}};
}

RateRow rate_row(Mode mode, const SystemConfig& sys, const RVector& eigs, Cell key) {
  RateRow row;
  RVector padded = RVector::Zero(sys.n_a);
  padded.head(eigs.size()) = eigs;
  const GramMatrix w_b = GramMatrix::diagonal(padded);
  std::string status = "ok";
  double exact = kNaN, ach = kNaN, lower = kNaN, upper = kNaN, p_exact = kNaN, p_ach = kNaN, div = kNaN,
         cv = kNaN, l_est = kNaN, kkt = kNaN;
  try {
    const CovarianceSolution sol = solve(mode, sys, w_b);
    const CovarianceSolution a = achievable_scheme(mode, sys, w_b);
    exact = sol.rate;
    ach = a.rate;
    p_exact = sol.p_th;
    p_ach = a.p_th;
    div = sol.divergence;
    cv = sol.constraint_value;
    kkt = kkt_residual(sol, sys, w_b).max();
    const double d = std::sqrt(2.0) * sys.delta;
    l_est = d == 0.0 ? 0.0 : (mode == Mode::secret ? std::sqrt(sys.n()) / d * exact : sys.n() / d * exact);
    if (sol.diagnostics.duality_gap) status = "duality-gap";
  } catch (const ConvergenceError& e) {
    status = std::string("convergence-failure: ") + e.what();
    row.failed = true;
  } catch (const NumericalError& e) {
    status = std::string("numerical-failure: ") + e.what();
    row.failed = true;
  }
  try {
    const BoundsReport b = mode == Mode::secret ? srl_bounds_secret(sys, eigs) : srl_bounds_nosecret(sys, eigs);
    lower = b.lower;
    upper = b.upper;
  } catch (const InvalidRegime& e) {
    if (status == "ok") status = std::string("bounds-undefined: ") + e.what();
  }
  row.in_bounds = std::isfinite(exact) && std::isfinite(lower) && exact >= lower * (1.0 - 1e-9) &&
                  exact <= upper * (1.0 + 1e-6);
  row.cells = {key, exact, ach, lower, upper, p_exact, p_ach, div, cv, l_est, kkt,
               std::int64_t{row.in_bounds ? 1 : 0}, status};
  return row;
}

RVector config_eigs(const ExperimentConfig& cfg, const SystemConfig& sys) {
  if (!cfg.bob_eigenvalues.empty())
    return Eigen::Map<const RVector>(cfg.bob_eigenvalues.data(), static_cast<Eigen::Index>(cfg.bob_eigenvalues.size()));
  return RVector::Constant(sys.bob_modes(), cfg.bob_gain);
}

void finish_rate_table(RunResult& res, const std::string& name, const std::string& key,
                       const std::vector<RateRow>& rows) {
  Table t{rate_columns(key), {}};
  int failed = 0, outside = 0;
  for (const auto& r : rows) {
    t.rows.push_back(r.cells);
    failed += r.failed;
    outside += !r.in_bounds;
  }
  res.tables.emplace_back(name, std::move(t));
  res.report["summary"] = {{"rows", rows.size()}, {"failed_rows", failed}, {"rows_outside_bounds", outside}};
  if (failed > 0) res.exit_code = 3;
}

void run_capacity(const ExperimentConfig& cfg, RunResult& res) {
  const RateRow row = rate_row(cfg.mode, cfg.system, config_eigs(cfg, cfg.system), cfg.system.blocklength);
  finish_rate_table(res, "capacity.csv", "n", {row});
}

void run_sweep_n(const ExperimentConfig& cfg, RunResult& res) {
  const RVector eigs = config_eigs(cfg, cfg.system);
  auto rows = parallel_map(cfg.ladder.size(), [&](std::size_t i) {
    SystemConfig sys = cfg.system;
    sys.blocklength = std::llround(cfg.ladder[i]);
    return rate_row(cfg.mode, sys, eigs, sys.blocklength);
  });
  finish_rate_table(res, "sweep-n.csv", "n", rows);
}

void run_sweep_antennas(const ExperimentConfig& cfg, RunResult& res) {
  auto rows = parallel_map(cfg.ladder.size(), [&](std::size_t i) {
    SystemConfig sys = cfg.system;
    sys.n_a = static_cast<int>(std::llround(cfg.ladder[i]));
    return rate_row(cfg.mode, sys, RVector::Constant(sys.bob_modes(), cfg.bob_gain), std::int64_t{sys.n_a});
  });
  finish_rate_table(res, "sweep-antennas.csv", "n_a", rows);
}

// ---------------------------------------------------------------------------
// massive-limit

void run_massive(const ExperimentConfig& cfg, RunResult& res) {
  const auto& m = cfg.massive;
  const SystemConfig& sys = cfg.system;
  Table t{{{"n_a", false},
           {"g_secret", false},
           {"bound_secret_raw", false},
           {"bound_secret", false},
           {"exact_secret", false},
           {"g_nosecret", false},
           {"bound_nosecret_raw", false},
           {"bound_nosecret", false},
           {"exact_nosecret", false},
           {"kn_growth_secret", false},
           {"kn_growth_nosecret", false},
           {"rate_secret", true},
           {"rate_nosecret", true},
           {"capacity", true}},
          {}};
  const double cap = std::log1p(sys.power * m.lambda_b / sys.sigma_b2);
  auto rows = parallel_map(cfg.ladder.size(), [&](std::size_t i) {
    const int n_a = static_cast<int>(std::llround(cfg.ladder[i]));
    const auto ps = full_rate_probability(Mode::secret, sys, m.lambda_w, n_a, m.k);
    const auto pn = full_rate_probability(Mode::no_secret, sys, m.lambda_w, n_a, m.k);
    return std::vector<Cell>{std::int64_t{n_a},
                             ps.g,
                             ps.raw_bound,
                             ps.bound,
                             ps.exact,
                             pn.g,
                             pn.raw_bound,
                             pn.bound,
                             pn.exact,
                             kn_growth(Mode::secret, sys, m.lambda_w, n_a, m.k),
                             kn_growth(Mode::no_secret, sys, m.lambda_w, n_a, m.k),
                             expected_rank1_rate(Mode::secret, sys, m.lambda_b, m.lambda_w, n_a),
                             expected_rank1_rate(Mode::no_secret, sys, m.lambda_b, m.lambda_w, n_a),
                             cap};
  });
  t.rows = std::move(rows);
  res.tables.emplace_back("massive-limit.csv", std::move(t));
  res.tables.emplace_back("fig2.csv", emit_fig2_data(cfg));

  // The full-rate claim near N_a = 100 against what the formulas give there.
  constexpr int kProbe = 100;
  const auto probe = full_rate_probability(Mode::secret, sys, m.lambda_w, kProbe, m.k);
  const double rate_probe = expected_rank1_rate(Mode::secret, sys, m.lambda_b, m.lambda_w, kProbe);
  json tension = {
      {"claim", "near full rate with N_a around 100 (shared secret)"},
      {"n_a", kProbe},
      {"k", m.k},
      {"g_secret", json_number(probe.g)},
      {"lemma_bound_raw", json_number(probe.raw_bound)},
      {"lemma_bound_vacuous", probe.raw_bound <= 0.0},
      {"exact_full_rate_probability", json_number(probe.exact)},
      {"expected_rate_fraction_of_capacity", json_number(rate_probe / cap)},
      {"reconciled", false},
      {"statement",
       "At these parameters the lemma-based lower bound on Pr(full rate) is vacuous and the exact "
       "probability under the uniform-direction law is tiny; the full-rate claim is not implied by "
       "either quantity. Both are reported as computed."}};
  json derived = {{"power", json_number(sys.power)},
                  {"power_from_snr_db", m.snr_db.has_value()},
                  {"sqrt_n", json_number(std::sqrt(sys.n()))},
                  {"capacity_nats", json_number(cap)}};
  if (m.snr_db) derived["snr_db"] = *m.snr_db;
  res.report["summary"] = {{"rows", cfg.ladder.size()}, {"derived", derived}, {"tension", tension}};
}

// ---------------------------------------------------------------------------
// detect-sim

void run_detect(const ExperimentConfig& cfg, RunResult& res) {
  std::vector<double> ladder = cfg.ladder;
  if (ladder.empty()) ladder.push_back(cfg.system.n());
  const RVector eigs = config_eigs(cfg, cfg.system);
  Table t{{{"n", false},
           {"p_th", false},
           {"n_divergence", true},
           {"pinsker", false},
           {"min_sum", false},
           {"alpha", false},
           {"beta", false},
           {"tv_estimate", false},
           {"ci_halfwidth", false},
           {"floor", false},
           {"passed", false}},
          {}};
  auto rows = parallel_map(ladder.size(), [&](std::size_t i) {
    SystemConfig sys = cfg.system;
    sys.blocklength = std::llround(ladder[i]);
    RVector padded = RVector::Zero(sys.n_a);
    padded.head(eigs.size()) = eigs;
    const GramMatrix w_b = GramMatrix::diagonal(padded);
    const CovarianceSolution sol = achievable_scheme(cfg.mode, sys, w_b);
    const CovertnessReport rep = verify_covertness(sys, sol, cfg.trials, stream_seed(cfg.seed, i));
    const auto& e = rep.estimate;
    return std::vector<Cell>{std::int64_t{sys.blocklength}, sol.p_th, rep.n_divergence, rep.pinsker, e.min_sum,
                             e.alpha, e.beta, e.tv_estimate, e.ci_halfwidth, rep.floor,
                             std::int64_t{rep.passed ? 1 : 0}};
  });
  int failed = 0;
  for (const auto& r : rows) failed += std::get<std::int64_t>(r.back()) == 0;
  t.rows = std::move(rows);
  res.tables.emplace_back("detect-sim.csv", std::move(t));
  res.report["summary"] = {
      {"rows", ladder.size()},
      {"failed_rows", failed},
      {"trials", cfg.trials},
      {"method", "likelihood-ratio statistics from Gamma-distributed per-mode energies over the full blocklength"}};
  if (failed > 0) res.exit_code = 4;
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

std::vector<Check> invariant_suite(const ExperimentConfig& cfg) {
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double tol, bool passed, std::string detail = "") {
    checks.push_back({std::move(name), passed, value, tol, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, kNaN, 0.0, false, std::string("exception: ") + e.what());
    }
  };
  const SystemConfig& sys = cfg.system;
  Rng rng(stream_seed(cfg.seed, 0));

  guarded("divergence_scalar", [&] {
    const auto d = kl_willie(ChannelMatrix::from_real(Eigen::MatrixXd::Ones(1, 1)), CMatrix::Ones(1, 1), 1.0);
    const double err = std::abs(d.total - (std::log(2.0) - 0.5));
    add("divergence_scalar", err, 1e-9, err <= 1e-9);
  });

  guarded("divergence_isotropic_consistency", [&] {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      RVector alloc(sys.n_a);
      for (Eigen::Index i = 0; i < alloc.size(); ++i) alloc(i) = u(rng);
      const double a = kl_isotropic(alloc, sys.gamma_w, sys.sigma_w2, sys.n_w).total;
      const double b = kl_willie(worst_case_willie_channel(sys), alloc.cast<Complex>().asDiagonal().toDenseMatrix(),
                                 sys.sigma_w2).total;
      worst = std::max(worst, std::abs(a - b));
    }
    add("divergence_isotropic_consistency", worst, 1e-12, worst <= 1e-12);
  });

  guarded("divergence_nonnegative", [&] {
    double lowest = 0.0, top_penalty = -1.0;
    for (int trial = 0; trial < 50; ++trial) {
      CMatrix a = CMatrix::Zero(sys.n_a, sys.n_a);
      for (Eigen::Index i = 0; i < a.rows(); ++i) a.col(i) = random_unit_vector(sys.n_a, rng);
      const CMatrix q = a * a.adjoint();
      CMatrix h(sys.n_w, sys.n_a);
      for (Eigen::Index i = 0; i < h.rows(); ++i) h.row(i) = random_unit_vector(sys.n_a, rng).transpose();
      const auto d = kl_willie(ChannelMatrix(h), q, sys.sigma_w2);
      lowest = std::min(lowest, std::min(d.total, d.capacity_term));
      top_penalty = std::max(top_penalty, d.penalty_term);
    }
    add("divergence_signs", std::max(-lowest, top_penalty), 1e-12, lowest >= -1e-12 && top_penalty <= 1e-12);
  });

  const RVector eigs = config_eigs(cfg, sys);
  RVector padded = RVector::Zero(sys.n_a);
  padded.head(eigs.size()) = eigs;
  const GramMatrix w_b = GramMatrix::diagonal(padded);

  guarded("waterfill_budget", [&] {
    const double err = std::abs(standard_waterfill(w_b, sys.sigma_b2, sys.power).sum() - sys.power);
    add("waterfill_budget", err, 1e-9 * sys.power, err <= 1e-9 * sys.power);
  });

  for (Mode mode : {Mode::secret, Mode::no_secret}) {
    const std::string tag = mode == Mode::secret ? "_secret" : "_nosecret";
    guarded("solver" + tag, [&] {
      const CovarianceSolution sol = solve(mode, sys, w_b);
      const CovarianceSolution ach = achievable_scheme(mode, sys, w_b);
      const KktReport k = kkt_residual(sol, sys, w_b);
      add("kkt_residual" + tag, k.max(), 1e-6, k.max() <= 1e-6);
      const double slack = std::max(k.power_violation, k.lpd_violation);
      add("feasibility" + tag, slack, 1e-9, slack <= 1e-9);
      add("exact_dominates_achievable" + tag, ach.rate - sol.rate, 1e-9, sol.rate >= ach.rate - 1e-9);
      const CovarianceSolution again = solve(mode, sys, w_b);
      add("solver_deterministic" + tag, std::abs(again.rate - sol.rate), 0.0, again.rate == sol.rate);

      BoundsReport b;
      try {
        b = mode == Mode::secret ? srl_bounds_secret(sys, eigs) : srl_bounds_nosecret(sys, eigs);
      } catch (const InvalidRegime& e) {
        add("bounds" + tag, kNaN, 0.0, true, std::string("skipped: ") + e.what());
        return;
      }
      add("achievable_in_bounds" + tag, ach.rate, 1e-9,
          ach.rate >= b.lower * (1 - 1e-9) && ach.rate <= b.upper * (1 + 1e-9) + 1e-300,
          "lower=" + format_double(b.lower) + " upper=" + format_double(b.upper));
      add("exact_above_lower" + tag, b.lower - sol.rate, 1e-9, sol.rate >= b.lower * (1 - 1e-9));
      add("exact_below_upper" + tag, sol.rate / std::max(b.upper, 1e-300), 1.0 + 1e-6,
          sol.rate <= b.upper * (1 + 1e-6), "ratio exact/upper");

      double prev = -1.0;
      bool monotone = true;
      for (double scale : {0.25, 0.5, 1.0}) {
        SystemConfig s = sys;
        s.delta = sys.delta * scale;
        const double r = solve(mode, s, w_b).rate;
        monotone = monotone && r >= prev - 1e-12;
        prev = r;
      }
      add("rate_monotone_in_delta" + tag, prev, 1e-12, monotone);
    });
  }

  guarded("null_steering_orthogonality", [&] {
    double worst = 0.0;
    for (int dim : {2, 4, 8, 32}) {
      for (int trial = 0; trial < 250; ++trial) {
        const CVector ub = random_unit_vector(dim, rng);
        const CVector uw = random_unit_vector(dim, rng);
        worst = std::max(worst, std::abs(uw.dot(null_steering(ub, uw))));
      }
    }
    add("null_steering_orthogonality", worst, 1e-12, worst <= 1e-12);
  });

  guarded("lemma_calibration", [&] {
    std::vector<GridPoint> grid;
    for (int p : {2, 4, 8, 16, 32})
      for (double z : {0.2, 0.5, std::numbers::pi / 4, 1.2}) grid.push_back({p, z});
    const double k = calibrate_k(grid);
    double worst = 0.0;
    for (const auto& g : grid) worst = std::max(worst, lemma1_bound(g.p, g.zeta, k) - lemma1_exact(g.p, g.zeta));
    add("lemma_calibration", worst, 1e-12, worst <= 1e-12, "K*=" + format_double(k));
  });

  return checks;
}

void run_verify(const ExperimentConfig& cfg, RunResult& res) {
  const auto checks = invariant_suite(cfg);
  Table t{{{"check", false}, {"passed", false}, {"value", false}, {"tolerance", false}, {"detail", false}}, {}};
  json failed = json::array();
  for (const auto& c : checks) {
    t.rows.push_back({c.name, std::int64_t{c.passed ? 1 : 0}, c.value, c.tolerance, c.detail});
    if (!c.passed) failed.push_back(c.name);
  }
  res.tables.emplace_back("verify.csv", std::move(t));
  res.report["summary"] = {{"checks", checks.size()}, {"failed", failed}};
  if (!failed.empty()) res.exit_code = 4;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"capacity",      "sweep-n",    "sweep-antennas",
                                              "massive-limit", "detect-sim", "verify"};
  return names;
}

void ExperimentConfig::validate() const {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end())
    throw ConfigError("scenario: unknown scenario \"" + scenario + "\"");
  try {
    system.validate();
  } catch (const InvalidArgument& e) {
    std::string msg = e.what();
    if (msg.rfind("SystemConfig.", 0) == 0) msg = "system." + msg.substr(13);
    throw ConfigError(msg);
  }
  const bool needs_ladder = scenario == "sweep-n" || is_antenna_scenario(scenario);
  if (needs_ladder && ladder.empty()) throw ConfigError("ladder: scenario " + scenario + " needs a nonempty ladder");
  if (scenario == "capacity" && !ladder.empty()) throw ConfigError("ladder: capacity evaluates one blocklength; drop the ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const std::string path = "ladder[" + std::to_string(i) + "]";
    const double v = ladder[i];
    if (v != std::floor(v)) throw ConfigError(path + ": must be an integer");
    const double lowest = scenario == "massive-limit" ? 2.0 : 1.0;
    if (v < lowest) throw ConfigError(path + ": must be >= " + format_double(lowest));
    if (is_antenna_scenario(scenario) && v > 100000) throw ConfigError(path + ": antenna count too large");
    if (i > 0 && !(v > ladder[i - 1])) throw ConfigError(path + ": ladder must be strictly increasing");
  }
  if (!bob_eigenvalues.empty()) {
    if (scenario == "sweep-antennas")
      throw ConfigError("bob_eigenvalues: not allowed for sweep-antennas (use bob_gain)");
    if (static_cast<int>(bob_eigenvalues.size()) != system.bob_modes())
      throw ConfigError("bob_eigenvalues: expected " + std::to_string(system.bob_modes()) +
                        " values (min(n_a, n_b))");
    bool positive = false;
    for (std::size_t i = 0; i < bob_eigenvalues.size(); ++i) {
      if (bob_eigenvalues[i] < 0.0) throw ConfigError("bob_eigenvalues[" + std::to_string(i) + "]: must be >= 0");
      if (i > 0 && bob_eigenvalues[i] > bob_eigenvalues[i - 1])
        throw ConfigError("bob_eigenvalues: must be nonincreasing");
      positive = positive || bob_eigenvalues[i] > 0.0;
    }
    if (!positive) throw ConfigError("bob_eigenvalues: at least one must be positive");
  }
  if (!(bob_gain > 0.0)) throw ConfigError("bob_gain: must be positive");
  if (trials < 1000) throw ConfigError("trials: must be >= 1000");
  if (output_path.empty()) throw ConfigError("output_path: must be nonempty");
  if (!(massive.lambda_b > 0.0)) throw ConfigError("massive.lambda_b: must be positive");
  if (!(massive.lambda_w > 0.0)) throw ConfigError("massive.lambda_w: must be positive");
  if (!(massive.bandwidth_hz > 0.0)) throw ConfigError("massive.bandwidth_hz: must be positive");
  if (!(massive.k >= 0.0)) throw ConfigError("massive.k: must be >= 0");
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("line 1: top level must be a JSON object");
  reject_unknown(root,
                 {"scenario", "system", "mode", "bob_eigenvalues", "bob_gain", "ladder", "seed", "output_path",
                  "units", "trials", "massive"},
                 "");

  ExperimentConfig cfg;
  if (root.contains("scenario")) cfg.scenario = as_string(root["scenario"], "scenario");
  bool power_given = false;
  if (root.contains("system")) {
    const json& s = root["system"];
    if (!s.is_object()) throw ConfigError("system: expected an object");
    reject_unknown(s, {"n_a", "n_b", "n_w", "sigma_b2", "sigma_w2", "power", "delta", "blocklength", "gamma_w"},
                   "system");
    auto& sys = cfg.system;
    auto small_int = [&](const char* key, int& out) {
      if (!s.contains(key)) return;
      const std::int64_t v = as_integer(s[key], std::string("system.") + key);
      if (v < 1 || v > 100000) throw ConfigError(std::string("system.") + key + ": must lie in [1, 100000]");
      out = static_cast<int>(v);
    };
    small_int("n_a", sys.n_a);
    small_int("n_b", sys.n_b);
    small_int("n_w", sys.n_w);
    if (s.contains("sigma_b2")) sys.sigma_b2 = as_number(s["sigma_b2"], "system.sigma_b2");
    if (s.contains("sigma_w2")) sys.sigma_w2 = as_number(s["sigma_w2"], "system.sigma_w2");
    if (s.contains("power")) {
      sys.power = as_number(s["power"], "system.power");
      power_given = true;
    }
    if (s.contains("delta")) sys.delta = as_number(s["delta"], "system.delta");
    if (s.contains("blocklength")) sys.blocklength = as_integer(s["blocklength"], "system.blocklength");
    if (s.contains("gamma_w")) sys.gamma_w = as_number(s["gamma_w"], "system.gamma_w");
  }
  if (root.contains("mode")) cfg.mode = parse_mode(as_string(root["mode"], "mode"));
  if (root.contains("bob_eigenvalues")) cfg.bob_eigenvalues = as_number_list(root["bob_eigenvalues"], "bob_eigenvalues");
  if (root.contains("bob_gain")) cfg.bob_gain = as_number(root["bob_gain"], "bob_gain");
  if (root.contains("ladder")) {
    cfg.ladder = as_number_list(root["ladder"], "ladder");
    if (cfg.ladder.empty()) throw ConfigError("ladder: must be nonempty");
  }
  if (root.contains("seed")) {
    const json& v = root["seed"];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ConfigError("seed: expected a nonnegative 64-bit integer");
    cfg.seed = v.get<std::uint64_t>();
    cfg.seed_given = true;
  }
  if (root.contains("output_path")) cfg.output_path = as_string(root["output_path"], "output_path");
  if (root.contains("units")) cfg.units = parse_units(as_string(root["units"], "units"));
  if (root.contains("trials")) cfg.trials = as_integer(root["trials"], "trials");
  if (root.contains("massive")) {
    const json& m = root["massive"];
    if (!m.is_object()) throw ConfigError("massive: expected an object");
    reject_unknown(m, {"lambda_b", "lambda_w", "bandwidth_hz", "k", "snr_db"}, "massive");
    if (m.contains("lambda_b")) cfg.massive.lambda_b = as_number(m["lambda_b"], "massive.lambda_b");
    if (m.contains("lambda_w")) cfg.massive.lambda_w = as_number(m["lambda_w"], "massive.lambda_w");
    if (m.contains("bandwidth_hz")) cfg.massive.bandwidth_hz = as_number(m["bandwidth_hz"], "massive.bandwidth_hz");
    if (m.contains("k")) cfg.massive.k = as_number(m["k"], "massive.k");
    if (m.contains("snr_db")) cfg.massive.snr_db = as_number(m["snr_db"], "massive.snr_db");
  }
  if (cfg.massive.snr_db) {
    if (power_given) throw ConfigError("system.power: conflicts with massive.snr_db; give one of them");
    if (!(cfg.massive.lambda_b > 0.0)) throw ConfigError("massive.lambda_b: must be positive");
    cfg.system.power = cfg.system.sigma_b2 * std::pow(10.0, *cfg.massive.snr_db / 10.0) / cfg.massive.lambda_b;
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const ExperimentConfig& cfg) {
  const auto& s = cfg.system;
  json j = {{"scenario", cfg.scenario},
            {"system",
             {{"n_a", s.n_a},
              {"n_b", s.n_b},
              {"n_w", s.n_w},
              {"sigma_b2", s.sigma_b2},
              {"sigma_w2", s.sigma_w2},
              {"power", s.power},
              {"delta", s.delta},
              {"blocklength", s.blocklength},
              {"gamma_w", s.gamma_w}}},
            {"mode", to_string(cfg.mode)},
            {"bob_eigenvalues", cfg.bob_eigenvalues},
            {"bob_gain", cfg.bob_gain},
            {"ladder", cfg.ladder},
            {"seed", cfg.seed},
            {"output_path", cfg.output_path},
            {"units", cfg.units == Units::bits ? "bits" : "nats"},
            {"trials", cfg.trials},
            {"massive",
             {{"lambda_b", cfg.massive.lambda_b},
              {"lambda_w", cfg.massive.lambda_w},
              {"bandwidth_hz", cfg.massive.bandwidth_hz},
              {"k", cfg.massive.k}}}};
  if (cfg.massive.snr_db) j["massive"]["snr_db"] = *cfg.massive.snr_db;
  return j;
}

GramMatrix bob_gram(const ExperimentConfig& cfg) {
  const RVector eigs = config_eigs(cfg, cfg.system);
  RVector padded = RVector::Zero(cfg.system.n_a);
  padded.head(eigs.size()) = eigs;
  return GramMatrix::diagonal(padded);
}

std::string to_csv(const Table& table, Units units) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c].name;
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ",";
      const Cell& cell = row[c];
      if (const double* d = std::get_if<double>(&cell)) {
        const bool convert = units == Units::bits && c < table.columns.size() && table.columns[c].information;
        out << format_double(convert ? *d / std::numbers::ln2 : *d);
      } else if (const std::int64_t* i = std::get_if<std::int64_t>(&cell)) {
        out << *i;
      } else {
        out << quote_csv(std::get<std::string>(cell));
      }
    }
    out << "\n";
  }
  return out.str();
}

Table emit_fig2_data(const ExperimentConfig& cfg) {
  const auto& m = cfg.massive;
  const SystemConfig& sys = cfg.system;
  if (cfg.ladder.empty()) throw ConfigError("ladder: fig2 data needs antenna counts");
  const double to_bps = m.bandwidth_hz / std::numbers::ln2;
  const double cap = std::log1p(sys.power * m.lambda_b / sys.sigma_b2);
  Table t{{{"N_a", false}, {"rate_secret_bps", false}, {"rate_nosecret_bps", false}, {"C_bps", false}}, {}};
  t.rows = parallel_map(cfg.ladder.size(), [&](std::size_t i) {
    const int n_a = static_cast<int>(std::llround(cfg.ladder[i]));
    return std::vector<Cell>{std::int64_t{n_a},
                             expected_rank1_rate(Mode::secret, sys, m.lambda_b, m.lambda_w, n_a) * to_bps,
                             expected_rank1_rate(Mode::no_secret, sys, m.lambda_b, m.lambda_w, n_a) * to_bps,
                             cap * to_bps};
  });
  return t;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult res;
  res.report = {{"tool", "covertmimo"},
                {"version", kVersion},
                {"scenario", cfg.scenario},
                {"seed", cfg.seed},
                {"units", cfg.units == Units::bits ? "bits" : "nats"},
                {"config", to_json(cfg)}};
  if (cfg.scenario == "capacity") run_capacity(cfg, res);
  else if (cfg.scenario == "sweep-n") run_sweep_n(cfg, res);
  else if (cfg.scenario == "sweep-antennas") run_sweep_antennas(cfg, res);
  else if (cfg.scenario == "massive-limit") run_massive(cfg, res);
  else if (cfg.scenario == "detect-sim") run_detect(cfg, res);
  else run_verify(cfg, res);

  json files = json::array();
  json info = json::object();
  for (const auto& [name, table] : res.tables) {
    files.push_back(name);
    json cols = json::array();
    for (const auto& c : table.columns)
      if (c.information) cols.push_back(c.name);
    info[name] = cols;
  }
  res.report["outputs"] = files;
  res.report["information_columns"] = info;
  res.report["exit_code"] = res.exit_code;
  return res;
}

void write_outputs(const RunResult& result, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& [name, table] : result.tables) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << to_csv(table, cfg.units);
  }
  std::ofstream js(dir / (cfg.scenario + ".json"), std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + (dir / (cfg.scenario + ".json")).string());
  js << result.report.dump(2) << "\n";
}

}  // namespace covertmimo
