#include "covertmimo/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "covertmimo/divergence.hpp"
#include "covertmimo/errors.hpp"

namespace covertmimo {
namespace {

constexpr double kFreezeTol = 1e-12;  // relative to the largest eigenvalue of W_b
constexpr int kSubBrackets = 64;
constexpr double kSmallestBracket = 1e-15;  // relative to the scanned interval
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Eigen::Index> active_modes(const GramMatrix& w) {
  std::vector<Eigen::Index> idx;
  const RVector& ev = w.eigenvalues();
  if (ev.size() == 0 || !(ev(0) > 0.0)) return idx;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > kFreezeTol * ev(0)) idx.push_back(i);
  return idx;
}

struct Waterfill {
  RVector alloc;
  double level = 0.0;
};

Waterfill waterfill(const GramMatrix& w_b, double sigma_b2, double p) {
  if (!(sigma_b2 > 0.0)) throw InvalidArgument("standard_waterfill: sigma_b2 must be positive");
  if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("standard_waterfill: p_budget must be finite and >= 0");
  Waterfill out{RVector::Zero(w_b.dim()), 0.0};
  if (p == 0.0) return out;
  const auto active = active_modes(w_b);
  if (active.empty()) throw DegenerateChannel("standard_waterfill: W_b has no gain");

  // Eigenvalues are sorted, so the active set is a prefix of the strongest modes.
  double inv_sum = 0.0;
  std::size_t k = 0;
  double level = 0.0;
  for (std::size_t j = 0; j < active.size(); ++j) {
    const double floor_j = sigma_b2 / w_b.eigenvalues()(active[j]);
    const double trial = (p + inv_sum + floor_j) / static_cast<double>(j + 1);
    if (j > 0 && trial <= floor_j) break;
    inv_sum += floor_j;
    k = j + 1;
    level = trial;
  }
  // level - floor_i written as p/k + mean(floor_j - floor_i): no cancellation
  // against the floor when p is tiny.
  for (std::size_t j = 0; j < k; ++j) {
    const Eigen::Index i = active[j];
    const double floor_i = sigma_b2 / w_b.eigenvalues()(i);
    double spread = 0.0;
    for (std::size_t l = 0; l < k; ++l) spread += sigma_b2 / w_b.eigenvalues()(active[l]) - floor_i;
    out.alloc(i) = std::max(p / static_cast<double>(k) + spread / static_cast<double>(k), 0.0);
  }
  out.level = level;
  return out;
}

// One eigenmode: gain a = lambda_i / sigma_b2 at Bob, b = gamma_w / sigma_w2 at Willie.
class ModeTerm {
 public:
  ModeTerm(double a, double b, Mode mode) : a_(a), b_(b), mode_(mode) {}

  double a() const { return a_; }

  double pen(double v) const {
    const double x = b_ * v;
    return mode_ == Mode::secret ? mode_divergence(x) : std::log1p(x);
  }

  double dpen(double v) const {
    const double x = b_ * v;
    return mode_ == Mode::secret ? b_ * mode_divergence_slope(x) : b_ / (1.0 + x);
  }

  double gain_slope(double v) const { return a_ / (1.0 + a_ * v); }

  // Largest v <= cap with pen(v) <= level.
  double pen_inverse(double level, double cap) const {
    if (level <= 0.0) return 0.0;
    if (pen(cap) <= level) return cap;
    if (mode_ == Mode::no_secret) return std::min(std::expm1(level) / b_, cap);
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (pen(mid) <= level ? lo : hi) = mid;
    }
    return lo;
  }

 private:
  double a_;
  double b_;
  Mode mode_;
};

struct ModeChoice {
  double value = 0.0;
  bool multi = false;
};

// argmax over [0, cap] of log(1 + a v) - lambda v - eta (pen(v) - t)^+.
ModeChoice maximize_mode(const ModeTerm& m, double lambda, double eta, double t, double cap) {
  auto phi = [&](double v) {
    double out = std::log1p(m.a() * v) - lambda * v;
    if (eta > 0.0) out -= eta * std::max(m.pen(v) - t, 0.0);
    return out;
  };
  auto d_right = [&](double v) { return m.gain_slope(v) - lambda - eta * m.dpen(v); };

  // The plain gain term has the closed-form stationary point 1/lambda - 1/a.
  auto free_root = [&](double hi) {
    if (lambda <= 0.0) return hi;
    return std::clamp(1.0 / lambda - 1.0 / m.a(), 0.0, hi);
  };

  if (eta <= 0.0) return {free_root(cap), false};

  const double kink = t > 0.0 ? m.pen_inverse(t, cap) : 0.0;
  std::vector<double> candidates{0.0, kink, cap};
  if (kink > 0.0) candidates.push_back(free_root(kink));

  int maxima = 0;
  if (cap > kink) {
    const double width = cap - kink;
    std::vector<double> edges{kink};
    for (int j = 0; j < kSubBrackets; ++j) {
      const double e = std::log10(kSmallestBracket) * (1.0 - static_cast<double>(j) / (kSubBrackets - 1));
      edges.push_back(kink + width * std::pow(10.0, e));
    }
    edges.back() = cap;
    double d_prev = d_right(edges[0]);
    for (std::size_t j = 1; j < edges.size(); ++j) {
      const double d_next = d_right(edges[j]);
      if (d_prev > 0.0 && d_next <= 0.0) {
        double lo = edges[j - 1], hi = edges[j];
        for (int it = 0; it < 400; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (d_right(mid) > 0.0 ? lo : hi) = mid;
        }
        candidates.push_back(0.5 * (lo + hi));
        ++maxima;
      }
      d_prev = d_next;
    }
  }

  std::sort(candidates.begin(), candidates.end());
  ModeChoice best{candidates.front(), maxima > 1};
  double best_phi = phi(best.value);
  for (double c : candidates) {
    const double f = phi(c);
    if (f > best_phi) {
      best_phi = f;
      best.value = c;
    }
  }
  return best;
}

struct DualPoint {
  std::vector<double> alloc;
  double lambda = 0.0;
  double eta = 0.0;
  bool multi = false;
  bool jump = false;
};

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> blend(const std::vector<double>& x, const std::vector<double>& y, double theta) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] + theta * (y[i] - x[i]), 0.0);
  return out;
}

bool differs(const std::vector<double>& x, const std::vector<double>& y) {
  double scale = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    scale = std::max({scale, std::abs(x[i]), std::abs(y[i])});
    gap = std::max(gap, std::abs(x[i] - y[i]));
  }
  return gap > 1e-9 * std::max(scale, 1e-300);
}

// Separable problem for a fixed epigraph level t:
//   max sum log(1 + a_i v_i)  s.t.  sum v_i <= P,  sum (pen_i(v_i) - t)^+ <= budget.
class SeparableProblem {
 public:
  SeparableProblem(const std::vector<ModeTerm>& modes, double power, double t, double budget,
                   const OptimizerSettings& s)
      : modes_(modes), power_(power), t_(t), budget_(budget), s_(s) {}

  double excess(const std::vector<double>& v) const {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e += std::max(modes_[i].pen(v[i]) - t_, 0.0);
    return e;
  }

  DualPoint solve(int& iterations) const {
    DualPoint base = power_solve(0.0);
    if (excess(base.alloc) <= budget_) return base;

    double hi = 1e6;
    DualPoint p_hi = power_solve(hi);
    while (excess(p_hi.alloc) > budget_) {
      hi *= 1e3;
      if (hi > 1e120)
        throw ConvergenceError("covert solver: eta bracket does not close", {excess(p_hi.alloc) - budget_});
      p_hi = power_solve(hi);
    }
    double lo = std::min(1e-12, hi * 1e-3);
    DualPoint p_lo = power_solve(lo);
    while (excess(p_lo.alloc) <= budget_) {
      hi = lo;
      p_hi = std::move(p_lo);
      lo *= 1e-3;
      if (lo < 1e-300) return p_hi;
      p_lo = power_solve(lo);
    }

    int it = 0;
    for (; it < s_.max_iter && hi / lo - 1.0 > s_.bisect_tol; ++it) {
      const double mid = std::sqrt(lo * hi);
      DualPoint p = power_solve(mid);
      if (excess(p.alloc) <= budget_) {
        hi = mid;
        p_hi = std::move(p);
      } else {
        lo = mid;
        p_lo = std::move(p);
      }
    }
    iterations += it;
    if (hi / lo - 1.0 > s_.bisect_tol)
      throw ConvergenceError("covert solver: eta bisection hit max_iter",
                             {hi / lo - 1.0, excess(p_hi.alloc) - budget_});

    // Both endpoints maximize the Lagrangian at nearly the same multipliers;
    // move from the feasible one toward the other as far as the budget allows.
    double th_lo = 0.0, th_hi = 1.0;
    for (int k = 0; k < 2000; ++k) {
      const double mid = 0.5 * (th_lo + th_hi);
      if (mid <= th_lo || mid >= th_hi) break;
      (excess(blend(p_hi.alloc, p_lo.alloc, mid)) <= budget_ ? th_lo : th_hi) = mid;
    }
    DualPoint out;
    out.alloc = blend(p_hi.alloc, p_lo.alloc, th_lo);
    out.lambda = p_hi.lambda + th_lo * (p_lo.lambda - p_hi.lambda);
    out.eta = hi + th_lo * (lo - hi);
    out.multi = p_hi.multi || p_lo.multi;
    out.jump = p_hi.jump || p_lo.jump || differs(p_hi.alloc, p_lo.alloc);
    return out;
  }

 private:
  DualPoint allocate(double lambda, double eta) const {
    DualPoint p;
    p.lambda = lambda;
    p.eta = eta;
    p.alloc.reserve(modes_.size());
    for (const auto& m : modes_) {
      // Search past P so that lambda, not the search box, enforces the power budget.
      const ModeChoice c = maximize_mode(m, lambda, eta, t_, 2.0 * power_);
      p.alloc.push_back(c.value);
      p.multi = p.multi || c.multi;
    }
    return p;
  }

  // Multiplier on the power budget for fixed eta, tight whenever positive.
  DualPoint power_solve(double eta) const {
    DualPoint free = allocate(0.0, eta);
    if (sum_of(free.alloc) <= power_) return free;

    double lo = 0.0, hi = 0.0;
    for (const auto& m : modes_) hi = std::max(hi, m.a());
    DualPoint p_lo = std::move(free);
    DualPoint p_hi = allocate(hi, eta);
    // Absolute in units of the largest slope: lambda may tend to 0.
    const double tol = s_.bisect_tol * hi;
    for (int it = 0; it < s_.max_iter && hi - lo > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      DualPoint p = allocate(mid, eta);
      if (sum_of(p.alloc) > power_) {
        lo = mid;
        p_lo = std::move(p);
      } else {
        hi = mid;
        p_hi = std::move(p);
      }
    }
    if (hi - lo > tol) throw ConvergenceError("covert solver: lambda bisection hit max_iter", {hi - lo});

    const double s_lo = sum_of(p_lo.alloc), s_hi = sum_of(p_hi.alloc);
    const double theta = s_lo > s_hi ? std::clamp((power_ - s_hi) / (s_lo - s_hi), 0.0, 1.0) : 0.0;
    DualPoint out;
    out.alloc = blend(p_hi.alloc, p_lo.alloc, theta);
    out.lambda = hi + theta * (lo - hi);
    out.eta = eta;
    out.multi = p_lo.multi || p_hi.multi;
    out.jump = differs(p_hi.alloc, p_lo.alloc);
    return out;
  }

  const std::vector<ModeTerm>& modes_;
  double power_;
  double t_;
  double budget_;
  const OptimizerSettings& s_;
};

double rate_of(const GramMatrix& w_b, double sigma_b2, const RVector& alloc) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < alloc.size(); ++i)
    if (alloc(i) > 0.0) r += std::log1p(alloc(i) * w_b.eigenvalues()(i) / sigma_b2);
  return r;
}

CovarianceSolution assemble(Mode mode, const SystemConfig& cfg, const GramMatrix& w_b, RVector alloc,
                            Multipliers mult, double t_level) {
  CovarianceSolution sol;
  sol.mode = mode;
  sol.eigvecs = w_b.eigenvectors();
  sol.alloc = std::move(alloc);
  sol.p_th = sol.alloc.sum();
  sol.rate = rate_of(w_b, cfg.sigma_b2, sol.alloc);
  const DivergenceBreakdown d = kl_isotropic(sol.alloc, cfg.gamma_w, cfg.sigma_w2, cfg.n_w);
  sol.divergence = d.total;
  sol.constraint_value = mode == Mode::secret ? d.total : d.capacity_term;
  sol.multipliers = mult;
  sol.t_level = t_level;
  return sol;
}

void check_inputs(const SystemConfig& cfg, const GramMatrix& w_b, const OptimizerSettings& s) {
  cfg.validate();
  s.validate();
  if (w_b.dim() != cfg.n_a) throw InvalidArgument("solver: W_b must be N_a x N_a");
}

// Multipliers of a primal point read off its stationarity equations. A
// non-concave mode Lagrangian can leave the dual search at a jump even though
// the primal point satisfies KKT with multipliers between the two endpoints.
Multipliers fit_multipliers(const CovarianceSolution& sol, const SystemConfig& cfg, const GramMatrix& w_b) {
  const double b = cfg.gamma_w / cfg.sigma_w2;
  const double trace = sol.alloc.sum();
  const bool power_tight = std::abs(cfg.power - trace) <= 1e-9 * cfg.power;
  const double budget = cfg.lpd_budget();
  const bool lpd_tight = std::abs(budget - sol.constraint_value) <= 1e-9 * budget;
  std::vector<std::array<double, 3>> rows;
  for (Eigen::Index i = 0; i < sol.alloc.size(); ++i) {
    const double v = sol.alloc(i);
    const double a = w_b.eigenvalues()(i) / cfg.sigma_b2;
    if (v <= 0.0 || a <= 0.0) continue;
    const ModeTerm m(a, b, sol.mode);
    const double pen = m.pen(v), t = sol.t_level;
    if (t > 0.0 && std::abs(pen - t) <= 1e-9 * t) continue;
    rows.push_back({m.gain_slope(v), 1.0, pen > t ? m.dpen(v) : 0.0});
  }
  Multipliers out{0.0, 0.0};
  if (rows.empty() || (!power_tight && !lpd_tight)) return out;
  const int cols = (power_tight ? 1 : 0) + (lpd_tight ? 1 : 0);
  Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    int c = 0;
    if (power_tight) A(r, c++) = rows[r][1];
    if (lpd_tight) A(r, c++) = rows[r][2];
    y(r) = rows[r][0];
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
  int c = 0;
  if (power_tight) out.lambda = std::max(x(c++), 0.0);
  if (lpd_tight) out.eta = std::max(x(c++), 0.0);
  return out;
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::secret ? "secret" : "no-secret"; }

void OptimizerSettings::validate() const {
  if (!(bisect_tol > 0.0) || !(constraint_tol > 0.0) || max_iter < 1 || !(grid_resolution > 0.0))
    throw InvalidArgument("OptimizerSettings: all settings must be positive");
}

CMatrix CovarianceSolution::covariance() const {
  return eigvecs * alloc.cast<Complex>().asDiagonal() * eigvecs.adjoint();
}

RVector standard_waterfill(const GramMatrix& w_b, double sigma_b2, double p_budget) {
  return waterfill(w_b, sigma_b2, p_budget).alloc;
}

double waterfill_level(const GramMatrix& w_b, double sigma_b2, double p_budget) {
  return waterfill(w_b, sigma_b2, p_budget).level;
}

double constraint_value(Mode mode, const RVector& alloc, const SystemConfig& cfg) {
  const DivergenceBreakdown d = kl_isotropic(alloc, cfg.gamma_w, cfg.sigma_w2, cfg.n_w);
  return mode == Mode::secret ? d.total : d.capacity_term;
}

CovarianceSolution solve(Mode mode, const SystemConfig& cfg, const GramMatrix& w_b,
                         const OptimizerSettings& settings) {
  check_inputs(cfg, w_b, settings);
  const auto active = active_modes(w_b);
  if (active.empty()) throw DegenerateChannel("solver: W_b has no gain");

  const double budget = cfg.lpd_budget();
  if (budget == 0.0) {
    // Any power is detectable; only the zero covariance is feasible.
    return assemble(mode, cfg, w_b, RVector::Zero(cfg.n_a), {0.0, kInf}, 0.0);
  }

  const double b = cfg.gamma_w / cfg.sigma_w2;
  std::vector<ModeTerm> modes;
  for (Eigen::Index i : active) modes.emplace_back(w_b.eigenvalues()(i) / cfg.sigma_b2, b, mode);

  const int m_seen = cfg.willie_modes();
  int iterations = 0;
  auto run = [&](double t) {
    return SeparableProblem(modes, cfg.power, t, budget - m_seen * t, settings).solve(iterations);
  };
  auto value = [&](const DualPoint& p) {
    double r = 0.0;
    for (std::size_t i = 0; i < p.alloc.size(); ++i) r += std::log1p(modes[i].a() * p.alloc[i]);
    return r;
  };

  DualPoint best;
  double best_t = 0.0;
  if (static_cast<int>(modes.size()) <= m_seen) {
    best = run(0.0);
  } else {
    // Willie observes only the M strongest allocations:
    // sum_topM pen = min_t [M t + sum (pen_i - t)^+], t in [0, budget / M].
    const double t_max = budget / m_seen;
    constexpr int kCoarse = 9;
    std::vector<double> ts(kCoarse), vals(kCoarse);
    std::vector<DualPoint> pts(kCoarse);
    for (int k = 0; k < kCoarse; ++k) {
      ts[k] = t_max * k / (kCoarse - 1);
      pts[k] = run(ts[k]);
      vals[k] = value(pts[k]);
    }
    const int k_best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    best = pts[k_best];
    best_t = ts[k_best];
    double best_val = vals[k_best];
    double lo = ts[std::max(k_best - 1, 0)], hi = ts[std::min(k_best + 1, kCoarse - 1)];
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    DualPoint p1 = run(x1), p2 = run(x2);
    double f1 = value(p1), f2 = value(p2);
    auto consider = [&](double t, const DualPoint& p, double f) {
      if (f > best_val) {
        best_val = f;
        best = p;
        best_t = t;
      }
    };
    consider(x1, p1, f1);
    consider(x2, p2, f2);
    for (int it = 0; it < settings.max_iter && hi - lo > 1e-12 * t_max; ++it) {
      if (f1 >= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - ratio * (hi - lo);
        p1 = run(x1);
        f1 = value(p1);
        consider(x1, p1, f1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + ratio * (hi - lo);
        p2 = run(x2);
        f2 = value(p2);
        consider(x2, p2, f2);
      }
    }
  }

  RVector alloc = RVector::Zero(cfg.n_a);
  for (std::size_t j = 0; j < active.size(); ++j) alloc(active[j]) = best.alloc[j];
  CovarianceSolution sol = assemble(mode, cfg, w_b, std::move(alloc), {best.lambda, best.eta}, best_t);
  sol.diagnostics.multi_root = best.multi;
  sol.diagnostics.outer_iterations = iterations;
  if (best.jump) {
    CovarianceSolution refit = sol;
    refit.multipliers = fit_multipliers(sol, cfg, w_b);
    if (kkt_residual(refit, cfg, w_b).max() < kkt_residual(sol, cfg, w_b).max()) sol.multipliers = refit.multipliers;
    if (kkt_residual(sol, cfg, w_b).max_stationarity > 1e-6) sol.diagnostics.duality_gap = true;
  }

  // The closed-form scheme is feasible; a dual fixed point that falls short of
  // it is a duality gap, and the better primal point is returned.
  CovarianceSolution fallback = achievable_scheme(mode, cfg, w_b);
  if (fallback.rate > sol.rate + 1e-12 * std::max(sol.rate, 1e-300)) {
    fallback.diagnostics.duality_gap = true;
    fallback.diagnostics.multi_root = sol.diagnostics.multi_root;
    fallback.diagnostics.outer_iterations = iterations;
    return fallback;
  }
  return sol;
}

CovarianceSolution solve_secret(const SystemConfig& cfg, const GramMatrix& w_b, const OptimizerSettings& s) {
  return solve(Mode::secret, cfg, w_b, s);
}

CovarianceSolution solve_nosecret(const SystemConfig& cfg, const GramMatrix& w_b, const OptimizerSettings& s) {
  return solve(Mode::no_secret, cfg, w_b, s);
}

double achievable_power_secret(const SystemConfig& cfg) {
  cfg.validate();
  const double p = std::sqrt(2.0) * cfg.bob_modes() * cfg.sigma_w2 * cfg.delta /
                   (cfg.gamma_w * std::sqrt(cfg.n() * cfg.n_w));
  return std::min(cfg.power, p);
}

double achievable_power_nosecret(const SystemConfig& cfg) {
  cfg.validate();
  const double p = 2.0 * cfg.bob_modes() * cfg.sigma_w2 * cfg.delta * cfg.delta /
                   (cfg.gamma_w * cfg.n() * cfg.willie_modes());
  return std::min(cfg.power, p);
}

CovarianceSolution achievable_scheme(Mode mode, const SystemConfig& cfg, const GramMatrix& w_b) {
  cfg.validate();
  if (w_b.dim() != cfg.n_a) throw InvalidArgument("achievable_scheme: W_b must be N_a x N_a");
  double p_th = mode == Mode::secret ? achievable_power_secret(cfg) : achievable_power_nosecret(cfg);
  const double limit = 2.0 * cfg.delta * cfg.delta;
  auto feasible = [&](double p) {
    return cfg.n() * constraint_value(mode, standard_waterfill(w_b, cfg.sigma_b2, p), cfg) <= limit;
  };

  // Water-filling onto fewer strong modes than Willie's closed form assumes
  // can overshoot the budget; shrink P_th until it holds.
  bool capped = false;
  if (p_th > 0.0 && !feasible(p_th)) {
    double lo = 0.0, hi = p_th;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    p_th = lo;
    capped = true;
  }

  const Waterfill wf = waterfill(w_b, cfg.sigma_b2, p_th);
  double lambda = 0.0;
  if (wf.level > 0.0) {
    lambda = 1.0 / wf.level;
  } else if (w_b.spectral_norm() > 0.0) {
    lambda = w_b.spectral_norm() / cfg.sigma_b2;
  }
  CovarianceSolution sol = assemble(mode, cfg, w_b, wf.alloc, {lambda, 0.0}, 0.0);
  sol.diagnostics.lpd_capped = capped;
  return sol;
}

CovarianceSolution achievable_scheme_secret(const SystemConfig& cfg, const GramMatrix& w_b) {
  return achievable_scheme(Mode::secret, cfg, w_b);
}

CovarianceSolution achievable_scheme_nosecret(const SystemConfig& cfg, const GramMatrix& w_b) {
  return achievable_scheme(Mode::no_secret, cfg, w_b);
}

double KktReport::max() const {
  return std::max({max_stationarity, power_violation, lpd_violation, power_complementarity, lpd_complementarity});
}

KktReport kkt_residual(const CovarianceSolution& sol, const SystemConfig& cfg, const GramMatrix& w_b) {
  cfg.validate();
  if (sol.alloc.size() != w_b.dim()) throw InvalidArgument("kkt_residual: allocation size differs from W_b");
  const double b = cfg.gamma_w / cfg.sigma_w2;
  const double lam = sol.multipliers.lambda;
  const double eta = sol.multipliers.eta;
  const double t = sol.t_level;
  const auto active = active_modes(w_b);

  KktReport r;
  r.stationarity.assign(sol.alloc.size(), 0.0);
  std::vector<bool> is_active(sol.alloc.size(), false);
  for (Eigen::Index i : active) is_active[i] = true;

  for (Eigen::Index i = 0; i < sol.alloc.size(); ++i) {
    const double v = sol.alloc(i);
    const double a = is_active[i] ? w_b.eigenvalues()(i) / cfg.sigma_b2 : 0.0;
    const ModeTerm m(a, b, sol.mode);
    const double d_gain = (a > 0.0 ? m.gain_slope(v) : 0.0) - lam;
    double res = 0.0;
    if (std::isinf(eta)) {
      res = v > 0.0 ? kInf : 0.0;
    } else if (v <= 0.0) {
      const double d0 = t > 0.0 ? d_gain : d_gain - eta * m.dpen(0.0);
      res = std::max(d0, 0.0);
    } else {
      const double pen = m.pen(v);
      const double d_pen = d_gain - eta * m.dpen(v);
      if (t > 0.0 && std::abs(pen - t) <= 1e-9 * t) {
        // Kink of (pen - t)^+: 0 must lie in [d_pen, d_gain].
        res = std::max({d_pen, -d_gain, 0.0});
      } else if (pen > t) {
        res = std::abs(d_pen);
      } else {
        res = std::abs(d_gain);
      }
    }
    r.stationarity[i] = res;
    r.max_stationarity = std::max(r.max_stationarity, res);
  }

  const double trace = sol.alloc.sum();
  const double cv = constraint_value(sol.mode, sol.alloc, cfg);
  const double budget = cfg.lpd_budget();
  r.power_violation = std::max(trace - cfg.power, 0.0);
  r.lpd_violation = std::max(cfg.n() * cv - 2.0 * cfg.delta * cfg.delta, 0.0);
  r.power_complementarity = std::abs(lam * (cfg.power - trace));
  const double slack = budget - cv;
  r.lpd_complementarity = (eta == 0.0 || slack == 0.0) ? 0.0 : std::abs(eta * slack);
  return r;
}

}  // namespace covertmimo
