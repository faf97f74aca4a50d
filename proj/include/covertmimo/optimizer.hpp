#pragma once

#include <string>
#include <vector>

#include "covertmimo/channel.hpp"

namespace covertmimo {

enum class Mode { secret, no_secret };

std::string to_string(Mode m);

struct OptimizerSettings {
  double bisect_tol = 1e-10;      // relative, in multiplier space
  double constraint_tol = 1e-9;   // relative
  int max_iter = 200;             // per bisection
  double grid_resolution = 1e-6;  // oracle grids, power units

  void validate() const;
};

struct Multipliers {
  double lambda = 0.0;  // power constraint
  double eta = 0.0;     // covertness constraint; +inf when delta = 0
};

struct SolverDiagnostics {
  bool duality_gap = false;  // dual fixed point did not reach a stationary primal point
  bool multi_root = false;   // some per-mode Lagrangian had several local maxima
  bool lpd_capped = false;   // achievable scheme power lowered below its closed form
  int outer_iterations = 0;
};

/// Input covariance Q = eigvecs * diag(alloc) * eigvecs^H.
///
/// alloc follows the (nonincreasing) eigenvalue order of W_b. divergence is
/// the per-use relative entropy at the worst-case Willie; constraint_value is
/// the per-use quantity that the covertness budget 2 delta^2 / n bounds (the
/// full divergence in secret mode, its log-det part without a secret).
struct CovarianceSolution {
  CMatrix eigvecs;
  RVector alloc;
  double p_th = 0.0;
  double rate = 0.0;  // nats per channel use
  double divergence = 0.0;
  double constraint_value = 0.0;
  Multipliers multipliers;
  Mode mode = Mode::secret;
  double t_level = 0.0;  // top-M epigraph level; 0 when Willie sees every active mode
  SolverDiagnostics diagnostics;

  CMatrix covariance() const;
};

/// Lambda_i = (mu - sigma_b2 / lambda_i)^+ with sum Lambda_i = p_budget.
/// Modes with lambda_i = 0 get nothing. Throws DegenerateChannel when W_b = 0
/// and p_budget > 0.
RVector standard_waterfill(const GramMatrix& w_b, double sigma_b2, double p_budget);

/// Water level mu of the allocation above (0 when p_budget = 0).
double waterfill_level(const GramMatrix& w_b, double sigma_b2, double p_budget);

/// Per-use constrained quantity for allocation alloc against gamma_w * I_hat.
double constraint_value(Mode mode, const RVector& alloc, const SystemConfig& cfg);

/// Maximizes sum log(1 + Lambda_i lambda_i / sigma_b2) subject to
/// sum Lambda_i <= P and the covertness budget, by dual bisection over
/// (eta, lambda) with bracketed per-mode root finding.
/// Throws ConvergenceError when the multiplier brackets cannot be closed.
CovarianceSolution solve_secret(const SystemConfig& cfg, const GramMatrix& w_b,
                                const OptimizerSettings& settings = {});
CovarianceSolution solve_nosecret(const SystemConfig& cfg, const GramMatrix& w_b,
                                  const OptimizerSettings& settings = {});
CovarianceSolution solve(Mode mode, const SystemConfig& cfg, const GramMatrix& w_b,
                         const OptimizerSettings& settings = {});

/// Closed-form power threshold followed by water-filling.
CovarianceSolution achievable_scheme_secret(const SystemConfig& cfg, const GramMatrix& w_b);
CovarianceSolution achievable_scheme_nosecret(const SystemConfig& cfg, const GramMatrix& w_b);
CovarianceSolution achievable_scheme(Mode mode, const SystemConfig& cfg, const GramMatrix& w_b);

/// Closed-form P_th before water-filling and before any feasibility cap.
double achievable_power_secret(const SystemConfig& cfg);
double achievable_power_nosecret(const SystemConfig& cfg);

struct KktReport {
  std::vector<double> stationarity;  // per mode
  double max_stationarity = 0.0;
  double power_violation = 0.0;        // max(0, tr Q - P)
  double lpd_violation = 0.0;          // max(0, n * constraint - 2 delta^2)
  double power_complementarity = 0.0;  // |lambda (P - tr Q)|
  double lpd_complementarity = 0.0;    // |eta (2 delta^2 / n - constraint)|

  double max() const;
};

KktReport kkt_residual(const CovarianceSolution& sol, const SystemConfig& cfg, const GramMatrix& w_b);

}  // namespace covertmimo
