#pragma once

#include <functional>
#include <string>
#include <vector>

#include "orthonewton/energy.hpp"
#include "orthonewton/retractions.hpp"

namespace orthonewton {

enum class SolverKind { newton_backtracking, newton_adaptive, gradient };

enum class SigmaMode {
  fixed,            // sigma_n = sigma
  residual_scaled,  // sigma_n = min(sigma, ||grad_G E(U_n)||_F)
};

/// Tunables of the outer Newton loops, the inner CG direction solver and the
/// step size rules. The defaults cap the inner solver at three iterations.
struct SolverConfig {
  double epsilon = 1e-12;  // stop when ||grad_G E||_F <= epsilon
  double q = 0.5;          // backtracking factor
  double eta = 1e-4;       // sufficient decrease constant
  double gamma1 = 0.1;     // inner CG restart threshold
  double gamma2 = 1e-4;    // inner CG descent constant
  double sigma = 0.4;      // inexactness parameter
  SigmaMode sigma_mode = SigmaMode::fixed;
  int inner_cap = 3;
  double t_min = 1e-2;  // adaptive step floor
  double alpha = 0.5;   // exponent in theta_n
  int max_outer = 10000;
  int max_backtracks = 50;
  RetractionKind retraction = RetractionKind::qr();
  HessianMode hessian_mode = HessianMode::approx;

  /// Throws ConfigError naming the offending field. The admissible range of
  /// eta depends on the solver: (0, 1/4) for Newton with backtracking, (0, 1/2)
  /// otherwise.
  void validate(SolverKind kind) const;
};

struct IterationRecord {
  int index = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // step taken from this iterate; 0 on the final row
  int backtracks = 0;
  int inner_iters = 0;
  double elapsed_s = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

enum class SolveStatus { converged, max_iter, stalled };

std::string to_string(SolverKind kind);
std::string to_string(SolveStatus status);
SolverKind parse_solver_kind(const std::string& name);
SolveStatus parse_solve_status(const std::string& name);

struct SolveResult {
  StiefelPoint point;
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::max_iter;
  int reorthonormalizations = 0;
  int steepest_fallbacks = 0;  // outer iterations where the inner direction was not descent

  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
};

/// Everything about one accepted outer step, for telemetry and independent
/// verification by callers.
struct StepEvent {
  int index;
  const StiefelPoint& from;
  const GrassmannTangent& direction;
  double step;
  double slope;  // <grad_G E(U_n), D_n>
  const StiefelPoint& to;
};

using StepObserver = std::function<void(const StepEvent&)>;

/// -<g, D> / Hess[D, D]. Throws DegenerateCurvatureError if Hess[D, D] <= 0.
double hessian_step(const LocalDerivatives& local, const GrassmannTangent& d);
double hessian_step(const EnergyModel& model, const StiefelPoint& u, const GrassmannTangent& d,
                    HessianMode mode = HessianMode::exact);

/// (-eta <g, D> / ||D||_F)^{1 / (1 + alpha)}. Requires <g, D> < 0.
double theta_schedule(double slope, double direction_norm, double eta, double alpha);
double theta_schedule(const LocalDerivatives& local, const GrassmannTangent& d, double eta,
                      double alpha);

/// Scalar inputs of the adaptive step rule.
struct StepQuantities {
  double slope;      // <g, D>, must be negative
  double curvature;  // Hess[D, D]
  double direction_norm;
};

/// Adaptive step: t = min(max(t_init, t_min), theta / ||D||); if the
/// second-order estimator zeta(t) falls below eta, t is replaced by the
/// quadratic-model minimizer (capped by theta / ||D||) or by theta / ||D||
/// under non-positive curvature. Throws ContractViolation for non-descent D.
double adaptive_step(const StepQuantities& s, double t_init, double t_min, double eta,
                     double theta);
double adaptive_step(const LocalDerivatives& local, const GrassmannTangent& d, double t_init,
                     double t_min, double eta, double theta);

struct InnerResult {
  GrassmannTangent direction;
  int iterations = 0;
  double residual_ratio = 0.0;  // ||Hess[D] + g||_F / ||g||_F
  bool converged = false;       // residual_ratio <= sigma_n
};

/// Approximate Newton direction from a Stiefel CG run on
///   Ebar(U) = <g, (I - U_n U_n^T) U> + 1/2 Hess[(I - U_n U_n^T) U, (I - U_n U_n^T) U],
/// started at U_n. Returns D = (I - U_n U_n^T) U^(k) for the best iterate.
InnerResult inner_direction_cg(const LocalDerivatives& local, double sigma_n,
                               const SolverConfig& cfg);

/// sigma_n per the configured mode.
double inexactness(const SolverConfig& cfg, double grad_norm);

SolveResult newton_backtracking(const EnergyModel& model, const StiefelPoint& u0,
                                const SolverConfig& cfg, const StepObserver& observer = {});

SolveResult newton_adaptive(const EnergyModel& model, const StiefelPoint& u0,
                            const SolverConfig& cfg, const StepObserver& observer = {});

/// Steepest descent with Hessian-based initial step and Armijo backtracking.
SolveResult gradient_baseline(const EnergyModel& model, const StiefelPoint& u0,
                              const SolverConfig& cfg, const StepObserver& observer = {});

SolveResult solve(SolverKind kind, const EnergyModel& model, const StiefelPoint& u0,
                  const SolverConfig& cfg, const StepObserver& observer = {});

}  // namespace orthonewton
