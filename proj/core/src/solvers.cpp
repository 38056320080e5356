#include "orthonewton/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "orthonewton/errors.hpp"

namespace orthonewton {

namespace {

void require_open_unit(double value, const char* field) {
  if (!(value > 0.0 && value < 1.0)) {
    throw ConfigError(std::string(field) + " must lie in (0, 1), got " + std::to_string(value),
                      field);
  }
}

constexpr double kDriftTolerance = 1e-8;
constexpr int kStallWindow = 50;
constexpr double kStallDecrease = 1e-16;

}  // namespace

void SolverConfig::validate(SolverKind kind) const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive", "epsilon");
  require_open_unit(q, "q");
  require_open_unit(gamma1, "gamma1");
  require_open_unit(gamma2, "gamma2");
  require_open_unit(sigma, "sigma");
  const double eta_max = kind == SolverKind::newton_backtracking ? 0.25 : 0.5;
  if (!(eta > 0.0 && eta < eta_max)) {
    throw ConfigError("eta must lie in (0, " + std::string(eta_max == 0.25 ? "1/4" : "1/2") +
                          ") for solver " + to_string(kind) + ", got " + std::to_string(eta),
                      "eta");
  }
  if (inner_cap < 1) throw ConfigError("inner_cap must be at least 1", "inner_cap");
  if (!(t_min > 0.0)) throw ConfigError("t_min must be positive", "t_min");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]", "alpha");
  if (max_outer < 0) throw ConfigError("max_outer must be non-negative", "max_outer");
  if (max_backtracks < 0) {
    throw ConfigError("max_backtracks must be non-negative", "max_backtracks");
  }
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::newton_backtracking:
      return "newton-bt";
    case SolverKind::newton_adaptive:
      return "newton-adaptive";
    case SolverKind::gradient:
      return "gradient";
  }
  return "unknown";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
      return "CONVERGED";
    case SolveStatus::max_iter:
      return "MAX_ITER";
    case SolveStatus::stalled:
      return "STALLED";
  }
  return "UNKNOWN";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "newton-bt") return SolverKind::newton_backtracking;
  if (name == "newton-adaptive") return SolverKind::newton_adaptive;
  if (name == "gradient") return SolverKind::gradient;
  throw ConfigError("unknown solver '" + name + "' (expected newton-bt, newton-adaptive or gradient)",
                    "solver");
}

SolveStatus parse_solve_status(const std::string& name) {
  if (name == "CONVERGED") return SolveStatus::converged;
  if (name == "MAX_ITER") return SolveStatus::max_iter;
  if (name == "STALLED") return SolveStatus::stalled;
  throw InputError("unknown solve status '" + name + "'");
}

double inexactness(const SolverConfig& cfg, double grad_norm) {
  return cfg.sigma_mode == SigmaMode::fixed ? cfg.sigma : std::min(cfg.sigma, grad_norm);
}

// ---------------------------------------------------------------------------

double hessian_step(const LocalDerivatives& local, const GrassmannTangent& d) {
  const double curvature = local.hess_form(d.matrix(), d.matrix());
  if (!(curvature > 0.0)) {
    throw DegenerateCurvatureError("hessian_step: non-positive curvature " +
                                   std::to_string(curvature) + " along the direction");
  }
  return -inner(local.grad().matrix(), d.matrix()) / curvature;
}

double hessian_step(const EnergyModel& model, const StiefelPoint& u, const GrassmannTangent& d,
                    HessianMode mode) {
  return hessian_step(LocalDerivatives(model, u, mode), d);
}

double theta_schedule(double slope, double direction_norm, double eta, double alpha) {
  if (!(slope < 0.0)) throw ContractViolation("theta_schedule: direction is not a descent direction");
  if (!(direction_norm > 0.0)) throw ContractViolation("theta_schedule: zero direction");
  return std::pow(-eta * slope / direction_norm, 1.0 / (1.0 + alpha));
}

double theta_schedule(const LocalDerivatives& local, const GrassmannTangent& d, double eta,
                      double alpha) {
  return theta_schedule(inner(local.grad().matrix(), d.matrix()), d.norm(), eta, alpha);
}

double adaptive_step(const StepQuantities& s, double t_init, double t_min, double eta,
                     double theta) {
  if (!(s.slope < 0.0)) throw ContractViolation("adaptive_step: direction is not a descent direction");
  if (!(theta > 0.0)) throw ContractViolation("adaptive_step: theta must be positive");
  if (!(s.direction_norm > 0.0)) throw ContractViolation("adaptive_step: zero direction");
  const double cap = theta / s.direction_norm;
  // Without positive curvature the Hessian-based initial step is undefined.
  if (!(s.curvature > 0.0)) return cap;
  double t = std::min(std::max(t_init, t_min), cap);
  const double zeta = (s.slope + 0.5 * t * s.curvature) / s.slope;
  if (zeta < eta) {
    t = std::min(-s.slope / s.curvature, cap);
  }
  return t;
}

double adaptive_step(const LocalDerivatives& local, const GrassmannTangent& d, double t_init,
                     double t_min, double eta, double theta) {
  const StepQuantities s{inner(local.grad().matrix(), d.matrix()),
                         local.hess_form(d.matrix(), d.matrix()), d.norm()};
  return adaptive_step(s, t_init, t_min, eta, theta);
}

// ---------------------------------------------------------------------------

namespace {

class OuterLoop {
 public:
  OuterLoop(SolverKind kind, const EnergyModel& model, const SolverConfig& cfg,
            const StepObserver& observer)
      : kind_(kind), model_(model), cfg_(cfg), observer_(observer) {}

  SolveResult run(const StiefelPoint& u0) {
    cfg_.validate(kind_);
    if (u0.ambient_dim() != model_.ambient_dim() || u0.frame_width() != model_.frame_width()) {
      throw InputError("solver: initial frame shape does not match the energy model");
    }
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    SolveResult result{u0, {}, SolveStatus::max_iter, 0, 0};
    StiefelPoint u = u0;
    double best_grad = std::numeric_limits<double>::infinity();
    int stall_count = 0;

    for (int n = 0;; ++n) {
      const LocalDerivatives local(model_, u, cfg_.hessian_mode);
      IterationRecord rec;
      rec.index = n;
      rec.energy = local.energy();
      rec.grad_norm = local.grad_norm();

      if (rec.grad_norm <= cfg_.epsilon) {
        result.status = SolveStatus::converged;
      } else if (n >= cfg_.max_outer) {
        result.status = SolveStatus::max_iter;
      } else if (stall_count >= kStallWindow) {
        result.status = SolveStatus::stalled;
      } else {
        const auto step = take_step(n, local, result);
        if (step) {
          rec.step = step->t;
          rec.backtracks = step->backtracks;
          rec.inner_iters = step->inner_iters;
          rec.elapsed_s = elapsed();
          result.records.push_back(rec);

          const double decrease = -model_.value_change(u.matrix(), step->next.matrix());
          const double scale = std::max(std::abs(rec.energy), std::numeric_limits<double>::min());
          if (rec.grad_norm < best_grad) {
            best_grad = rec.grad_norm;
            stall_count = 0;
          } else if (decrease / scale < kStallDecrease) {
            ++stall_count;
          } else {
            stall_count = 0;
          }
          u = step->next;
          continue;
        }
        result.status = SolveStatus::stalled;
      }
      rec.elapsed_s = elapsed();
      result.records.push_back(rec);
      result.point = u;
      return result;
    }
  }

 private:
  struct Step {
    StiefelPoint next;
    double t;
    int backtracks;
    int inner_iters;
  };

  GrassmannTangent direction(const LocalDerivatives& local, SolveResult& result,
                             int& inner_iters) const {
    const GrassmannTangent steepest =
        GrassmannTangent::unchecked(local.point(), -local.grad().matrix());
    if (kind_ == SolverKind::gradient) return steepest;
    const InnerResult inner_result =
        inner_direction_cg(local, inexactness(cfg_, local.grad_norm()), cfg_);
    inner_iters = inner_result.iterations;
    if (!(inner(local.grad().matrix(), inner_result.direction.matrix()) < 0.0)) {
      ++result.steepest_fallbacks;
      return steepest;
    }
    return inner_result.direction;
  }

  StiefelPoint checked_retract(const StiefelPoint& u, const GrassmannTangent& d, double t,
                               SolveResult& result) const {
    StiefelPoint next = retract(cfg_.retraction, u, d, t);
    if (orthonormality_residual(next.matrix()) > kDriftTolerance) {
      next = StiefelPoint::orthonormalized(next.matrix());
      ++result.reorthonormalizations;
    }
    return next;
  }

  std::optional<Step> take_step(int index, const LocalDerivatives& local,
                                SolveResult& result) const {
    int inner_iters = 0;
    const GrassmannTangent d = direction(local, result, inner_iters);
    const StiefelPoint& u = local.point();
    const double slope = inner(local.grad().matrix(), d.matrix());
    const double curvature = local.hess_form(d.matrix(), d.matrix());
    const double dnorm = d.norm();
    const double theta = theta_schedule(slope, dnorm, cfg_.eta, cfg_.alpha);
    const double t_init = curvature > 0.0 ? -slope / curvature : theta / dnorm;

    double t = t_init;
    if (kind_ == SolverKind::newton_adaptive) {
      t = adaptive_step({slope, curvature, dnorm}, t_init, cfg_.t_min, cfg_.eta, theta);
    }

    for (int m = 0; m <= cfg_.max_backtracks; ++m, t *= cfg_.q) {
      std::optional<StiefelPoint> next;
      try {
        next = checked_retract(u, d, t, result);
      } catch (const StepTooLargeError&) {
        continue;
      }
      const bool accept = kind_ == SolverKind::newton_adaptive ||
                          model_.value_change(u.matrix(), next->matrix()) <= cfg_.eta * t * slope;
      if (accept) {
        if (observer_) observer_(StepEvent{index, u, d, t, slope, *next});
        return Step{*next, t, m, inner_iters};
      }
    }
    return std::nullopt;
  }

  SolverKind kind_;
  const EnergyModel& model_;
  const SolverConfig& cfg_;
  const StepObserver& observer_;
};

}  // namespace

SolveResult solve(SolverKind kind, const EnergyModel& model, const StiefelPoint& u0,
                  const SolverConfig& cfg, const StepObserver& observer) {
  return OuterLoop(kind, model, cfg, observer).run(u0);
}

SolveResult newton_backtracking(const EnergyModel& model, const StiefelPoint& u0,
                                const SolverConfig& cfg, const StepObserver& observer) {
  return solve(SolverKind::newton_backtracking, model, u0, cfg, observer);
}

SolveResult newton_adaptive(const EnergyModel& model, const StiefelPoint& u0,
                            const SolverConfig& cfg, const StepObserver& observer) {
  return solve(SolverKind::newton_adaptive, model, u0, cfg, observer);
}

SolveResult gradient_baseline(const EnergyModel& model, const StiefelPoint& u0,
                              const SolverConfig& cfg, const StepObserver& observer) {
  return solve(SolverKind::gradient, model, u0, cfg, observer);
}

}  // namespace orthonewton
