// Stiefel conjugate-gradient solver for the Newton subproblem. The Grassmann
// Newton equation Hess[D] = -g is the first-order condition of the quadratic
// model in D; every D in the relevant tangent set is (I - U_n U_n^T) U for some
// frame U, so the model is minimized over frames instead of solving a linear
// system.

#include <cmath>
#include <limits>
#include <optional>

#include "orthonewton/solvers.hpp"

namespace orthonewton {

namespace {

constexpr int kMaxInnerHalvings = 30;

struct SubproblemState {
  Matrix u;       // current frame U^(k)
  Matrix lifted;  // (I - U_n U_n^T) U
  Matrix grad;   // Euclidean gradient g + Hess[lifted]; also the Newton residual
  Matrix sgrad;  // grad - U grad^T U
  double residual = 0.0;
};

class Subproblem {
 public:
  Subproblem(const LocalDerivatives& local) : local_(local), un_(local.point().matrix()) {}

  Matrix project(const Matrix& x) const { return x - un_ * (un_.transpose() * x); }

  SubproblemState evaluate(Matrix u) const {
    SubproblemState s;
    s.lifted = project(u);
    const Matrix hd = local_.hess_apply(s.lifted);
    const Matrix& g = local_.grad().matrix();
    s.grad = g + hd;
    s.sgrad = s.grad - u * (s.grad.transpose() * u);
    s.residual = s.grad.norm();
    s.u = std::move(u);
    return s;
  }

  // Ebar(to) - Ebar(from). Ebar is quadratic in the lifted matrix, so the
  // difference equals <(grad_to + grad_from) / 2, lifted_to - lifted_from>,
  // which keeps its accuracy when the change is far below the size of Ebar.
  static double change(const SubproblemState& from, const SubproblemState& to) {
    return 0.5 * inner(to.grad + from.grad, to.lifted - from.lifted);
  }

  // Second-order form of Ebar on the Stiefel manifold at U = s.u, evaluated at
  // (a, b) = ((I - U_n U_n^T) delta, delta).
  double curvature(const SubproblemState& s, const Matrix& delta) const {
    const Matrix a = project(delta);
    const Matrix& b = delta;
    const Matrix& g = s.grad;
    const Matrix& u = s.u;
    const double hess_term = inner(local_.hess_apply(a), b);
    const Matrix gta = g.transpose() * a;  // n x n
    const Matrix uta = u.transpose() * a;
    const Matrix utb = u.transpose() * b;
    const Matrix gtb = g.transpose() * b;
    // 1/2 tr((G^T a U^T + U^T a G^T) b)
    const double second = 0.5 * ((gta * utb).trace() + (uta * gtb).trace());
    // -1/2 tr((U^T G + G^T U) a^T (I - U U^T) b)
    const Matrix sym = u.transpose() * g + g.transpose() * u;
    const Matrix proj_b = b - u * utb;
    const double third = -0.5 * (sym * (a.transpose() * proj_b)).trace();
    return hess_term + second + third;
  }

 private:
  const LocalDerivatives& local_;
  const Matrix& un_;
};

}  // namespace

InnerResult inner_direction_cg(const LocalDerivatives& local, double sigma_n,
                               const SolverConfig& cfg) {
  const StiefelPoint& base = local.point();
  const double gnorm = local.grad_norm();
  if (gnorm == 0.0) {
    return {GrassmannTangent::zero(base), 0, 0.0, true};
  }

  const Subproblem problem(local);
  SubproblemState state = problem.evaluate(base.matrix());
  Matrix delta = -state.sgrad;
  std::optional<SubproblemState> best;

  int k = 0;
  while (k < cfg.inner_cap) {
    if (k > 0 && state.residual <= sigma_n * gnorm) break;
    const double sg2 = state.sgrad.squaredNorm();
    if (sg2 == 0.0) break;

    double slope = inner(delta, state.sgrad);
    if (slope > 0.0) {
      delta = -delta;
      slope = -slope;
    }
    if (-slope / sg2 < cfg.gamma1) {
      delta = -state.sgrad;
      slope = -sg2;
    }

    const double curv = problem.curvature(state, delta);
    double alpha = curv > 0.0 ? -slope / curv : 1.0 / delta.norm();

    std::optional<SubproblemState> trial;
    for (int h = 0; h <= kMaxInnerHalvings; ++h) {
      SubproblemState candidate = problem.evaluate(qr_positive(state.u + alpha * delta).q);
      if (Subproblem::change(state, candidate) < cfg.gamma2 * alpha * slope) {
        trial = std::move(candidate);
        break;
      }
      alpha *= cfg.q;
    }
    if (!trial) break;

    const double beta = trial->sgrad.squaredNorm() / sg2;
    delta = -trial->sgrad + beta * (delta - trial->u * (trial->u.transpose() * delta));
    state = std::move(*trial);
    ++k;
    if (!best || state.residual < best->residual) best = state;
  }

  if (!best) {
    return {GrassmannTangent::zero(base), k, 1.0, false};
  }
  const double ratio = best->residual / gnorm;
  return {GrassmannTangent::unchecked(base, problem.project(best->lifted)), k, ratio,
          ratio <= sigma_n};
}

}  // namespace orthonewton
