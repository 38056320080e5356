#include "orthonewton/properties.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "orthonewton/harness.hpp"

namespace orthonewton {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = normal_(rng_);
    }
    return m;
  }

  StiefelPoint point(Index n_g, Index n) { return StiefelPoint::orthonormalized(gaussian(n_g, n)); }

  GrassmannTangent tangent(const StiefelPoint& u, double scale = 1.0) {
    const Matrix w = gaussian(u.ambient_dim(), u.frame_width());
    const Matrix p = w - u.matrix() * (u.matrix().transpose() * w);
    return GrassmannTangent::unchecked(u, scale * p / p.norm());
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

KohnSham1D desk_ks_model() {
  KohnSham1DParams p;
  p.grid_points = 32;
  p.orbitals = 2;
  p.atoms = {{3.0, 4.0, 0.6}, {5.0, 4.0, 0.6}};
  return KohnSham1D(p);
}

struct Suite {
  std::vector<PropertyOutcome> outcomes;
  const std::function<void(const PropertyOutcome&)>& on_result;

  // Records "measured <= threshold".
  void at_most(std::string name, double measured, double threshold, std::string detail = {}) {
    add({std::move(name), measured <= threshold, measured, threshold, std::move(detail)});
  }
  void at_least(std::string name, double measured, double threshold, std::string detail = {}) {
    add({std::move(name), measured >= threshold, measured, threshold, std::move(detail)});
  }
  void add(PropertyOutcome o) {
    if (on_result) on_result(o);
    outcomes.push_back(std::move(o));
  }
};

void geometry_properties(Suite& suite, Sampler& s) {
  double isometry = 0.0, round_trip = 0.0, equivalence_violation = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const StiefelPoint u = s.point(10, 3);
    const GrassmannTangent d = s.tangent(u, 0.8);
    const GrassmannTangent x = s.tangent(u);
    const GrassmannTangent y = s.tangent(u);
    const GeodesicPath path(d);
    const double t = 0.7;
    const GrassmannTangent tx = path.transport(t, x);
    const GrassmannTangent ty = path.transport(t, y);
    isometry = std::max(isometry, std::abs(inner(tx.matrix(), ty.matrix()) -
                                           inner(x.matrix(), y.matrix())));

    const StiefelPoint v = path.at(1.0);
    const GrassmannLog log = grassmann_log(u, v);
    round_trip = std::max(round_trip, dist_f(geodesic(u, log.direction, 1.0), v));

    const StiefelPoint w = s.point(10, 3);
    const double f = dist_f(u, w);
    const double g = dist_geo(u, w);
    equivalence_violation = std::max({equivalence_violation, f - g, g - 2.0 * f});
  }
  suite.at_most("geometry: transport preserves inner products", isometry, 1e-10);
  suite.at_most("geometry: exp/log round trip", round_trip, 1e-8);
  suite.at_most("geometry: dist_f <= dist_geo <= 2 dist_f", equivalence_violation, 1e-12);
}

void retraction_properties(Suite& suite, Sampler& s) {
  double feasibility = 0.0;
  double worst_first_order = 1e9;
  for (const RetractionKind& kind : named_retractions()) {
    std::vector<double> ts, errs;
    const StiefelPoint u = s.point(12, 3);
    const GrassmannTangent d = s.tangent(u);
    for (double t = 1e-1; t > 1e-3; t *= 0.5) {
      const StiefelPoint r = retract(kind, u, d, t);
      feasibility = std::max(feasibility, orthonormality_residual(r.matrix()));
      ts.push_back(t);
      errs.push_back((r.matrix() - u.matrix() - t * d.matrix()).norm());
    }
    // Agreement with the straight-line update to first order means the error
    // is O(t^2): a slope of at least 1.9 in log-log.
    worst_first_order = std::min(worst_first_order, loglog_slope(ts, errs));
  }
  suite.at_most("retractions: orthonormality residual", feasibility, 1e-11 * std::sqrt(3.0));
  suite.at_least("retractions: agree with U + tD to second order", worst_first_order, 1.9);

  const StiefelPoint u = s.point(12, 3);
  const GrassmannTangent d = s.tangent(u);
  const double wy_gap =
      (ga_resolvent(u, d, 0.6, GaCorrection::polynomial({})).matrix() -
       retract(RetractionKind::wy(), u, d, 0.6).matrix())
          .norm();
  suite.at_most("retractions: GA with P = 0 equals WY", wy_gap, 1e-13);
  const double geo_gap =
      (ga_resolvent(u, d, 0.6, GaCorrection::half_exponential()).matrix() -
       retract(RetractionKind::geodesic(), u, d, 0.6).matrix())
          .norm();
  suite.at_most("retractions: GA with exponential P equals the geodesic", geo_gap, 1e-10);
  suite.at_most("retractions: QR and PD span the same subspace",
                dist_f(retract(RetractionKind::qr(), u, d, 0.6), retract(RetractionKind::pd(), u, d, 0.6)),
                1e-10);
}

void energy_properties(Suite& suite, Sampler& s) {
  const KohnSham1D model = desk_ks_model();
  const StiefelPoint u = s.point(model.ambient_dim(), model.frame_width());
  const Matrix g = model.euclid_grad(u.matrix());
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Matrix e = s.gaussian(u.ambient_dim(), u.frame_width());
    const double fd = (model.value(u.matrix() + h * e) - model.value(u.matrix() - h * e)) / (2 * h);
    worst = std::max(worst, std::abs(fd - inner(g, e)) / std::max(1.0, std::abs(fd)));
  }
  suite.at_most("energy: gradient matches central differences", worst, 1e-6);

  const LocalDerivatives local(model, u, HessianMode::exact);
  const GrassmannTangent d1 = s.tangent(u);
  const GrassmannTangent d2 = s.tangent(u);
  suite.at_most("energy: Hessian bilinear symmetry",
                std::abs(local.hess_form(d1.matrix(), d2.matrix()) -
                         local.hess_form(d2.matrix(), d1.matrix())),
                1e-10);

  const Matrix p = StiefelPoint::orthonormalized(s.gaussian(u.frame_width(), u.frame_width())).matrix();
  const double invariance = std::abs(model.value(u.matrix() * p) - model.value(u.matrix()));
  suite.at_most("energy: invariant under U -> U P", invariance, 1e-10);
}

void solver_properties(Suite& suite, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.model = ModelKind::quadratic;
  cfg.n_g = 12;
  cfg.n = 3;
  cfg.matrix = MatrixKind::diagonal;
  cfg.seed = seed;
  const auto model = make_model(cfg);
  const StiefelPoint u0 = initial_guess(cfg.n_g, cfg.n, cfg.seed);
  const Matrix target = Matrix::Identity(cfg.n_g, cfg.n);

  for (SolverKind kind :
       {SolverKind::newton_backtracking, SolverKind::newton_adaptive, SolverKind::gradient}) {
    double armijo_violation = 0.0;
    double feasibility = 0.0;
    const SolverConfig& sc = cfg.solver_config;
    const auto observer = [&](const StepEvent& e) {
      const double change = model->value_change(e.from.matrix(), e.to.matrix());
      if (kind != SolverKind::newton_adaptive) {
        armijo_violation = std::max(armijo_violation, change - sc.eta * e.step * e.slope);
      } else {
        armijo_violation = std::max(armijo_violation, change);
      }
      feasibility = std::max(feasibility, orthonormality_residual(e.to.matrix()));
    };
    const SolveResult r = solve(kind, *model, u0, sc, observer);
    const std::string name = to_string(kind);
    suite.at_most("solvers: " + name + " reaches the lowest eigenspace",
                  dist_f(r.point, StiefelPoint(target)), 1e-8, to_string(r.status));
    suite.at_most("solvers: " + name + " accepted steps decrease the energy", armijo_violation, 0.0);
    suite.at_most("solvers: " + name + " iterates stay orthonormal", feasibility,
                  1e-10 * std::sqrt(3.0));
  }
}

}  // namespace

std::vector<PropertyOutcome> run_property_suite(
    std::uint64_t seed, const std::function<void(const PropertyOutcome&)>& on_result) {
  Suite suite{{}, on_result};
  Sampler sampler(seed);
  geometry_properties(suite, sampler);
  retraction_properties(suite, sampler);
  energy_properties(suite, sampler);
  solver_properties(suite, seed);
  return suite.outcomes;
}

}  // namespace orthonewton
