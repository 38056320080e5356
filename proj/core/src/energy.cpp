#include "orthonewton/energy.hpp"

#include <cmath>

#include "orthonewton/errors.hpp"

namespace orthonewton {

namespace {

void require_shape(const Matrix& x, Index rows, Index cols, const char* what) {
  if (x.rows() != rows || x.cols() != cols) {
    throw InputError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " matrix, got " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()));
  }
}

Matrix dirichlet_laplacian(Index n, double h) {
  Matrix l = Matrix::Zero(n, n);
  const double scale = 1.0 / (h * h);
  for (Index i = 0; i < n; ++i) {
    l(i, i) = 2.0 * scale;
    if (i + 1 < n) {
      l(i, i + 1) = -scale;
      l(i + 1, i) = -scale;
    }
  }
  return l;
}

double clamp_floor(double rho, double floor) { return rho > floor ? rho : floor; }

// Two frames V = U + Delta described through their Gram matrices, so that
// changes of subspace functionals are formed from Delta directly instead of
// by subtracting two nearly equal totals.
struct FramePair {
  const Matrix& from;
  Matrix delta;
  Matrix gram_to_inv;  // (V^T V)^{-1}
  Matrix gram_change;  // (V^T V)^{-1} - (U^T U)^{-1}
};

FramePair frame_pair(const Matrix& from, const Matrix& to) {
  const Index n = from.cols();
  const Matrix id = Matrix::Identity(n, n);
  Matrix delta = to - from;
  const Matrix utd = from.transpose() * delta;
  const Matrix dgram = utd + utd.transpose() + delta.transpose() * delta;
  const Matrix from_inv = Eigen::LLT<Matrix>(from.transpose() * from).solve(id);
  Matrix to_inv = Eigen::LLT<Matrix>(to.transpose() * to).solve(id);
  Matrix change = -to_inv * dgram * from_inv;
  return {from, std::move(delta), std::move(to_inv), std::move(change)};
}

// Change of 1/2 tr((X^T X)^{-1} X^T A X) from U to V, given A U and A Delta.
double trace_form_change(const FramePair& p, const Matrix& a_from, const Matrix& a_delta) {
  const Matrix cross = p.delta.transpose() * a_from;
  const Matrix dm = cross + cross.transpose() + p.delta.transpose() * a_delta;
  const Matrix m_from = p.from.transpose() * a_from;
  return 0.5 * ((p.gram_to_inv * dm).trace() + (p.gram_change * m_from).trace());
}

// diag(P_V - P_U) with P_X = X (X^T X)^{-1} X^T.
Vector projector_density_change(const FramePair& p) {
  const Matrix& u = p.from;
  const Matrix dg = p.delta * p.gram_to_inv;
  return ((u * p.gram_change).array() * u.array() + 2.0 * dg.array() * u.array() +
          dg.array() * p.delta.array())
      .rowwise()
      .sum()
      .matrix();
}

}  // namespace

Vector density(const Matrix& u) { return u.rowwise().squaredNorm(); }

// ---------------------------------------------------------------------------

QuadraticTraceModel::QuadraticTraceModel(Matrix a, Index frame_width)
    : a_(std::move(a)), n_(frame_width) {
  require_finite(a_, "QuadraticTraceModel");
  if (a_.rows() != a_.cols()) throw InputError("QuadraticTraceModel: A is not square");
  if ((a_ - a_.transpose()).norm() > 1e-12 * a_.norm()) {
    throw InputError("QuadraticTraceModel: A is not symmetric");
  }
  if (n_ < 1 || n_ > a_.rows()) throw InputError("QuadraticTraceModel: bad frame width");
}

double QuadraticTraceModel::value(const Matrix& u) const {
  require_shape(u, a_.rows(), n_, "QuadraticTraceModel::value");
  return 0.5 * inner(u, a_ * u);
}

Matrix QuadraticTraceModel::euclid_grad(const Matrix& u) const {
  require_shape(u, a_.rows(), n_, "QuadraticTraceModel::euclid_grad");
  return a_ * u;
}

Matrix QuadraticTraceModel::euclid_hess_apply(const Matrix& u, const Matrix& d) const {
  require_shape(u, a_.rows(), n_, "QuadraticTraceModel::euclid_hess_apply");
  require_shape(d, a_.rows(), n_, "QuadraticTraceModel::euclid_hess_apply");
  return a_ * d;
}

double QuadraticTraceModel::value_change(const Matrix& from, const Matrix& to) const {
  require_shape(from, a_.rows(), n_, "QuadraticTraceModel::value_change");
  require_shape(to, a_.rows(), n_, "QuadraticTraceModel::value_change");
  const FramePair p = frame_pair(from, to);
  return trace_form_change(p, a_ * from, a_ * p.delta);
}

// ---------------------------------------------------------------------------

KohnSham1D::KohnSham1D(KohnSham1DParams params)
    : params_(std::move(params)),
      spacing_(params_.box_length / static_cast<double>(params_.grid_points + 1)),
      grid_(Vector::LinSpaced(params_.grid_points, spacing_,
                              params_.box_length - spacing_)),
      laplacian_(dirichlet_laplacian(params_.grid_points, spacing_)),
      v_ext_(Vector::Zero(params_.grid_points)),
      poisson_(laplacian_) {
  if (params_.grid_points < 2) throw InputError("KohnSham1D: need at least two grid points");
  if (params_.orbitals < 1 || params_.orbitals > params_.grid_points) {
    throw InputError("KohnSham1D: orbital count must lie in [1, grid_points]");
  }
  if (!(params_.box_length > 0.0)) throw InputError("KohnSham1D: box_length must be positive");
  if (!(params_.exchange_constant >= 0.0)) {
    throw InputError("KohnSham1D: exchange constant must be non-negative");
  }
  if (!(params_.density_floor > 0.0)) {
    throw InputError("KohnSham1D: density floor must be positive");
  }
  for (const Atom& atom : params_.atoms) {
    if (!(atom.width > 0.0) || !std::isfinite(atom.position) || !std::isfinite(atom.depth)) {
      throw InputError("KohnSham1D: atom needs finite position/depth and positive width");
    }
    const double inv = 1.0 / (2.0 * atom.width * atom.width);
    v_ext_ -= atom.depth * ((grid_.array() - atom.position).square() * (-inv)).exp().matrix();
  }
}

Vector KohnSham1D::xc_potential(const Vector& rho) const {
  const double cx = params_.exchange_constant;
  const double floor = params_.density_floor;
  return rho.unaryExpr([=](double r) { return -(4.0 / 3.0) * cx * std::cbrt(clamp_floor(r, floor)); });
}

Vector KohnSham1D::xc_kernel(const Vector& rho) const {
  const double cx = params_.exchange_constant;
  const double floor = params_.density_floor;
  return rho.unaryExpr([=](double r) {
    const double c = std::cbrt(clamp_floor(r, floor));
    return -(4.0 / 9.0) * cx / (c * c);
  });
}

Vector KohnSham1D::effective_potential(const Vector& rho) const {
  Vector v = v_ext_ + xc_potential(rho);
  if (params_.hartree) v += poisson(rho);
  return v;
}

double KohnSham1D::value(const Matrix& u) const {
  require_shape(u, params_.grid_points, params_.orbitals, "KohnSham1D::value");
  const Vector rho = density(u);
  const double cx = params_.exchange_constant;
  const double floor = params_.density_floor;
  double e = 0.5 * inner(u, laplacian_ * u) + v_ext_.dot(rho);
  if (params_.hartree) e += 0.5 * rho.dot(poisson(rho));
  for (Index i = 0; i < rho.size(); ++i) {
    e -= cx * rho(i) * std::cbrt(clamp_floor(rho(i), floor));
  }
  return e;
}

Matrix KohnSham1D::hamiltonian_apply(const Matrix& u, const Matrix& x) const {
  require_shape(u, params_.grid_points, params_.orbitals, "KohnSham1D::hamiltonian_apply");
  if (x.rows() != params_.grid_points) {
    throw InputError("KohnSham1D::hamiltonian_apply: operand has wrong row count");
  }
  const Vector v = effective_potential(density(u));
  return 0.5 * (laplacian_ * x) + v.asDiagonal() * x;
}

Matrix KohnSham1D::euclid_grad(const Matrix& u) const { return 2.0 * hamiltonian_apply(u, u); }

Matrix KohnSham1D::approx_hess_apply(const Matrix& u, const Matrix& d) const {
  require_shape(d, params_.grid_points, params_.orbitals, "KohnSham1D::approx_hess_apply");
  return 2.0 * hamiltonian_apply(u, d);
}

Matrix KohnSham1D::euclid_hess_apply(const Matrix& u, const Matrix& d) const {
  require_shape(u, params_.grid_points, params_.orbitals, "KohnSham1D::euclid_hess_apply");
  require_shape(d, params_.grid_points, params_.orbitals, "KohnSham1D::euclid_hess_apply");
  const Vector rho = density(u);
  const Vector v = effective_potential(rho);
  const Vector w = (d.array() * u.array()).rowwise().sum().matrix();  // diag(D U^T)
  Vector jw = xc_kernel(rho).cwiseProduct(w);
  if (params_.hartree) jw += poisson(w);
  return 2.0 * (0.5 * (laplacian_ * d) + v.asDiagonal() * d) + 4.0 * (jw.asDiagonal() * u);
}

double KohnSham1D::value_change(const Matrix& from, const Matrix& to) const {
  require_shape(from, params_.grid_points, params_.orbitals, "KohnSham1D::value_change");
  require_shape(to, params_.grid_points, params_.orbitals, "KohnSham1D::value_change");
  const FramePair p = frame_pair(from, to);
  const Vector drho = projector_density_change(p);
  const Vector rho_from = density(from);
  const Vector rho_to = rho_from + drho;

  double de = trace_form_change(p, laplacian_ * from, laplacian_ * p.delta) + v_ext_.dot(drho);
  if (params_.hartree) de += 0.5 * drho.dot(poisson(rho_from + rho_to));

  // a^{4/3} - b^{4/3} = (x - y)(x + y)(x^2 + y^2) with x^3 = a, y^3 = b and
  // x - y = (a - b) / (x^2 + x y + y^2).
  const double cx = params_.exchange_constant;
  const double floor = params_.density_floor;
  for (Index i = 0; i < drho.size(); ++i) {
    const double a = rho_to(i);
    const double b = rho_from(i);
    if (a > floor && b > floor) {
      const double x = std::cbrt(a);
      const double y = std::cbrt(b);
      const double xmy = drho(i) / (x * x + x * y + y * y);
      de -= cx * xmy * (x + y) * (x * x + y * y);
    } else {
      de -= cx * (a * std::cbrt(clamp_floor(a, floor)) - b * std::cbrt(clamp_floor(b, floor)));
    }
  }
  return de;
}

// ---------------------------------------------------------------------------

LocalDerivatives::LocalDerivatives(const EnergyModel& model, StiefelPoint u, HessianMode mode)
    : model_(&model),
      u_(std::move(u)),
      mode_(mode),
      energy_(model.value(u_.matrix())),
      egrad_(model.euclid_grad(u_.matrix())),
      sigma_(u_.matrix().transpose() * egrad_),
      grad_(GrassmannTangent::unchecked(u_, egrad_ - u_.matrix() * sigma_)) {}

Matrix LocalDerivatives::hess_apply(const Matrix& d) const {
  const Matrix& um = u_.matrix();
  Matrix h = mode_ == HessianMode::exact ? model_->euclid_hess_apply(um, d)
                                         : model_->approx_hess_apply(um, d);
  h -= um * (um.transpose() * h);
  h -= d * sigma_;
  return h;
}

GrassmannTangent LocalDerivatives::hess(const GrassmannTangent& d) const {
  if (!d.base().same_as(u_)) {
    throw InputError("grassmann_hess_apply: tangent vector is not based at the given point");
  }
  return GrassmannTangent::unchecked(u_, hess_apply(d.matrix()));
}

double LocalDerivatives::hess_form(const Matrix& d1, const Matrix& d2) const {
  return inner(hess_apply(d1), d2);
}

GrassmannTangent grassmann_grad(const EnergyModel& model, const StiefelPoint& u) {
  const Matrix g = model.euclid_grad(u.matrix());
  const Matrix& um = u.matrix();
  return GrassmannTangent::unchecked(u, g - um * (um.transpose() * g));
}

GrassmannTangent grassmann_hess_apply(const EnergyModel& model, const StiefelPoint& u,
                                      const GrassmannTangent& d, HessianMode mode) {
  return LocalDerivatives(model, u, mode).hess(d);
}

}  // namespace orthonewton
