#include "orthonewton/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "orthonewton/errors.hpp"

namespace orthonewton {

namespace {

void require_base(const StiefelPoint& u, const GrassmannTangent& d, const char* what) {
  if (!d.base().same_as(u)) {
    throw InputError(std::string(what) + ": tangent vector is not based at the given point");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

StiefelPoint::StiefelPoint(Matrix u) : u_(std::make_shared<const Matrix>(std::move(u))) {
  require_finite(*u_, "StiefelPoint");
  if (u_->rows() < u_->cols() || u_->cols() < 1) {
    throw InputError("StiefelPoint: expected n_g >= n >= 1");
  }
  const double residual = orthonormality_residual(*u_);
  if (residual > 1e-12 * std::sqrt(static_cast<double>(u_->cols()))) {
    throw InputError("StiefelPoint: columns are not orthonormal (residual " +
                     std::to_string(residual) + ")");
  }
}

StiefelPoint::StiefelPoint(Matrix u, Unchecked)
    : u_(std::make_shared<const Matrix>(std::move(u))) {}

StiefelPoint StiefelPoint::unchecked(Matrix u) { return StiefelPoint(std::move(u), Unchecked{}); }

StiefelPoint StiefelPoint::orthonormalized(const Matrix& a) {
  return StiefelPoint(qr_positive(a).q, Unchecked{});
}

bool StiefelPoint::same_as(const StiefelPoint& other) const {
  if (u_ == other.u_) return true;
  return u_->rows() == other.u_->rows() && u_->cols() == other.u_->cols() && *u_ == *other.u_;
}

GrassmannTangent::GrassmannTangent(StiefelPoint base, Matrix w)
    : base_(std::move(base)), w_(std::move(w)) {
  require_finite(w_, "GrassmannTangent");
  require_same_shape(base_.matrix(), w_, "GrassmannTangent");
  const double off = (base_.matrix().transpose() * w_).norm();
  if (off > 1e-10 * std::max(1.0, w_.norm())) {
    throw InputError("GrassmannTangent: U^T W is not zero (||U^T W||_F = " + std::to_string(off) +
                     ")");
  }
}

GrassmannTangent::GrassmannTangent(StiefelPoint base, Matrix w, Unchecked)
    : base_(std::move(base)), w_(std::move(w)) {}

GrassmannTangent GrassmannTangent::unchecked(StiefelPoint base, Matrix w) {
  return GrassmannTangent(std::move(base), std::move(w), Unchecked{});
}

GrassmannTangent GrassmannTangent::zero(const StiefelPoint& base) {
  return GrassmannTangent(base, Matrix::Zero(base.ambient_dim(), base.frame_width()), Unchecked{});
}

GrassmannTangent project_tangent(const StiefelPoint& u, const Matrix& y) {
  require_same_shape(u.matrix(), y, "project_tangent");
  const Matrix& um = u.matrix();
  return GrassmannTangent::unchecked(u, y - um * (um.transpose() * y));
}

GeodesicPath::GeodesicPath(const GrassmannTangent& d) : d_(d), svd_(thin_svd(d.matrix())) {}

StiefelPoint GeodesicPath::at(double t) const {
  const StiefelPoint& u = d_.base();
  if (t == 0.0) return u;
  if (!std::isfinite(t)) throw InputError("geodesic: step is not finite");
  const Vector st = svd_.singular * t;
  const Vector c = st.array().cos().matrix();
  const Vector s = st.array().sin().matrix();
  const Matrix& b = svd_.right;
  Matrix out = (u.matrix() * b) * c.asDiagonal() * b.transpose() +
               svd_.left * s.asDiagonal() * b.transpose();
  return StiefelPoint::unchecked(std::move(out));
}

GrassmannTangent GeodesicPath::transport(double t, const GrassmannTangent& x) const {
  require_base(d_.base(), x, "parallel_transport");
  if (t == 0.0) return x;
  const Vector st = svd_.singular * t;
  const Vector c = st.array().cos().matrix();
  const Vector s = st.array().sin().matrix();
  const Matrix& a = svd_.left;
  const Matrix& b = svd_.right;
  const Matrix& xm = x.matrix();
  // A^T X is the only n_g-sized contraction needed.
  const Matrix at_x = a.transpose() * xm;
  Matrix out = -(d_.base().matrix() * b) * s.asDiagonal() * at_x +
               a * (c.array() - 1.0).matrix().asDiagonal() * at_x + xm;
  return GrassmannTangent::unchecked(at(t), std::move(out));
}

StiefelPoint geodesic(const StiefelPoint& u, const GrassmannTangent& d, double t) {
  require_base(u, d, "geodesic");
  if (t == 0.0) return u;
  return GeodesicPath(d).at(t);
}

GrassmannTangent parallel_transport(const StiefelPoint& u, const GrassmannTangent& d, double t,
                                    const GrassmannTangent& x) {
  require_base(u, d, "parallel_transport");
  require_base(u, x, "parallel_transport");
  if (t == 0.0) return x;
  return GeodesicPath(d).transport(t, x);
}

PrincipalAngles principal_angles(const StiefelPoint& u, const StiefelPoint& v) {
  require_same_shape(u.matrix(), v.matrix(), "principal_angles");
  const Matrix& um = u.matrix();
  const Matrix& vm = v.matrix();
  const Matrix overlap = um.transpose() * vm;
  const SvdFactors svd = thin_svd(overlap);

  // Y^T Y = I - cos^2, so the columns of Y are mutually orthogonal and their
  // norms are the sines; atan2 keeps small angles accurate.
  const Matrix y = (vm - um * overlap) * svd.right;
  const Index n = um.cols();
  PrincipalAngles out;
  out.angles.resize(n);
  out.overlap_left = svd.left;
  out.overlap_right = svd.right;
  out.complement_left = Matrix::Zero(um.rows(), n);
  for (Index j = 0; j < n; ++j) {
    const double sine = y.col(j).norm();
    const double cosine = std::max(0.0, svd.singular(j));
    out.angles(j) = std::min(std::atan2(sine, cosine), std::numbers::pi / 2);
    if (sine > 0.0) out.complement_left.col(j) = y.col(j) / sine;
  }
  return out;
}

GrassmannLog grassmann_log(const StiefelPoint& u, const StiefelPoint& v) {
  PrincipalAngles pa = principal_angles(u, v);
  const double largest = pa.angles.size() > 0 ? pa.angles.maxCoeff() : 0.0;
  if (largest > std::numbers::pi / 2 - 1e-8) {
    throw CutLocusError("grassmann_log: principal angle " + std::to_string(largest) +
                        " is at the cut locus (pi/2)");
  }
  Matrix d = pa.complement_left * pa.angles.asDiagonal() * pa.overlap_left.transpose();
  const Matrix& um = u.matrix();
  d -= um * (um.transpose() * d);
  return {GrassmannTangent::unchecked(u, std::move(d)), std::move(pa)};
}

double dist_f(const StiefelPoint& u, const StiefelPoint& v) {
  const PrincipalAngles pa = principal_angles(u, v);
  return (2.0 * (0.5 * pa.angles.array()).sin()).matrix().norm();
}

double dist_geo(const StiefelPoint& u, const StiefelPoint& v) {
  return principal_angles(u, v).angles.norm();
}

}  // namespace orthonewton
