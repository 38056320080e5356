#pragma once

// Grassmann-quotient geometry on orthonormal frames: points are n_g x n
// matrices with orthonormal columns, tangent vectors at [U] are matrices W with
// U^T W = 0.

#include <memory>

#include "orthonewton/kernels.hpp"

namespace orthonewton {

/// An n_g x n frame with orthonormal columns. Cheap to copy; the matrix is
/// shared and immutable.
class StiefelPoint {
 public:
  /// Validates ||U^T U - I||_F <= 1e-12 sqrt(n); throws InputError otherwise.
  explicit StiefelPoint(Matrix u);

  /// Adopts a matrix produced by a retraction without re-checking it.
  static StiefelPoint unchecked(Matrix u);

  /// Q factor (positive-diagonal convention) of an arbitrary full-rank matrix.
  static StiefelPoint orthonormalized(const Matrix& a);

  const Matrix& matrix() const { return *u_; }
  Index ambient_dim() const { return u_->rows(); }
  Index frame_width() const { return u_->cols(); }

  /// True if both refer to the same storage or hold identical entries.
  bool same_as(const StiefelPoint& other) const;

 private:
  struct Unchecked {};
  StiefelPoint(Matrix u, Unchecked);
  std::shared_ptr<const Matrix> u_;
};

/// Tangent vector to the Grassmann manifold at base().
class GrassmannTangent {
 public:
  /// Validates ||U^T W||_F <= 1e-10 max(1, ||W||_F); throws InputError otherwise.
  GrassmannTangent(StiefelPoint base, Matrix w);

  static GrassmannTangent unchecked(StiefelPoint base, Matrix w);
  static GrassmannTangent zero(const StiefelPoint& base);

  const StiefelPoint& base() const { return base_; }
  const Matrix& matrix() const { return w_; }
  double norm() const { return w_.norm(); }

 private:
  struct Unchecked {};
  GrassmannTangent(StiefelPoint base, Matrix w, Unchecked);
  StiefelPoint base_;
  Matrix w_;
};

/// Principal angles between [U] and [V]: U^T V = A cos(Theta) B^T and
/// V - U U^T V = A2 sin(Theta) B^T.
struct PrincipalAngles {
  Vector angles;           // in [0, pi/2], non-decreasing
  Matrix overlap_left;     // A  (n x n)
  Matrix overlap_right;    // B  (n x n)
  Matrix complement_left;  // A2 (n_g x n); zero columns where the angle vanishes
};

struct GrassmannLog {
  GrassmannTangent direction;
  PrincipalAngles angles;
};

/// (I - U U^T) Y.
GrassmannTangent project_tangent(const StiefelPoint& u, const Matrix& y);

/// Geodesic t -> U B cos(S t) B^T + A sin(S t) B^T for D = A S B^T, with the
/// SVD computed once so repeated evaluations along a line search are cheap.
class GeodesicPath {
 public:
  explicit GeodesicPath(const GrassmannTangent& d);

  StiefelPoint at(double t) const;

  /// Parallel mapping of a tangent vector at the start point to the point at(t):
  /// (-U B sin(S t) A^T + A cos(S t) A^T + (I - A A^T)) X.
  GrassmannTangent transport(double t, const GrassmannTangent& x) const;

  const GrassmannTangent& direction() const { return d_; }

 private:
  GrassmannTangent d_;
  SvdFactors svd_;
};

StiefelPoint geodesic(const StiefelPoint& u, const GrassmannTangent& d, double t);

GrassmannTangent parallel_transport(const StiefelPoint& u, const GrassmannTangent& d, double t,
                                    const GrassmannTangent& x);

PrincipalAngles principal_angles(const StiefelPoint& u, const StiefelPoint& v);

/// Tangent D at U with geodesic(U, D, 1) in [V]. Throws CutLocusError when a
/// principal angle lies within 1e-8 of pi/2.
GrassmannLog grassmann_log(const StiefelPoint& u, const StiefelPoint& v);

/// min_P ||U - V P||_F = ||2 sin(Theta / 2)||_F.
double dist_f(const StiefelPoint& u, const StiefelPoint& v);

/// ||Theta||_F.
double dist_geo(const StiefelPoint& u, const StiefelPoint& v);

}  // namespace orthonewton
