#pragma once

// Dense primitives shared by every other module. All routines are pure
// functions of their arguments and fix a deterministic sign/ordering
// convention so downstream geometry is reproducible.

#include <Eigen/Dense>

namespace orthonewton {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thin SVD A = left * diag(singular) * right^T.
///
/// Singular values are non-increasing. Each left column is normalized so its
/// first entry of non-negligible magnitude is positive; the matching right
/// column absorbs the sign.
struct SvdFactors {
  Matrix left;
  Vector singular;
  Matrix right;
};

struct QrFactors {
  Matrix q;
  Matrix r;
};

struct SymmetricEigen {
  Vector values;  // ascending
  Matrix vectors;
};

/// Throws InputError if any entry is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& a, const char* what);

/// Requires rows >= cols.
SvdFactors thin_svd(const Eigen::Ref<const Matrix>& a);

/// A = QR with R upper triangular and strictly positive diagonal.
/// Throws FactorizationError naming the first column whose diagonal pivot is
/// below 1e-14 * ||A||_2.
QrFactors qr_positive(const Eigen::Ref<const Matrix>& a);

SymmetricEigen sym_eig(const Eigen::Ref<const Matrix>& s);

/// e^W by scaling and squaring around a diagonal Pade(8,8) core.
Matrix matrix_exp(const Eigen::Ref<const Matrix>& w);

/// Solves L x = b for symmetric positive definite L.
Vector solve_spd(const Eigen::Ref<const Matrix>& l, const Eigen::Ref<const Vector>& b);

/// Cached Cholesky factor for repeated SPD solves against one matrix.
class SpdSolver {
 public:
  explicit SpdSolver(const Matrix& l);
  Vector solve(const Eigen::Ref<const Vector>& b) const;
  Index size() const { return llt_.rows(); }

 private:
  Eigen::LLT<Matrix> llt_;
};

/// Frobenius inner product tr(A^T B).
inline double inner(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  return (a.array() * b.array()).sum();
}

/// ||X^T X - I||_F.
double orthonormality_residual(const Eigen::Ref<const Matrix>& x);

}  // namespace orthonewton
