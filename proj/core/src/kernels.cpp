#include "orthonewton/kernels.hpp"

#include <array>
#include <cmath>
#include <string>

#include "orthonewton/errors.hpp"

namespace orthonewton {

namespace {

// Diagonal Pade(8,8) coefficients of exp: c_k = (2m-k)! m! / ((2m)! k! (m-k)!).
constexpr int kPadeOrder = 8;

constexpr std::array<double, kPadeOrder + 1> pade_coefficients() {
  std::array<double, kPadeOrder + 1> c{};
  c[0] = 1.0;
  for (int k = 1; k <= kPadeOrder; ++k) {
    c[k] = c[k - 1] * static_cast<double>(kPadeOrder - k + 1) /
           (static_cast<double>(k) * static_cast<double>(2 * kPadeOrder - k + 1));
  }
  return c;
}

constexpr auto kPade = pade_coefficients();

void normalize_signs(SvdFactors& f) {
  for (Index j = 0; j < f.left.cols(); ++j) {
    const double scale = f.left.col(j).cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    for (Index i = 0; i < f.left.rows(); ++i) {
      const double v = f.left(i, j);
      if (std::abs(v) > 1e-12 * scale) {
        if (v < 0.0) {
          f.left.col(j) *= -1.0;
          f.right.col(j) *= -1.0;
        }
        break;
      }
    }
  }
}

}  // namespace

void require_finite(const Eigen::Ref<const Matrix>& a, const char* what) {
  if (!a.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entry in input matrix");
  }
}

SvdFactors thin_svd(const Eigen::Ref<const Matrix>& a) {
  require_finite(a, "thin_svd");
  if (a.rows() < a.cols()) {
    throw InputError("thin_svd: expected rows >= cols, got " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()));
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  normalize_signs(f);
  return f;
}

QrFactors qr_positive(const Eigen::Ref<const Matrix>& a) {
  require_finite(a, "qr_positive");
  const Index m = a.rows();
  const Index n = a.cols();
  if (m < n) {
    throw InputError("qr_positive: expected rows >= cols");
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  QrFactors out;
  out.q = qr.householderQ() * Matrix::Identity(m, n);
  out.r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

  const double norm = a.norm();
  for (Index j = 0; j < n; ++j) {
    const double pivot = out.r(j, j);
    if (!(std::abs(pivot) > 1e-14 * norm)) {
      throw FactorizationError("qr_positive: rank deficient at column " + std::to_string(j), j);
    }
    if (pivot < 0.0) {
      out.r.row(j) *= -1.0;
      out.q.col(j) *= -1.0;
    }
  }
  return out;
}

SymmetricEigen sym_eig(const Eigen::Ref<const Matrix>& s) {
  require_finite(s, "sym_eig");
  if (s.rows() != s.cols()) {
    throw InputError("sym_eig: matrix is not square");
  }
  const double asym = (s - s.transpose()).norm();
  if (asym > 1e-12 * s.norm()) {
    throw InputError("sym_eig: matrix is not symmetric (||S - S^T||_F = " + std::to_string(asym) +
                     ")");
  }
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw FactorizationError("sym_eig: eigensolver did not converge", -1);
  }
  return {eig.eigenvalues(), eig.eigenvectors()};
}

Matrix matrix_exp(const Eigen::Ref<const Matrix>& w) {
  require_finite(w, "matrix_exp");
  if (w.rows() != w.cols()) {
    throw InputError("matrix_exp: matrix is not square");
  }
  const Index n = w.rows();
  const double norm1 = w.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  }
  const Matrix a = w / std::ldexp(1.0, squarings);

  // Even and odd parts of the Pade numerator: N = E + O, D = E - O.
  Matrix even = kPade[0] * Matrix::Identity(n, n);
  Matrix odd = Matrix::Zero(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int k = 1; k <= kPadeOrder; ++k) {
    power = power * a;
    if (k % 2 == 0) {
      even += kPade[k] * power;
    } else {
      odd += kPade[k] * power;
    }
  }
  Matrix result = (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) {
    result = result * result;
  }
  return result;
}

Vector solve_spd(const Eigen::Ref<const Matrix>& l, const Eigen::Ref<const Vector>& b) {
  return SpdSolver(l).solve(b);
}

SpdSolver::SpdSolver(const Matrix& l) {
  require_finite(l, "solve_spd");
  if (l.rows() != l.cols()) {
    throw InputError("solve_spd: matrix is not square");
  }
  llt_.compute(l);
  if (llt_.info() != Eigen::Success) {
    throw FactorizationError("solve_spd: matrix is not positive definite", -1);
  }
}

Vector SpdSolver::solve(const Eigen::Ref<const Vector>& b) const {
  if (b.size() != llt_.rows()) {
    throw InputError("solve_spd: right-hand side has wrong length");
  }
  return llt_.solve(b);
}

double orthonormality_residual(const Eigen::Ref<const Matrix>& x) {
  return (x.transpose() * x - Matrix::Identity(x.cols(), x.cols())).norm();
}

}  // namespace orthonewton
