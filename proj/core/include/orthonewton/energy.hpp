#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "orthonewton/geometry.hpp"

namespace orthonewton {

enum class HessianMode {
  exact,   // full second derivative including the density response
  approx,  // Hamiltonian part only
};

/// Smooth energy over frames, invariant under U -> U P for orthogonal P.
/// Derivatives are with respect to the Euclidean (Frobenius) inner product.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual Index ambient_dim() const = 0;
  virtual Index frame_width() const = 0;
  virtual std::string name() const = 0;

  virtual double value(const Matrix& u) const = 0;
  virtual Matrix euclid_grad(const Matrix& u) const = 0;
  virtual Matrix euclid_hess_apply(const Matrix& u, const Matrix& d) const = 0;

  /// Part of the Hessian that is linear in D without density response.
  /// Defaults to the exact Hessian.
  virtual Matrix approx_hess_apply(const Matrix& u, const Matrix& d) const {
    return euclid_hess_apply(u, d);
  }

  /// E(to) - E(from). Overrides form the change of the energy of the spanned
  /// subspaces term by term from to - from, so sufficient-decrease tests stay
  /// meaningful when the change is far below the rounding level of E itself
  /// and unaffected by rounding-level loss of orthonormality.
  virtual double value_change(const Matrix& from, const Matrix& to) const {
    return value(to) - value(from);
  }
};

/// E(U) = 1/2 tr(U^T A U) with A symmetric. Minimizers span the lowest
/// eigenvectors of A, which makes it an exact oracle for the solvers.
class QuadraticTraceModel final : public EnergyModel {
 public:
  QuadraticTraceModel(Matrix a, Index frame_width);

  Index ambient_dim() const override { return a_.rows(); }
  Index frame_width() const override { return n_; }
  std::string name() const override { return "quadratic"; }

  double value(const Matrix& u) const override;
  Matrix euclid_grad(const Matrix& u) const override;
  Matrix euclid_hess_apply(const Matrix& u, const Matrix& d) const override;
  double value_change(const Matrix& from, const Matrix& to) const override;

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
  Index n_;
};

struct Atom {
  double position = 0.0;
  double depth = 1.0;  // well depth (> 0 attracts)
  double width = 1.0;  // Gaussian standard deviation
};

struct KohnSham1DParams {
  Index grid_points = 64;
  Index orbitals = 4;
  double box_length = 8.0;
  std::vector<Atom> atoms;
  double exchange_constant = 0.75 * std::cbrt(3.0 / std::numbers::pi);
  double density_floor = 1e-12;
  bool hartree = true;  // false drops the density-dependent Hartree term
};

/// 1-D finite-difference Kohn-Sham model on n_g interior points of
/// [0, box_length] with Dirichlet ends:
///
///   E(U) = 1/2 tr(U^T L U) + tr(U^T V_ext U) + 1/2 rho^T L^{-1} rho
///          + sum_i rho_i eps_xc(rho_i),
///
/// rho = diag(U U^T), eps_xc(r) = -c_x max(r, floor)^{1/3}. L is the SPD
/// three-point negative Laplacian, so L^{-1} exists. Orbitals are orthonormal
/// in the plain Euclidean inner product.
class KohnSham1D final : public EnergyModel {
 public:
  explicit KohnSham1D(KohnSham1DParams params);

  Index ambient_dim() const override { return params_.grid_points; }
  Index frame_width() const override { return params_.orbitals; }
  std::string name() const override { return "ks1d"; }

  double value(const Matrix& u) const override;
  /// 2 H(U) U.
  Matrix euclid_grad(const Matrix& u) const override;
  /// 2 (H(U) D + 2 Diag(J diag(D U^T)) U).
  Matrix euclid_hess_apply(const Matrix& u, const Matrix& d) const override;
  /// 2 H(U) D.
  Matrix approx_hess_apply(const Matrix& u, const Matrix& d) const override;
  double value_change(const Matrix& from, const Matrix& to) const override;

  /// H(U) X = (1/2 L + Diag(v_ext) + Diag(L^{-1} rho) + Diag(v_xc(rho))) X.
  Matrix hamiltonian_apply(const Matrix& u, const Matrix& x) const;

  const KohnSham1DParams& params() const { return params_; }
  double spacing() const { return spacing_; }
  const Vector& grid() const { return grid_; }
  const Matrix& laplacian() const { return laplacian_; }
  const Vector& external_potential() const { return v_ext_; }

  /// L^{-1} w.
  Vector poisson(const Vector& w) const { return poisson_.solve(w); }
  /// v_xc(rho) = -(4/3) c_x max(rho, floor)^{1/3}.
  Vector xc_potential(const Vector& rho) const;
  /// dv_xc/drho = -(4/9) c_x max(rho, floor)^{-2/3}.
  Vector xc_kernel(const Vector& rho) const;

 private:
  Vector effective_potential(const Vector& rho) const;

  KohnSham1DParams params_;
  double spacing_;
  Vector grid_;
  Matrix laplacian_;
  Vector v_ext_;
  SpdSolver poisson_;
};

/// rho_i = sum_j U_ij^2.
Vector density(const Matrix& u);
inline Vector density(const StiefelPoint& u) { return density(u.matrix()); }

/// Gradient, Sigma = U^T grad E and Grassmann gradient frozen at one point, with
/// the Grassmann Hessian applied on demand:
///   Hess[D] = (I - U U^T) nabla^2 E(U)[D] - D Sigma.
class LocalDerivatives {
 public:
  LocalDerivatives(const EnergyModel& model, StiefelPoint u, HessianMode mode);

  const EnergyModel& model() const { return *model_; }
  const StiefelPoint& point() const { return u_; }
  HessianMode mode() const { return mode_; }
  double energy() const { return energy_; }
  const Matrix& euclid_grad() const { return egrad_; }
  const Matrix& sigma() const { return sigma_; }
  const GrassmannTangent& grad() const { return grad_; }
  double grad_norm() const { return grad_.norm(); }

  /// Hessian applied to a tangent matrix; the result is tangent at point().
  Matrix hess_apply(const Matrix& d) const;
  GrassmannTangent hess(const GrassmannTangent& d) const;
  /// <Hess[d1], d2>.
  double hess_form(const Matrix& d1, const Matrix& d2) const;

 private:
  const EnergyModel* model_;
  StiefelPoint u_;
  HessianMode mode_;
  double energy_;
  Matrix egrad_;
  Matrix sigma_;
  GrassmannTangent grad_;
};

GrassmannTangent grassmann_grad(const EnergyModel& model, const StiefelPoint& u);

GrassmannTangent grassmann_hess_apply(const EnergyModel& model, const StiefelPoint& u,
                                      const GrassmannTangent& d, HessianMode mode);

}  // namespace orthonewton
