#include "orthonewton/retractions.hpp"

#include <cmath>

#include "orthonewton/errors.hpp"

namespace orthonewton {

RetractionKind RetractionKind::ga_pade(int numerator_order, int denominator_order) {
  if (numerator_order != denominator_order) {
    throw ConfigError("ga-pade: mixed orders (" + std::to_string(numerator_order) + "," +
                          std::to_string(denominator_order) + ") do not preserve orthogonality",
                      "retraction");
  }
  switch (numerator_order) {
    case 2:
      return RetractionKind(RetractionFamily::ga_pade, {1.0 / 12.0});
    case 3:
      return RetractionKind(RetractionFamily::ga_pade, {1.0 / 10.0, 1.0 / 120.0});
    default:
      throw ConfigError("ga-pade: order must be 2 or 3", "retraction");
  }
}

RetractionKind RetractionKind::ga_custom(std::vector<double> coefficients) {
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw ConfigError("ga-custom: non-finite coefficient", "retraction");
  }
  return RetractionKind(RetractionFamily::ga_custom, std::move(coefficients));
}

RetractionKind RetractionKind::parse(std::string_view name) {
  if (name == "qr") return qr();
  if (name == "pd") return pd();
  if (name == "wy") return wy();
  if (name == "ga-pade2") return ga_pade(2);
  if (name == "ga-pade3") return ga_pade(3);
  if (name == "geodesic") return geodesic();
  throw ConfigError("unknown retraction '" + std::string(name) +
                        "' (expected qr, pd, wy, ga-pade2, ga-pade3 or geodesic)",
                    "retraction");
}

std::string RetractionKind::name() const {
  switch (family_) {
    case RetractionFamily::qr:
      return "qr";
    case RetractionFamily::pd:
      return "pd";
    case RetractionFamily::wy:
      return "wy";
    case RetractionFamily::geodesic:
      return "geodesic";
    case RetractionFamily::ga_pade:
      return coefficients_.size() == 1 ? "ga-pade2" : "ga-pade3";
    case RetractionFamily::ga_custom:
      return "ga-custom";
  }
  return "unknown";
}

std::vector<RetractionKind> named_retractions() {
  return {RetractionKind::qr(),         RetractionKind::pd(),         RetractionKind::wy(),
          RetractionKind::ga_pade(2),   RetractionKind::ga_pade(3),   RetractionKind::geodesic()};
}

Matrix SkewGenerator::apply(const Matrix& x) const {
  return d_ * (u_.transpose() * x) - u_ * (d_.transpose() * x);
}

Matrix SkewGenerator::dense() const { return d_ * u_.transpose() - u_ * d_.transpose(); }

double SkewGenerator::frobenius_norm() const {
  // ||W||_F^2 = 2 tr(D^T D U^T U) - 2 tr((U^T D)^2).
  const Matrix uu = u_.transpose() * u_;
  const Matrix dd = d_.transpose() * d_;
  const Matrix ud = u_.transpose() * d_;
  const double sq = 2.0 * inner(dd, uu) - 2.0 * inner(ud, ud.transpose());
  return std::sqrt(std::max(0.0, sq));
}

GaCorrection GaCorrection::polynomial(std::vector<double> coefficients) {
  return GaCorrection(std::move(coefficients), false);
}

GaCorrection GaCorrection::half_exponential() { return GaCorrection({}, true); }

namespace {

// Coefficient block B(s) with f(W) = I + Y B X^T for the resolvent factors.
// sign = +1 gives the numerator I + t/2 W + P, sign = -1 the denominator
// I - t/2 W + P^T (P^T(W) = P(-W) for real polynomial or exponential P).
Matrix factor_block(const Matrix& k, double t, double sign, const GaCorrection& p) {
  const Index m = k.rows();
  const double s = sign * t;
  if (p.is_exponential()) {
    // e^{(s/2) W} = I + Y [ (s/2) phi1((s/2) K) ] X^T, read off an augmented exponential.
    const double h = 0.5 * s;
    Matrix aug = Matrix::Zero(2 * m, 2 * m);
    aug.topLeftCorner(m, m) = h * k;
    aug.topRightCorner(m, m) = h * Matrix::Identity(m, m);
    return matrix_exp(aug).topRightCorner(m, m);
  }
  Matrix block = 0.5 * s * Matrix::Identity(m, m);
  Matrix power = k;  // K^{i+1}
  double scale = t * t;
  for (double c : p.coefficients()) {
    block += c * scale * power;
    power = power * k;
    scale *= s;
  }
  return block;
}

StiefelPoint retract_qr(const Matrix& u, const Matrix& d, double t) {
  return StiefelPoint::unchecked(qr_positive(u + t * d).q);
}

StiefelPoint retract_pd(const Matrix& u, const Matrix& d, double t) {
  const Matrix y = u + t * d;
  const SymmetricEigen eig = sym_eig(y.transpose() * y);
  const Vector inv_sqrt = eig.values.array().rsqrt().matrix();
  return StiefelPoint::unchecked(y * (eig.vectors * inv_sqrt.asDiagonal() *
                                      eig.vectors.transpose()));
}

StiefelPoint retract_wy(const Matrix& u, const Matrix& d, double t) {
  const Index n = u.cols();
  const Matrix dtd = d.transpose() * d;
  const Matrix m = Matrix::Identity(n, n) + 0.25 * t * t * dtd;
  const auto lu = m.partialPivLu();
  return StiefelPoint::unchecked(u + t * (d * lu.inverse()) - 0.5 * t * t * (u * lu.solve(dtd)));
}

}  // namespace

StiefelPoint ga_resolvent(const StiefelPoint& u, const GrassmannTangent& d, double t,
                          const GaCorrection& p) {
  if (!d.base().same_as(u)) {
    throw InputError("ga_resolvent: tangent vector is not based at the given point");
  }
  if (t == 0.0) return u;
  const Matrix& um = u.matrix();
  const Matrix& dm = d.matrix();
  const Index n = um.cols();

  // W = Y X^T with Y = [D, U], X = [U, -D]; polynomials in W reduce to K = X^T Y.
  Matrix y(um.rows(), 2 * n);
  y << dm, um;
  Matrix x(um.rows(), 2 * n);
  x << um, -dm;
  const Matrix k = x.transpose() * y;

  const Matrix num = factor_block(k, t, 1.0, p);
  const Matrix den = factor_block(k, t, -1.0, p);

  const Matrix xu = x.transpose() * um;
  const Matrix v = um + y * (num * xu);
  const Matrix xv = xu + k * (num * xu);

  // Woodbury: (I + Y B X^T)^{-1} = I - Y B (I + K B)^{-1} X^T.
  const Matrix inner_system = Matrix::Identity(2 * n, 2 * n) + k * den;
  const auto lu = inner_system.partialPivLu();
  if (!(lu.rcond() > 1e-12)) {
    throw StepTooLargeError("ga_resolvent: reduced resolvent is singular at t = " +
                            std::to_string(t));
  }
  return StiefelPoint::unchecked(v - y * (den * lu.solve(xv)));
}

StiefelPoint retract(const RetractionKind& kind, const StiefelPoint& u, const GrassmannTangent& d,
                     double t) {
  if (!d.base().same_as(u)) {
    throw InputError("retract: tangent vector is not based at the given point");
  }
  if (!std::isfinite(t)) throw InputError("retract: step is not finite");
  if (t < 0.0) throw ContractViolation("retract: step must be non-negative");
  if (t == 0.0) return u;
  switch (kind.family()) {
    case RetractionFamily::qr:
      return retract_qr(u.matrix(), d.matrix(), t);
    case RetractionFamily::pd:
      return retract_pd(u.matrix(), d.matrix(), t);
    case RetractionFamily::wy:
      return retract_wy(u.matrix(), d.matrix(), t);
    case RetractionFamily::ga_pade:
    case RetractionFamily::ga_custom:
      return ga_resolvent(u, d, t, GaCorrection::polynomial(kind.coefficients()));
    case RetractionFamily::geodesic:
      return geodesic(u, d, t);
  }
  throw InputError("retract: unknown retraction kind");
}

}  // namespace orthonewton
