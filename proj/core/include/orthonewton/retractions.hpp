#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "orthonewton/geometry.hpp"

namespace orthonewton {

enum class RetractionFamily { qr, pd, wy, ga_pade, ga_custom, geodesic };

/// Immutable selector for one member of the retraction family.
///
/// GA members are resolvent maps
///   (I - t/2 W + P^T)^{-1} (I + t/2 W + P) U,   W = D U^T - U D^T,
/// with P(t, W) = t^2 sum_i c_i (t W)^i W^2. Diagonal Pade(k,k) orders 2 and 3
/// are available by name; mixed orders do not preserve orthogonality and are
/// rejected.
class RetractionKind {
 public:
  static RetractionKind qr() { return RetractionKind(RetractionFamily::qr, {}); }
  static RetractionKind pd() { return RetractionKind(RetractionFamily::pd, {}); }
  static RetractionKind wy() { return RetractionKind(RetractionFamily::wy, {}); }
  static RetractionKind geodesic() { return RetractionKind(RetractionFamily::geodesic, {}); }
  /// Pade(p, q) approximant of the exponential; requires p == q in {2, 3}.
  static RetractionKind ga_pade(int numerator_order, int denominator_order);
  static RetractionKind ga_pade(int order) { return ga_pade(order, order); }
  static RetractionKind ga_custom(std::vector<double> coefficients);

  /// "qr" | "pd" | "wy" | "ga-pade2" | "ga-pade3" | "geodesic". Throws ConfigError.
  static RetractionKind parse(std::string_view name);

  RetractionFamily family() const { return family_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  std::string name() const;

  friend bool operator==(const RetractionKind&, const RetractionKind&) = default;

 private:
  RetractionKind(RetractionFamily family, std::vector<double> coefficients)
      : family_(family), coefficients_(std::move(coefficients)) {}
  RetractionFamily family_;
  std::vector<double> coefficients_;
};

/// All retraction kinds addressable by configuration string.
std::vector<RetractionKind> named_retractions();

/// W = D U^T - U D^T kept in factored form; never materialized at n_g x n_g
/// except on request.
class SkewGenerator {
 public:
  explicit SkewGenerator(const GrassmannTangent& d) : d_(d.matrix()), u_(d.base().matrix()) {}

  /// W X = D (U^T X) - U (D^T X).
  Matrix apply(const Matrix& x) const;
  Matrix dense() const;
  double frobenius_norm() const;

 private:
  Matrix d_;
  Matrix u_;
};

/// The polynomial or exponential correction P(t, W) of a GA retraction.
class GaCorrection {
 public:
  /// P = t^2 sum_i c_i (t W)^i W^2.
  static GaCorrection polynomial(std::vector<double> coefficients);
  /// P = e^{t W / 2} - I - t W / 2, which reproduces the geodesic.
  static GaCorrection half_exponential();

  bool is_exponential() const { return exponential_; }
  const std::vector<double>& coefficients() const { return coefficients_; }

 private:
  GaCorrection(std::vector<double> c, bool exponential)
      : coefficients_(std::move(c)), exponential_(exponential) {}
  std::vector<double> coefficients_;
  bool exponential_;
};

/// GA resolvent evaluated through a 2n x 2n reduced system. Throws
/// StepTooLargeError if the reduced resolvent is numerically singular.
StiefelPoint ga_resolvent(const StiefelPoint& u, const GrassmannTangent& d, double t,
                          const GaCorrection& p);

/// ortho(U, D, t). Requires t >= 0 and D based at U; returns U exactly at t = 0.
StiefelPoint retract(const RetractionKind& kind, const StiefelPoint& u, const GrassmannTangent& d,
                     double t);

}  // namespace orthonewton
