#include <gtest/gtest.h>

#include "oracles.hpp"
#include "orthonewton/errors.hpp"
#include "orthonewton/retractions.hpp"

namespace on = orthonewton;
using oracle::Mat;

namespace {

Mat e(long n, long i) { return Mat::Identity(n, n).col(i); }

struct Sample {
  on::StiefelPoint u;
  on::GrassmannTangent d;
};

Sample sample(oracle::Rng& rng, long ng, long n, double norm) {
  on::StiefelPoint u(oracle::orthonormal(rng.gaussian(ng, n)));
  on::GrassmannTangent d(u, oracle::random_tangent(rng, u.matrix(), norm));
  return {u, d};
}

Mat skew(const Mat& u, const Mat& d) { return d * u.transpose() - u * d.transpose(); }

// (I - t/2 W + N^T)^{-1} (I + t/2 W + N) U with N = sum_k c_k t^{k+2} W^{k+2}.
Mat dense_ga(const Mat& u, const Mat& d, double t, const std::vector<double>& c) {
  const Mat w = skew(u, d);
  const long ng = u.rows();
  Mat num = Mat::Identity(ng, ng) + 0.5 * t * w;
  Mat den = Mat::Identity(ng, ng) - 0.5 * t * w;
  Mat power = w * w;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double scale = c[k] * std::pow(t, static_cast<double>(k + 2));
    num += scale * power;
    den += scale * power.transpose();
    power = power * w;
  }
  return den.fullPivLu().solve(num * u);
}

}  // namespace

TEST(RetractionKind, ParseAndNames) {
  for (const auto& kind : on::named_retractions()) {
    EXPECT_EQ(on::RetractionKind::parse(kind.name()), kind);
  }
  EXPECT_THROW(on::RetractionKind::parse("cayley"), on::ConfigError);
  EXPECT_THROW(on::RetractionKind::ga_pade(2, 3), on::ConfigError);
  EXPECT_THROW(on::RetractionKind::ga_pade(4), on::ConfigError);
  EXPECT_THROW(on::RetractionKind::ga_custom({1.0, std::nan("")}), on::ConfigError);
}

TEST(SkewGenerator, Identities) {
  oracle::Rng rng(20);
  const auto s = sample(rng, 7, 2, 1.3);
  const on::SkewGenerator w(s.d);
  const Mat dense = w.dense();
  EXPECT_LE((dense + dense.transpose()).norm(), 1e-15);
  EXPECT_LE((dense * s.u.matrix() - s.d.matrix()).norm(), 1e-14);
  EXPECT_NEAR(w.frobenius_norm(), std::sqrt(2.0) * s.d.norm(), 1e-14);
  EXPECT_NEAR(dense.norm(), w.frobenius_norm(), 1e-14);
  const Mat x = rng.gaussian(7, 3);
  EXPECT_LE((w.apply(x) - dense * x).norm(), 1e-14);
}

TEST(Retract, PlanarExamples) {
  const on::StiefelPoint u(e(3, 0));
  const on::GrassmannTangent d(u, e(3, 1));
  const Mat diag = (e(3, 0) + e(3, 1)) / std::sqrt(2.0);
  EXPECT_LE((on::retract(on::RetractionKind::qr(), u, d, 1.0).matrix() - diag).norm(), 1e-15);
  EXPECT_LE((on::retract(on::RetractionKind::pd(), u, d, 1.0).matrix() - diag).norm(), 1e-15);
  EXPECT_LE((on::retract(on::RetractionKind::wy(), u, d, 1.0).matrix() - (0.6 * e(3, 0) + 0.8 * e(3, 1)))
                .norm(),
            1e-15);
  EXPECT_LE((on::retract(on::RetractionKind::geodesic(), u, d, 1.0).matrix() -
             (std::cos(1.0) * e(3, 0) + std::sin(1.0) * e(3, 1)))
                .norm(),
            1e-15);
}

TEST(Retract, ZeroStepAndContract) {
  oracle::Rng rng(21);
  const auto s = sample(rng, 6, 2, 1.0);
  for (const auto& kind : on::named_retractions()) {
    EXPECT_EQ(on::retract(kind, s.u, s.d, 0.0).matrix(), s.u.matrix()) << kind.name();
    EXPECT_THROW(on::retract(kind, s.u, s.d, -0.1), on::ContractViolation) << kind.name();
  }
  const auto other = sample(rng, 6, 2, 1.0);
  EXPECT_THROW(on::retract(on::RetractionKind::qr(), s.u, other.d, 0.1), on::InputError);
}

TEST(Retract, OrthonormalForAllKinds) {
  oracle::Rng rng(22);
  std::vector<on::RetractionKind> kinds = on::named_retractions();
  kinds.push_back(on::RetractionKind::ga_custom({0.05, -0.01, 0.002}));
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = sample(rng, 10, 3, 1.0);
    const double t = rng.uniform(0.0, 2.0);
    for (const auto& kind : kinds) {
      ASSERT_LE(on::orthonormality_residual(on::retract(kind, s.u, s.d, t).matrix()),
                1e-11 * std::sqrt(3.0))
          << kind.name();
    }
  }
}

TEST(Retract, WyAndGaMatchDenseResolvents) {
  oracle::Rng rng(23);
  const auto s = sample(rng, 6, 2, 0.9);
  const double t = 0.7;
  const Mat& u = s.u.matrix();
  const Mat& d = s.d.matrix();
  EXPECT_LE((on::retract(on::RetractionKind::wy(), s.u, s.d, t).matrix() - dense_ga(u, d, t, {})).norm(),
            1e-13);
  // Printed (2,2) form: (I - t/2 W + t^2/12 W^2)^{-1} (I + t/2 W + t^2/12 W^2) U.
  const Mat w = skew(u, d);
  const Mat id = Mat::Identity(6, 6);
  const Mat pade22 = (id - t / 2 * w + t * t / 12 * w * w).fullPivLu().solve(
      (id + t / 2 * w + t * t / 12 * w * w) * u);
  EXPECT_LE((on::retract(on::RetractionKind::ga_pade(2), s.u, s.d, t).matrix() - pade22).norm(), 1e-13);
  const Mat pade33 = (id - t / 2 * w + t * t / 10 * w * w - t * t * t / 120 * w * w * w)
                         .fullPivLu()
                         .solve((id + t / 2 * w + t * t / 10 * w * w + t * t * t / 120 * w * w * w) * u);
  EXPECT_LE((on::retract(on::RetractionKind::ga_pade(3), s.u, s.d, t).matrix() - pade33).norm(), 1e-13);
  const std::vector<double> c = {0.05, -0.01};
  EXPECT_LE((on::retract(on::RetractionKind::ga_custom(c), s.u, s.d, t).matrix() - dense_ga(u, d, t, c))
                .norm(),
            1e-13);
}

TEST(Retract, QrAndPdMatchDefinitions) {
  oracle::Rng rng(24);
  const auto s = sample(rng, 8, 3, 1.1);
  const double t = 0.4;
  const Mat y = s.u.matrix() + t * s.d.matrix();
  EXPECT_LE((on::retract(on::RetractionKind::qr(), s.u, s.d, t).matrix() - oracle::orthonormal(y)).norm(),
            1e-13);
  Eigen::SelfAdjointEigenSolver<Mat> eig(y.transpose() * y);
  const Mat inv_sqrt = eig.operatorInverseSqrt();
  EXPECT_LE((on::retract(on::RetractionKind::pd(), s.u, s.d, t).matrix() - y * inv_sqrt).norm(), 1e-13);
}

TEST(GaResolvent, SpecialCorrections) {
  oracle::Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = sample(rng, 9, 3, 1.0);
    const double t = rng.uniform(0.05, 1.0);
    EXPECT_LE((on::ga_resolvent(s.u, s.d, t, on::GaCorrection::polynomial({})).matrix() -
               on::retract(on::RetractionKind::wy(), s.u, s.d, t).matrix())
                  .norm(),
              1e-13);
    EXPECT_LE((on::ga_resolvent(s.u, s.d, t, on::GaCorrection::half_exponential()).matrix() -
               on::retract(on::RetractionKind::geodesic(), s.u, s.d, t).matrix())
                  .norm(),
              1e-10);
  }
}

TEST(Retract, SecondOrderExpansionOfWyAndPd) {
  oracle::Rng rng(26);
  const auto s = sample(rng, 8, 2, 1.0);
  const Mat& u = s.u.matrix();
  const Mat& d = s.d.matrix();
  for (const auto& kind : {on::RetractionKind::wy(), on::RetractionKind::pd()}) {
    std::vector<double> ts, errs;
    for (double t = 1e-1; t >= 1e-3; t /= 2) {
      const Mat r = on::retract(kind, s.u, s.d, t).matrix();
      ts.push_back(t);
      errs.push_back((r - u - t * d + 0.5 * t * t * u * (d.transpose() * d)).norm());
    }
    EXPECT_GE(oracle::loglog_slope(ts, errs), 2.7) << kind.name();
  }
}
