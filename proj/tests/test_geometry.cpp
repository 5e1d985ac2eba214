// Connection, lift derivative and sectional curvature of the quotient metric.

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace qacor;
using qt::diff;

namespace {

random::Rng rng(47);

Matrix hollow_from_coords(const Vector& x, Index n) {
  return oracle::from_coords(x, oracle::offdiag_pairs(n), Matrix::Zero(n, n));
}

}  // namespace

TEST(QaConnection, MatchesCoordinateChristoffels) {
  for (Index n : {2, 3, 4}) {
    const auto pairs = oracle::offdiag_pairs(n);
    const CorrMatrix c = random::corr(n, rng, 0.1);
    const HollowSym x = random::hollow(n, rng), y = random::hollow(n, rng);
    // Constant coordinate fields: (nabla_X Y)^l = Gamma^l(x, y).
    const Vector gamma = oracle::christoffel(oracle::qa_coordinate_metric(n), oracle::to_coords(c.mat(), pairs),
                                             oracle::to_coords(x.mat(), pairs), oracle::to_coords(y.mat(), pairs));
    const Matrix got = qa_connection(c, x, y, HollowSym::zero(n)).mat();
    EXPECT_LT(diff(got, hollow_from_coords(gamma, n)) / (1 + got.norm()), 1e-7) << n;
  }
}

TEST(QaConnection, IsSymmetricAndAddsDerivative) {
  const CorrMatrix c = random::corr(4, rng);
  const HollowSym x = random::hollow(4, rng), y = random::hollow(4, rng), dy = random::hollow(4, rng);
  const HollowSym zero = HollowSym::zero(4);
  // Torsion-free: constant coordinate fields commute.
  EXPECT_LT(diff(qa_connection(c, x, y, zero).mat(), qa_connection(c, y, x, zero).mat()), 1e-12);
  EXPECT_LT(diff(qa_connection(c, x, y, dy).mat(), (qa_connection(c, x, y, zero) + dy).mat()), 1e-12);
  EXPECT_LT(qa_connection(c, zero, y, zero).norm(), 1e-15);
}

TEST(QaConnection, GeodesicEquationResidual) {
  const double h = 1e-3;
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 3;
    const CorrMatrix c = random::corr(n, rng, 0.1);
    HollowSym x = random::hollow(n, rng);
    x = (1.0 / qa_norm(c, x)) * x;  // unit speed
    const double t = random::uniform(rng, -0.5, 0.5);
    auto gamma = [&](double u) { return qa_exp(c, u * x).mat(); };
    const Matrix g0 = gamma(t);
    const HollowSym vel = qt::hollow_from((gamma(t + h) - gamma(t - h)) / (2 * h));
    const HollowSym acc = qt::hollow_from((gamma(t + h) - 2 * g0 + gamma(t - h)) / (h * h));
    const double res = qa_connection(CorrMatrix(g0), vel, vel, acc).norm();
    EXPECT_LT(res, 1e-4) << k;
  }
}

TEST(LiftDerivative, FiniteDifferenceOfLiftField) {
  const double h = 1e-5;
  for (Index n : {2, 3, 5}) {
    const CorrMatrix c = random::corr(n, rng, 0.1);
    const HollowSym x = random::hollow(n, rng), y = random::hollow(n, rng);
    const Matrix xs = horizontal_lift(c, x).value.mat();
    auto lift_at = [&](double s) {
      return horizontal_lift(SpdMatrix(Matrix(c.mat() + s * xs)), y).value.mat();
    };
    const Matrix fd = (lift_at(h) - lift_at(-h)) / (2 * h);
    EXPECT_LT(diff(lift_derivative(c, x, y).mat(), fd) / (1 + fd.norm()), 1e-8) << n;
  }
}

TEST(QaCurvature, MatchesCoordinateOracle) {
  for (Index n : {3, 4}) {
    for (int k = 0; k < 3; ++k) {
      const auto pairs = oracle::offdiag_pairs(n);
      const CorrMatrix c = random::corr(n, rng, 0.15, 20);
      const HollowSym x = random::hollow(n, rng), y = random::hollow(n, rng);
      const double expect = oracle::sectional_curvature(oracle::qa_coordinate_metric(n),
                                                        oracle::to_coords(c.mat(), pairs),
                                                        oracle::to_coords(x.mat(), pairs),
                                                        oracle::to_coords(y.mat(), pairs));
      const double got = qa_curvature(c, x, y);
      EXPECT_NEAR(got, expect, 1e-5 * (1 + std::abs(expect))) << n << " " << k;
    }
  }
}

TEST(QaCurvature, TermSigns) {
  for (int k = 0; k < 200; ++k) {
    const Index n = 3 + k % 2;
    const CorrMatrix c = random::corr(n, rng);
    const CurvatureTerms t = qa_curvature_terms(c, random::hollow(n, rng), random::hollow(n, rng));
    EXPECT_LE(t.base, 1e-12);
    EXPECT_GE(t.correction, -1e-12);
  }
}

TEST(QaCurvature, ScaleInvariantInThePlane) {
  const CorrMatrix c = random::corr(4, rng);
  const HollowSym x = random::hollow(4, rng), y = random::hollow(4, rng);
  const double k = qa_curvature(c, x, y);
  EXPECT_NEAR(qa_curvature(c, 3.0 * x, x - 0.5 * y), k, 1e-10 * (1 + std::abs(k)));
}

TEST(QaCurvature, Errors) {
  const HollowSym x(qt::mat2(0, 1, 1, 0));
  try {
    qa_curvature(corr2(0.3), x, 2.0 * x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionTooSmall);
  }
  const CorrMatrix c = random::corr(3, rng);
  const HollowSym y = random::hollow(3, rng);
  try {
    qa_curvature(c, y, -2.0 * y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegeneratePlane);
  }
}
