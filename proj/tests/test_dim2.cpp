#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace qacor;
using namespace qacor::dim2;

namespace {

const double kGrid[] = {-0.95, -0.5, 0.0, 0.05, 0.5, 0.95};

}  // namespace

TEST(Dim2, RhoDomain) {
  EXPECT_THROW(Rho(1.0), Error);
  EXPECT_THROW(Rho(-1.0), Error);
  EXPECT_THROW(Rho(std::nan("")), Error);
  try {
    Rho(2.0);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfDomain);
  }
  EXPECT_EQ(Rho(0.25).matrix()(0, 1), 0.25);
}

TEST(Dim2, FMap) {
  EXPECT_DOUBLE_EQ(f_map(Rho(0.0)), 1.0);
  EXPECT_DOUBLE_EQ(f_map(Rho(0.5)), 3.0);
  EXPECT_DOUBLE_EQ(f_map(Rho(-0.5)), 1.0 / 3.0);
}

TEST(Dim2, LambdaMatchesAtanh) {
  for (double a : kGrid)
    for (double b : kGrid) EXPECT_NEAR(lambda_of(Rho(a), Rho(b)), oracle::lambda2(a, b), 1e-14);
}

TEST(Dim2, ExampleValues) {
  const double lam = lambda_of(Rho(0.05), Rho(0.95));
  EXPECT_NEAR(lam, 1.7817390937863313, 1e-14);
  EXPECT_NEAR(dist2d(Rho(0.05), Rho(0.95)), 2.5197595910429778, 1e-14);
  EXPECT_NEAR(dist2d(Rho(0.05), Rho(0.95)), std::sqrt(2.0) * 0.5 * std::log(f_map(Rho(0.95)) / f_map(Rho(0.05))), 1e-14);
}

TEST(Dim2, LogIsHollowAndScaled) {
  const HollowSym l = log2d(Rho(0.3), Rho(-0.4));
  EXPECT_EQ(l(0, 0), 0.0);
  EXPECT_NEAR(l(0, 1), oracle::lambda2(0.3, -0.4) * (1 - 0.09), 1e-15);
}

TEST(Dim2, GeodesicMatchesTanhForm) {
  for (double a : kGrid)
    for (double b : kGrid)
      for (double t : {-1.0, -0.25, 0.0, 0.5, 1.0, 2.0}) {
        EXPECT_NEAR(geodesic2d_value(Rho(a), Rho(b), t), oracle::geodesic2(a, b, t), 1e-12);
      }
  EXPECT_NEAR(geodesic2d(Rho(0.1), Rho(0.9), 1.0), 0.9, 1e-15);
  // Extreme extrapolation saturates instead of leaving (-1, 1) through overflow.
  EXPECT_LT(std::abs(geodesic2d_value(Rho(0.1), Rho(0.9), 400.0)), 1.0 + 1e-15);
}

TEST(Dim2, SecondDerivativeIdentity) {
  const double h = 1e-4;
  for (double t : {-0.5, 0.0, 0.3, 1.2}) {
    auto r = [&](double u) { return geodesic2d_value(Rho(0.05), Rho(0.95), u); };
    const double fd = (r(t + h) - 2 * r(t) + r(t - h)) / (h * h);
    EXPECT_NEAR(geodesic2d_second_derivative(Rho(0.05), Rho(0.95), t), fd, 1e-5);
  }
}

TEST(Dim2, MatchesGeneralDimensionCode) {
  for (double a : kGrid)
    for (double b : kGrid) {
      const CorrMatrix c1 = corr2(a), c2 = corr2(b);
      const HollowSym l = qa_log(c1, c2);
      EXPECT_NEAR(l(0, 1), log2d(Rho(a), Rho(b))(0, 1), 1e-8 * (1 + std::abs(l(0, 1))));
      EXPECT_NEAR(qa_dist(c1, c2), dist2d(Rho(a), Rho(b)), 1e-8);
      EXPECT_NEAR(qa_exp(c1, 0.5 * l)(0, 1), geodesic2d_value(Rho(a), Rho(b), 0.5), 1e-8);
    }
}
