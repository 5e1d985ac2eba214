#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "test_util.hpp"

using namespace qacor;
using qt::diff;

namespace {

random::Rng rng(31);

MetricParams random_params(Index n) {
  const double a = random::uniform(rng, 0.2, 3.0);
  return {a, random::uniform(rng, -a / n * 0.95, 2.0)};
}

SpdMatrix scaled(const Vector& d, const SpdMatrix& s) {
  return SpdMatrix(Matrix(d.asDiagonal() * s.mat() * d.asDiagonal()));
}

}  // namespace

TEST(Submersion, Examples) {
  const CorrMatrix c = random::corr(4, rng);
  EXPECT_LT(diff(submersion(c).mat(), c.mat()), 1e-15);
  EXPECT_LT(diff(submersion(SpdMatrix(qt::mat2(4, 0, 0, 100))).mat(), Matrix::Identity(2, 2)), 0.0 + 1e-300);
  const CorrMatrix p = submersion(SpdMatrix(qt::mat2(4, 1, 1, 100)));
  EXPECT_DOUBLE_EQ(p(0, 1), 0.05);
  EXPECT_EQ(p(0, 0), 1.0);
}

TEST(Submersion, ConstantOnFibers) {
  for (Index n : {2, 3, 6}) {
    const SpdMatrix s = random::spd(n, rng);
    const Vector d = random::positive_diag(n, rng, 10.0);
    EXPECT_LT(diff(submersion(scaled(d, s)).mat(), submersion(s).mat()), 1e-14);
    EXPECT_LT(diff(submersion(s).mat(), oracle::normalize(s.mat())), 1e-14);
  }
}

TEST(DSubmersion, FiniteDifference) {
  const double h = 1e-5;
  for (Index n : {2, 3, 5}) {
    const SpdMatrix s = random::spd(n, rng, 10);
    const SymMatrix v = random::sym(n, rng);
    const Matrix fd = (oracle::normalize(s.mat() + h * v.mat()) - oracle::normalize(s.mat() - h * v.mat())) / (2 * h);
    const HollowSym d = d_submersion(s, v);
    EXPECT_LT(diff(d.mat(), fd), 1e-8) << n;
    for (Index i = 0; i < n; ++i) EXPECT_EQ(d(i, i), 0.0);
  }
}

TEST(DSubmersion, IdentityOnHollowAtCorrelation) {
  const CorrMatrix c = random::corr(4, rng);
  const HollowSym x = random::hollow(4, rng);
  EXPECT_LT(diff(d_submersion(c, x).mat(), x.mat()), 1e-14);
}

TEST(VerticalProj, AtIdentityIsDiagonalPart) {
  const SymMatrix v = random::sym(4, rng);
  const VerticalVector ver = vertical_proj(SpdMatrix::identity(4), v);
  EXPECT_LT(diff(ver.value().mat(), diag_part(v.mat())), 1e-14);
  EXPECT_LT(diff(ver.mu, 0.5 * v.mat().diagonal()), 1e-14);
}

TEST(VerticalProj, TwoByTwoLinearSolve) {
  // C = C(1/2), V = e1 e1^T. A(C) = [[4/3, -1/3], [-1/3, 4/3]], Diag(C^{-1} V) 1 = (4/3, 0),
  // so mu = [[7/3, -1/3], [-1/3, 7/3]]^{-1} (4/3, 0) = (7/12, 1/12).
  const CorrMatrix c = corr2(0.5);
  const SymMatrix v(qt::mat2(1, 0, 0, 0));
  const VerticalVector ver = vertical_proj(c, v);
  EXPECT_NEAR(ver.mu(0), 7.0 / 12.0, 1e-15);
  EXPECT_NEAR(ver.mu(1), 1.0 / 12.0, 1e-15);
  EXPECT_LT(diff(a_map(c).mat(), qt::mat2(4.0 / 3, -1.0 / 3, -1.0 / 3, 4.0 / 3)), 1e-15);
  EXPECT_LT(diff(ver.value().mat(), qt::mat2(7.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6)), 1e-15);
}

TEST(Projections, MatchGramOracleForAllParameters) {
  for (int k = 0; k < 30; ++k) {
    const Index n = 2 + k % 4;
    const SpdMatrix s = random::spd(n, rng, 100);
    const SymMatrix v = random::sym(n, rng);
    const MetricParams p = random_params(n);
    const Matrix expect = oracle::horizontal(s.mat(), v.mat(), p.alpha, p.beta);
    EXPECT_LT(diff(horizontal_proj(s, v).value.mat(), expect) / v.mat().norm(), 1e-10) << k;
  }
}

TEST(Projections, DecompositionIdempotenceAndKernel) {
  for (int k = 0; k < 50; ++k) {
    const Index n = std::array<Index, 3>{2, 3, 5}[k % 3];
    const SpdMatrix s = random::spd(n, rng);
    const SymMatrix v = random::sym(n, rng);
    const SymMatrix ver = vertical_proj(s, v).value();
    const HorizontalVector hor = horizontal_proj(s, v);
    EXPECT_LT(diff((ver + hor.value).mat(), v.mat()), 1e-13);
    EXPECT_LT(diff(vertical_proj(s, ver).value().mat(), ver.mat()), 1e-11);
    EXPECT_LT(diff(vertical_proj(s, hor.value).value().mat(), Matrix::Zero(n, n)), 1e-11);
    EXPECT_LT(qt::max_abs(d_submersion(s, ver).mat()), 1e-10);
    EXPECT_LT(hor.horizontality_residual(), 1e-10);
    const MetricParams p = random_params(n);
    EXPECT_LT(std::abs(ai_metric(s, hor.value, ver, p)) / ai_metric(s, v, v, p), 1e-9);
  }
}

TEST(HorizontalLift, ProjectsBackAndMatchesOracle) {
  for (Index n : {2, 3, 4}) {
    const SpdMatrix s = random::spd(n, rng);
    const HollowSym x = random::hollow(n, rng);
    const HorizontalVector lift = horizontal_lift(s, x);
    EXPECT_LT(diff(d_submersion(s, lift.value).mat(), x.mat()), 1e-11);
    const Vector d = s.mat().diagonal().cwiseSqrt();
    EXPECT_LT(diff(lift.value.mat(), oracle::horizontal(s.mat(), d.asDiagonal() * x.mat() * d.asDiagonal())), 1e-10);
  }
}

TEST(QaMetric, MatchesOracleAndIsGaugeInvariant) {
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 4;
    const CorrMatrix c = random::corr(n, rng);
    const HollowSym x = random::hollow(n, rng), y = random::hollow(n, rng);
    const MetricParams p = random_params(n);
    const double g = qa_metric(c, x, y, p);
    EXPECT_NEAR(g, oracle::qa_metric(c.mat(), x.mat(), y.mat(), p.alpha, p.beta), 1e-9 * (1 + std::abs(g)));
    EXPECT_GT(qa_metric(c, x, x, p), 0.0);
    for (int f = 0; f < 5; ++f) {
      const SpdMatrix s = scaled(random::positive_diag(n, rng, 5.0), c);
      const double lifted = ai_metric(s, horizontal_lift(s, x).value, horizontal_lift(s, y).value, p);
      EXPECT_NEAR(lifted, g, 1e-9 * (1 + std::abs(g)));
    }
  }
}

TEST(QaMetric, TwoByTwoClosedForm) {
  // g_C(rho)(X, X) = 2 x^2 / (1 - rho^2)^2 for X = [[0, x], [x, 0]].
  for (double rho : {-0.9, 0.0, 0.3, 0.99}) {
    const HollowSym x(qt::mat2(0, 0.7, 0.7, 0));
    EXPECT_NEAR(qa_metric(corr2(rho), x, x), 2 * 0.49 / std::pow(1 - rho * rho, 2), 1e-9 / std::pow(1 - rho * rho, 2));
  }
}

TEST(QaExp, MatchesOracleAndProjectsGeodesics) {
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 3;
    const CorrMatrix c = random::corr(n, rng);
    const HollowSym x = random::hollow(n, rng);
    const Matrix expect = oracle::normalize(oracle::ai_exp(c.mat(), oracle::horizontal(c.mat(), x.mat())));
    EXPECT_LT(diff(qa_exp(c, x).mat(), expect), 1e-10);
    const SpdMatrix s = scaled(random::positive_diag(n, rng, 3.0), c);
    for (double t : {-2.0, 0.5, 3.0}) {
      const SpdMatrix up = ai_exp(s, t * static_cast<const SymMatrix&>(horizontal_lift(s, x).value));
      EXPECT_LT(diff(submersion(up).mat(), qa_exp(c, t * x).mat()), 1e-9);
    }
  }
  const CorrMatrix c = random::corr(3, rng);
  EXPECT_LT(diff(qa_exp(c, HollowSym::zero(3)).mat(), c.mat()), 1e-14);
}

TEST(QaExp, SolvesTheCoordinateGeodesicEquation) {
  const Index n = 3;
  const auto pairs = oracle::offdiag_pairs(n);
  const CorrMatrix c = random::corr(n, rng, 0.2);
  const HollowSym x = 0.6 * random::hollow(n, rng);
  const Vector end = oracle::integrate_geodesic(oracle::qa_coordinate_metric(n), oracle::to_coords(c.mat(), pairs),
                                                oracle::to_coords(x.mat(), pairs), 1.0, 100);
  EXPECT_LT(diff(oracle::to_coords(qa_exp(c, x).mat(), pairs), end), 1e-7);
}

TEST(QaLog, RoundTripAndCertificate) {
  for (int k = 0; k < 40; ++k) {
    const Index n = 2 + k % 5;
    const CorrMatrix c1 = random::corr(n, rng), c2 = random::corr(n, rng);
    const LogReport r = qa_log_report(c1, c2);
    ASSERT_TRUE(r.converged) << k;
    EXPECT_LT(diff(qa_exp(c1, r.log).mat(), c2.mat()), 1e-7);
    EXPECT_LT(r.residual, 1e-8);
    EXPECT_LT(diff(submersion(r.fiber_point).mat(), c2.mat()), 1e-12);
    // The fiber point's AI logarithm is horizontal, which the oracle confirms.
    const Matrix l = ai_log(c1, r.fiber_point).mat();
    EXPECT_LT(diff(oracle::horizontal(c1.mat(), l), l) / l.norm(), 1e-7);
  }
}

TEST(QaLog, SamePointAndInverse) {
  const CorrMatrix c = random::corr(4, rng);
  EXPECT_LT(qa_log(c, c).norm(), 1e-12);
  const HollowSym x = 0.5 * random::hollow(4, rng);
  EXPECT_LT(diff(qa_log(c, qa_exp(c, x)).mat(), x.mat()), 1e-7);
}

TEST(QaLog, FiniteDifferenceGradientAgrees) {
  const CorrMatrix c1 = random::corr(4, rng), c2 = random::corr(4, rng);
  LogConfig fd;
  fd.gradient = GradientMode::FiniteDifference;
  const LogReport a = qa_log_report(c1, c2);
  const LogReport b = qa_log_report(c1, c2, fd);
  ASSERT_TRUE(b.converged);
  EXPECT_LT(diff(a.log.mat(), b.log.mat()), 1e-6);
}

TEST(QaLog, NoConvergenceCarriesBestIterate) {
  const CorrMatrix c1 = random::corr(5, rng), c2 = random::corr(5, rng);
  LogConfig cfg;
  cfg.max_iters = 1;
  try {
    qa_log(c1, c2, cfg);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.code(), Errc::NoConvergence);
    EXPECT_FALSE(e.report().converged);
    EXPECT_GT(e.report().residual, cfg.horizontality_tol);
    EXPECT_EQ(e.report().restarts, 1);
    EXPECT_TRUE(e.report().log.mat().allFinite());
  }
}

TEST(QaDist, SymmetryPermutationTriangle) {
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 4;
    const CorrMatrix a = random::corr(n, rng), b = random::corr(n, rng), c = random::corr(n, rng);
    const MetricParams p = random_params(n);
    const double ab = qa_dist(a, b, p);
    EXPECT_NEAR(ab, qa_dist(b, a, p), 1e-7 * (1 + ab));
    EXPECT_LE(ab, qa_dist(a, c, p) + qa_dist(c, b, p) + 1e-7);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    perm.indices().reverseInPlace();
    const Matrix pm = perm;
    EXPECT_NEAR(qa_dist(CorrMatrix(Matrix(pm * a.mat() * pm.transpose())),
                        CorrMatrix(Matrix(pm * b.mat() * pm.transpose())), p),
                ab, 1e-7 * (1 + ab));
  }
  const CorrMatrix a = random::corr(3, rng);
  EXPECT_NEAR(qa_dist(a, a), 0.0, 1e-12);
}

TEST(Quotient, DimensionMismatch) {
  EXPECT_THROW(qa_log(random::corr(2, rng), random::corr(3, rng)), Error);
  EXPECT_THROW(qa_exp(random::corr(2, rng), HollowSym::zero(3)), Error);
  EXPECT_THROW(vertical_proj(SpdMatrix::identity(2), SymMatrix::zero(3)), Error);
}
