#pragma once

// Sym+(n) viewed as Diag+(n) x Cor+(n) through S = Delta C Delta.
//
// The product metrics use the power-Euclidean metric
//   g_D(X, X) = tr(D^{2(p-1)} X^2)
// on the diagonal factor and the quotient-affine metric on the correlation
// factor, with unit weights. D -> D^p / p is an isometry onto a Euclidean
// space, so E(p) geodesics are straight lines in the entries d^p:
//   d(t) = (d1^p + t (d2^p - d1^p))^{1/p},
// and p = 0 is the log-Euclidean limit d(t) = exp((1 - t) log d1 + t log d2).

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qacor/error.hpp"
#include "qacor/matfun.hpp"
#include "qacor/quotient.hpp"
#include "qacor/spd.hpp"
#include "qacor/types.hpp"

namespace qacor {

class DiagPos {
 public:
  explicit DiagPos(Vector d) : d_(std::move(d)) {
    for (Index i = 0; i < d_.size(); ++i) {
      if (!(d_(i) > 0.0) || !std::isfinite(d_(i))) {
        std::ostringstream os;
        os << "diagonal entry " << i << " = " << d_(i) << " is not positive";
        throw Error(Errc::NonPositiveEntry, os.str());
      }
    }
  }

  const Vector& values() const { return d_; }
  Index dim() const { return d_.size(); }

 private:
  Vector d_;
};

struct SpdDecomposition {
  DiagPos scale;  // Diag(S)^{1/2}
  CorrMatrix corr;

  SpdMatrix recompose() const {
    const Vector& d = scale.values();
    return SpdMatrix::trusted(d.asDiagonal() * corr.mat() * d.asDiagonal());
  }
};

inline SpdDecomposition decompose(const SpdMatrix& s) {
  return {DiagPos(s.mat().diagonal().cwiseSqrt()), submersion(s)};
}

inline DiagPos power_euclidean_geodesic(const DiagPos& d1, const DiagPos& d2, double p, double t) {
  if (d1.dim() != d2.dim()) {
    throw Error(Errc::DimensionMismatch, "diagonal factors differ in size");
  }
  const Index n = d1.dim();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double a = d1.values()(i);
    const double b = d2.values()(i);
    if (p == 0.0) {
      out(i) = std::exp((1.0 - t) * std::log(a) + t * std::log(b));
    } else {
      const double ap = std::pow(a, p);
      const double bp = std::pow(b, p);
      const double base = ap + t * (bp - ap);
      if (!(base > 0.0)) {
        std::ostringstream os;
        os << "E(" << p << ") geodesic leaves Diag+ at t=" << t << " (entry " << i << ")";
        throw Error(Errc::NonPositiveEntry, os.str());
      }
      out(i) = std::pow(base, 1.0 / p);
    }
  }
  return DiagPos(out);
}

// E(p) x quotient-affine geodesic from S1 to S2. The correlation logarithm is
// computed once at construction.
class ProductGeodesic {
 public:
  ProductGeodesic(const SpdMatrix& s1, const SpdMatrix& s2, double p, const LogConfig& cfg = {})
      : from_(decompose(s1)), to_(decompose(s2)), p_(p),
        log_(qa_log(from_.corr, to_.corr, cfg)) {}

  double p() const { return p_; }
  const HollowSym& corr_log() const { return log_; }

  CorrMatrix corr_at(double t) const { return qa_exp(from_.corr, t * log_); }

  SpdMatrix operator()(double t) const {
    const SpdDecomposition at{power_euclidean_geodesic(from_.scale, to_.scale, p_, t), corr_at(t)};
    return at.recompose();
  }

 private:
  SpdDecomposition from_;
  SpdDecomposition to_;
  double p_;
  HollowSym log_;
};

inline SpdMatrix product_geodesic(const SpdMatrix& s1, const SpdMatrix& s2, double p, double t,
                                  const LogConfig& cfg = {}) {
  return ProductGeodesic(s1, s2, p, cfg)(t);
}

enum class ComparisonKind { Euclidean, LogEuclidean, AffineInvariant };

inline std::string to_string(ComparisonKind k) {
  switch (k) {
    case ComparisonKind::Euclidean: return "euclidean";
    case ComparisonKind::LogEuclidean: return "log_euclidean";
    case ComparisonKind::AffineInvariant: return "affine_invariant";
  }
  return "unknown";
}

class ComparisonGeodesic {
 public:
  ComparisonGeodesic(const SpdMatrix& s1, const SpdMatrix& s2, ComparisonKind kind)
      : kind_(kind), s1_(s1), s2_(s2) {
    SymMatrix::check_same_dim(s1, s2);
    switch (kind) {
      case ComparisonKind::Euclidean:
        break;
      case ComparisonKind::LogEuclidean:
        log1_ = sym_fun(s1, SpectralFn::log());
        log2_ = sym_fun(s2, SpectralFn::log());
        break;
      case ComparisonKind::AffineInvariant:
        log1_ = ai_log(s1, s2);
        break;
    }
  }

  ComparisonKind kind() const { return kind_; }

  SpdMatrix operator()(double t) const {
    switch (kind_) {
      case ComparisonKind::Euclidean: {
        const Matrix m = (1.0 - t) * s1_.mat() + t * s2_.mat();
        try {
          return SpdMatrix(m);
        } catch (const Error&) {
          std::ostringstream os;
          os << "Euclidean geodesic leaves the SPD cone at t=" << t;
          throw Error(Errc::NonSpdResult, os.str());
        }
      }
      case ComparisonKind::LogEuclidean:
        return SpdMatrix::trusted(sym_fun((1.0 - t) * log1_ + t * log2_, SpectralFn::exp()).mat());
      case ComparisonKind::AffineInvariant:
        return ai_exp(s1_, t * log1_);
    }
    return s1_;
  }

 private:
  ComparisonKind kind_;
  SpdMatrix s1_;
  SpdMatrix s2_;
  SymMatrix log1_;
  SymMatrix log2_;
};

inline SpdMatrix comparison_geodesic(const SpdMatrix& s1, const SpdMatrix& s2, ComparisonKind kind,
                                     double t) {
  return ComparisonGeodesic(s1, s2, kind)(t);
}

struct EllipseAxes {
  double major = 0.0;  // sqrt of the largest eigenvalue
  double minor = 0.0;
  double angle = 0.0;  // direction of the major axis, in (-pi/2, pi/2]
};

struct CurveSample {
  double t = 0.0;
  Matrix corr;
  std::optional<double> rho;  // n = 2 only
  double det = 0.0;
  double trace = 0.0;
  std::optional<EllipseAxes> axes;  // n = 2 only
};

inline EllipseAxes ellipse_axes(const SpdMatrix& s) {
  const SymEig e(s);
  const Index hi = e.dim() - 1;
  EllipseAxes ax;
  ax.major = std::sqrt(e.values(hi));
  ax.minor = std::sqrt(e.values(0));
  double angle = std::atan2(e.vectors(1, hi), e.vectors(0, hi));
  if (angle <= -std::numbers::pi / 2) angle += std::numbers::pi;
  if (angle > std::numbers::pi / 2) angle -= std::numbers::pi;
  ax.angle = angle;
  return ax;
}

inline CurveSample sample_statistics(double t, const SpdMatrix& s) {
  CurveSample cs;
  cs.t = t;
  cs.corr = submersion(s).mat();
  Eigen::LLT<Matrix> llt(s.mat());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonSpdInput, "curve sample is not SPD");
  }
  const Vector l = llt.matrixL().toDenseMatrix().diagonal();
  cs.det = l.array().square().prod();
  cs.trace = s.mat().trace();
  if (s.dim() == 2) {
    cs.rho = cs.corr(0, 1);
    cs.axes = ellipse_axes(s);
  }
  return cs;
}

struct TimedSample {
  double t;
  SpdMatrix value;
};

inline std::vector<CurveSample> curve_statistics(const std::vector<TimedSample>& samples) {
  std::vector<CurveSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(sample_statistics(s.t, s.value));
  }
  return out;
}

// t_k = t_min + (t_max - t_min) k / (samples - 1), k = 0 .. samples - 1.
inline std::vector<double> linspace(double t_min, double t_max, int samples) {
  std::vector<double> ts;
  ts.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    ts.push_back(samples == 1 ? t_min : t_min + (t_max - t_min) * k / (samples - 1));
  }
  return ts;
}

}  // namespace qacor
