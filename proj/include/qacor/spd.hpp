#pragma once

// Affine-invariant geometry on Sym+(n).
//
// The metric family is
//   G^{a,b}_S(V, W) = a tr(S^{-1} V S^{-1} W) + b tr(S^{-1} V) tr(S^{-1} W),
// valid for a > 0 and b > -a/n. All members share the same geodesics
//   Exp_S(V) = S^{1/2} exp(S^{-1/2} V S^{-1/2}) S^{1/2},
// so the exponential and logarithm take no metric parameters.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "qacor/error.hpp"
#include "qacor/matfun.hpp"
#include "qacor/types.hpp"

namespace qacor {

struct MetricParams {
  double alpha = 1.0;
  double beta = 0.0;

  // Throws InvalidMetricParams unless alpha > 0 and beta > -alpha / n.
  void validate(Index n) const {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !(alpha > 0.0) ||
        !(beta > -alpha / static_cast<double>(n))) {
      std::ostringstream os;
      os << "need alpha > 0 and beta > -alpha/n; got alpha=" << alpha << ", beta=" << beta
         << ", n=" << n;
      throw Error(Errc::InvalidMetricParams, os.str());
    }
  }
};

inline double ai_metric(const SpdMatrix& s, const SymMatrix& v, const SymMatrix& w,
                        const MetricParams& p = {}) {
  SymMatrix::check_same_dim(s, v);
  SymMatrix::check_same_dim(s, w);
  p.validate(s.dim());
  const Eigen::LLT<Matrix> llt(s.mat());
  const Matrix siv = llt.solve(v.mat());
  const Matrix siw = llt.solve(w.mat());
  return p.alpha * (siv.cwiseProduct(siw.transpose())).sum() + p.beta * siv.trace() * siw.trace();
}

inline SpdMatrix ai_exp(const SpdMatrix& s, const SymMatrix& v) {
  SymMatrix::check_same_dim(s, v);
  const SpdRoots r(s);
  const SymMatrix inner = SymMatrix::trusted(r.inv_sqrt * v.mat() * r.inv_sqrt);
  const Matrix e = sym_fun(inner, SpectralFn::exp()).mat();
  return SpdMatrix::trusted(r.sqrt * e * r.sqrt);
}

inline SymMatrix ai_log(const SpdMatrix& s1, const SpdMatrix& s2) {
  SymMatrix::check_same_dim(s1, s2);
  const SpdRoots r(s1);
  const SymMatrix inner = SymMatrix::trusted(r.inv_sqrt * s2.mat() * r.inv_sqrt);
  const Matrix l = sym_fun(inner, SpectralFn::log()).mat();
  return SymMatrix::trusted(r.sqrt * l * r.sqrt);
}

// Uses the eigenvalues l_i of S1^{-1/2} S2 S1^{-1/2}:
//   d^2 = a sum log^2 l_i + b (sum log l_i)^2.
inline double ai_dist(const SpdMatrix& s1, const SpdMatrix& s2, const MetricParams& p = {}) {
  SymMatrix::check_same_dim(s1, s2);
  p.validate(s1.dim());
  const SpdRoots r(s1);
  const SymEig e(SymMatrix::trusted(r.inv_sqrt * s2.mat() * r.inv_sqrt));
  if (!(e.values.minCoeff() > 0.0)) {
    throw Error(Errc::NonSpdInput, "relative spectrum is not positive");
  }
  const Vector logs = e.values.array().log();
  const double sq = p.alpha * logs.squaredNorm() + p.beta * logs.sum() * logs.sum();
  return std::sqrt(std::max(sq, 0.0));
}

// Levi-Civita connection; dw is the Euclidean derivative of W along V.
inline SymMatrix ai_connection(const SpdMatrix& s, const SymMatrix& v, const SymMatrix& w,
                               const SymMatrix& dw) {
  SymMatrix::check_same_dim(s, v);
  SymMatrix::check_same_dim(s, w);
  SymMatrix::check_same_dim(s, dw);
  const Eigen::LLT<Matrix> llt(s.mat());
  const Matrix vsw = v.mat() * llt.solve(w.mat());
  return SymMatrix::trusted(dw.mat() - 0.5 * (vsw + vsw.transpose()));
}

// Sectional curvature of the plane span(V, W) for (alpha, beta) = (1, 0):
//   tr(S^{-1}V S^{-1}W S^{-1}(V S^{-1}W - W S^{-1}V)) / (2 (G(V,V) G(W,W) - G(V,W)^2)).
// The Gram determinant reduces to G(V,V) G(W,W) for orthogonal V, W.
inline double ai_curvature(const SpdMatrix& s, const SymMatrix& v, const SymMatrix& w) {
  SymMatrix::check_same_dim(s, v);
  SymMatrix::check_same_dim(s, w);
  const Eigen::LLT<Matrix> llt(s.mat());
  const Matrix a = llt.solve(v.mat());  // S^{-1} V
  const Matrix b = llt.solve(w.mat());  // S^{-1} W
  const double gvv = (a * a).trace();
  const double gww = (b * b).trace();
  const double gvw = (a * b).trace();
  const double gram = gvv * gww - gvw * gvw;
  if (!(gram > 1e-12 * gvv * gww)) {
    throw Error(Errc::DegeneratePlane, "tangent vectors are (numerically) parallel");
  }
  const Matrix ab = a * b;
  const double num = (ab * (ab - b * a)).trace();
  return 0.5 * num / gram;
}

}  // namespace qacor
