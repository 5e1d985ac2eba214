#pragma once

// Quotient-affine geometry on full-rank correlation matrices.
//
// Cor+(n) is the quotient of Sym+(n) by the congruence action S -> D S D of
// positive diagonal matrices, with submersion pi(S) = Diag(S)^{-1/2} S Diag(S)^{-1/2}.
// Tangent vectors of Cor+(n) are hollow symmetric matrices. Everything here
// is expressed through the vertical/horizontal splitting of T_S Sym+(n):
//
//   ver_S(V) = S o psi(mu),  mu = (I + A(S))^{-1} Diag(S^{-1} V) 1,
//   hor_S(V) = V - ver_S(V),
//
// and a vector W is horizontal iff Diag(S^{-1} W + W S^{-1}) = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "qacor/bfgs.hpp"
#include "qacor/error.hpp"
#include "qacor/matfun.hpp"
#include "qacor/spd.hpp"
#include "qacor/types.hpp"

namespace qacor {

namespace detail {

// Factorizations of S and I + A(S) shared by the projections at one base point.
class ProjectionFrame {
 public:
  explicit ProjectionFrame(const SpdMatrix& s) : s_(s), s_llt_(s.mat()) {
    if (s_llt_.info() != Eigen::Success) {
      throw Error(Errc::NonSpdInput, "Cholesky factorization of the base point failed");
    }
    const Index n = s.dim();
    s_inv_ = detail::symmetrized(s_llt_.solve(Matrix::Identity(n, n)));
    ia_ = Matrix::Identity(n, n) + s.mat().cwiseProduct(s_inv_);
    ia_llt_.compute(ia_);
    if (ia_llt_.info() != Eigen::Success) {
      throw Error(Errc::LinearSolveFailure, "I + A(S) is numerically singular");
    }
  }

  const SpdMatrix& base() const { return s_; }
  const Matrix& inverse() const { return s_inv_; }
  const Matrix& i_plus_a() const { return ia_; }

  Vector solve_i_plus_a(const Vector& rhs) const { return ia_llt_.solve(rhs); }

  // psi-coordinate of the vertical part of V.
  Vector mu(const Matrix& v) const { return solve_i_plus_a((s_inv_ * v).diagonal()); }

  Matrix vertical(const Vector& mu) const { return s_.mat().cwiseProduct(psi(mu).mat()); }

 private:
  SpdMatrix s_;
  Eigen::LLT<Matrix> s_llt_;
  Matrix s_inv_;
  Matrix ia_;
  Eigen::LLT<Matrix> ia_llt_;
};

inline Vector sqrt_diag(const SpdMatrix& s) { return s.mat().diagonal().cwiseSqrt(); }

// max_i |[S^{-1} W + W S^{-1}]_ii|
inline double horizontality_residual(const Matrix& s_inv, const Matrix& w) {
  const Matrix m = s_inv * w;
  return (2.0 * m.diagonal()).cwiseAbs().maxCoeff();
}

}  // namespace detail

// Element S o psi(mu) of the vertical space at `base`.
struct VerticalVector {
  SpdMatrix base;
  Vector mu;

  SymMatrix value() const { return hadamard(base, psi(mu)); }
};

// Element of the horizontal space at `base`.
struct HorizontalVector {
  SpdMatrix base;
  SymMatrix value;

  double horizontality_residual() const {
    return detail::horizontality_residual(spd_inverse(base), value.mat());
  }
};

inline CorrMatrix submersion(const SpdMatrix& s) {
  const Vector inv_d = detail::sqrt_diag(s).cwiseInverse();
  return CorrMatrix::trusted(inv_d.asDiagonal() * s.mat() * inv_d.asDiagonal());
}

// d_S pi(V) = Delta^{-1} [V - 1/2 (Delta^{-2} Diag(V) S + S Diag(V) Delta^{-2})] Delta^{-1}
inline HollowSym d_submersion(const SpdMatrix& s, const SymMatrix& v) {
  SymMatrix::check_same_dim(s, v);
  const Vector d = detail::sqrt_diag(s);
  const Vector inv_d = d.cwiseInverse();
  const Vector scaled_diag = v.mat().diagonal().cwiseQuotient(s.mat().diagonal());
  const Matrix bracket = v.mat() - 0.5 * (scaled_diag.asDiagonal() * s.mat() +
                                          s.mat() * scaled_diag.asDiagonal());
  return HollowSym::hollow_part(
      SymMatrix::trusted(inv_d.asDiagonal() * bracket * inv_d.asDiagonal()));
}

inline VerticalVector vertical_proj(const SpdMatrix& s, const SymMatrix& v) {
  SymMatrix::check_same_dim(s, v);
  const detail::ProjectionFrame frame(s);
  return {s, frame.mu(v.mat())};
}

inline HorizontalVector horizontal_proj(const SpdMatrix& s, const SymMatrix& v) {
  SymMatrix::check_same_dim(s, v);
  const detail::ProjectionFrame frame(s);
  return {s, SymMatrix::trusted(v.mat() - frame.vertical(frame.mu(v.mat())))};
}

// X^# = hor_S(Delta X Delta), Delta = Diag(S)^{1/2}.
inline HorizontalVector horizontal_lift(const SpdMatrix& s, const HollowSym& x) {
  SymMatrix::check_same_dim(s, x);
  const Vector d = detail::sqrt_diag(s);
  return horizontal_proj(s, SymMatrix::trusted(d.asDiagonal() * x.mat() * d.asDiagonal()));
}

// g_C(X, Y) = G_C(X, Y) - 2 mu_X^T [a (I + A(C)) + 2 b 1 1^T] mu_Y.
inline double qa_metric(const CorrMatrix& c, const HollowSym& x, const HollowSym& y,
                        const MetricParams& p = {}) {
  SymMatrix::check_same_dim(c, x);
  SymMatrix::check_same_dim(c, y);
  const Index n = c.dim();
  p.validate(n);
  const detail::ProjectionFrame frame(c);
  const Vector mx = frame.mu(x.mat());
  const Vector my = frame.mu(y.mat());
  const Matrix weight = p.alpha * frame.i_plus_a() + 2.0 * p.beta * Matrix::Ones(n, n);
  return ai_metric(c, x, y, p) - 2.0 * mx.dot(weight * my);
}

// Exp_C(X) = pi(Exp^G_C(hor_C(X))); defined for every X.
inline CorrMatrix qa_exp(const CorrMatrix& c, const HollowSym& x) {
  SymMatrix::check_same_dim(c, x);
  return submersion(ai_exp(c, horizontal_proj(c, x).value));
}

// ---------------------------------------------------------------------------
// Logarithm by optimization over the fiber above C2.

enum class GradientMode { Analytic, FiniteDifference };

struct LogConfig {
  int max_iters = 500;
  double horizontality_tol = 1e-8;
  double roundtrip_tol = 1e-7;
  double fd_step = 1e-6;
  GradientMode gradient = GradientMode::Analytic;
};

struct LogReport {
  HollowSym log;
  // Fiber point D C2 D closest to C1.
  SpdMatrix fiber_point;
  Vector log_scale;  // d with D = exp(diag(d))
  double objective = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  double roundtrip_error = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(LogReport best)
      : Error(Errc::NoConvergence, message(best)), report_(std::move(best)) {}

  const LogReport& report() const { return report_; }

 private:
  static std::string message(const LogReport& r) {
    std::ostringstream os;
    os << "fiber optimization stopped after " << r.iterations
       << " iterations with horizontality residual " << r.residual;
    return os.str();
  }

  LogReport report_;
};

namespace detail {

// h(d) = d_AI(C1, D C2 D)^2 = ||log(C1^{-1/2} D C2 D C1^{-1/2})||_F^2 with D = exp(diag(d)).
// Its gradient is 4 Diag(C1^{-1} L) 1 with L = Log^G_{C1}(D C2 D), i.e. twice the
// horizontality defect, so stationarity and horizontality coincide.
class FiberObjective {
 public:
  FiberObjective(const CorrMatrix& c1, const CorrMatrix& c2) : c2_(c2.mat()), roots_(c1) {}

  // +inf outside the representable range, which the line search backs away from.
  double value(const Vector& d) const {
    const auto e = inner_eig(d);
    if (!e) return std::numeric_limits<double>::infinity();
    return e->values.array().log().square().sum();
  }

  double value_and_gradient(const Vector& d, Vector& grad) const {
    const auto oe = inner_eig(d);
    if (!oe) {
      grad = Vector::Constant(d.size(), std::numeric_limits<double>::quiet_NaN());
      return std::numeric_limits<double>::infinity();
    }
    const SymEig& e = *oe;
    const Vector logs = e.values.array().log();
    // C1^{-1} L = C1^{-1/2} log(M) C1^{1/2}
    const Matrix log_m = e.vectors * logs.asDiagonal() * e.vectors.transpose();
    grad = 4.0 * (roots_.inv_sqrt * log_m * roots_.sqrt).diagonal();
    return logs.squaredNorm();
  }

  double value_and_fd_gradient(const Vector& d, Vector& grad, double step) const {
    grad.resize(d.size());
    Vector probe = d;
    for (Index i = 0; i < d.size(); ++i) {
      probe(i) = d(i) + step;
      const double fp = value(probe);
      probe(i) = d(i) - step;
      const double fm = value(probe);
      probe(i) = d(i);
      grad(i) = (fp - fm) / (2.0 * step);
    }
    return value(d);
  }

  SpdMatrix fiber_point(const Vector& d) const {
    const Vector scale = d.array().exp();
    return SpdMatrix::trusted(scale.asDiagonal() * c2_ * scale.asDiagonal());
  }

 private:
  std::optional<SymEig> inner_eig(const Vector& d) const {
    const Vector scale = d.array().exp();
    if (!scale.allFinite() || !(scale.minCoeff() > 0.0)) return std::nullopt;
    const Matrix left = roots_.inv_sqrt * scale.asDiagonal();
    const Matrix m = left * c2_ * left.transpose();
    if (!m.allFinite()) return std::nullopt;
    SymEig e(SymMatrix::trusted(m));
    if (!(e.values.minCoeff() > 0.0)) return std::nullopt;
    return e;
  }

  Matrix c2_;
  SpdRoots roots_;
};

// Log_{C1}(Sigma) pushed down to T_{C1} Cor+(n), plus certificates.
inline LogReport finish_log(const CorrMatrix& c1, const CorrMatrix& c2, const Matrix& c1_inv,
                            const FiberObjective& obj, const Vector& d) {
  LogReport r;
  r.log_scale = d;
  r.fiber_point = obj.fiber_point(d);
  const SymMatrix lg = ai_log(c1, r.fiber_point);
  r.objective = obj.value(d);
  r.residual = horizontality_residual(c1_inv, lg.mat());
  r.log = d_submersion(c1, lg);
  r.roundtrip_error = detail::max_abs(qa_exp(c1, r.log).mat() - c2.mat());
  return r;
}

}  // namespace detail

// Runs the fiber optimization and returns the best iterate, converged or not.
inline LogReport qa_log_report(const CorrMatrix& c1, const CorrMatrix& c2,
                               const LogConfig& cfg = {}) {
  SymMatrix::check_same_dim(c1, c2);
  const Index n = c1.dim();
  const detail::FiberObjective obj(c1, c2);
  const Matrix c1_inv = spd_inverse(c1);

  auto run = [&](const Vector& d0) {
    auto f = [&](const Vector& d, Vector& g) {
      return cfg.gradient == GradientMode::Analytic ? obj.value_and_gradient(d, g)
                                                    : obj.value_and_fd_gradient(d, g, cfg.fd_step);
    };
    // The analytic gradient is twice the horizontality defect; the stop test
    // recomputes the defect exactly so it certifies either gradient mode.
    auto stop = [&](const Vector& d, double, const Vector& g) {
      if (cfg.gradient == GradientMode::Analytic) {
        return 0.5 * g.cwiseAbs().maxCoeff() <= cfg.horizontality_tol;
      }
      Vector exact;
      obj.value_and_gradient(d, exact);
      return 0.5 * exact.cwiseAbs().maxCoeff() <= cfg.horizontality_tol;
    };
    optim::BfgsOptions opt;
    opt.max_iters = cfg.max_iters;
    const optim::BfgsResult br = optim::minimize_bfgs(f, d0, stop, opt);
    LogReport r = detail::finish_log(c1, c2, c1_inv, obj, br.x);
    r.iterations = br.iterations;
    r.converged = r.residual <= cfg.horizontality_tol && r.roundtrip_error <= cfg.roundtrip_tol;
    return r;
  };

  LogReport best = run(Vector::Zero(n));
  if (best.converged) {
    return best;
  }

  // Restart from the scaling that matches Diag((D C2 D)^{-1}) to Diag(C1^{-1}).
  const Matrix c2_inv = spd_inverse(c2);
  const Vector d0 = 0.5 * (c2_inv.diagonal().cwiseQuotient(c1_inv.diagonal())).array().log();
  LogReport second = run(d0);
  second.restarts = 1;
  second.iterations += best.iterations;
  if (second.converged || second.residual < best.residual) {
    return second;
  }
  best.restarts = 1;
  best.iterations = second.iterations;
  return best;
}

// Throws NoConvergence (carrying the best iterate) when no certificate is reached.
inline HollowSym qa_log(const CorrMatrix& c1, const CorrMatrix& c2, const LogConfig& cfg = {}) {
  LogReport r = qa_log_report(c1, c2, cfg);
  if (!r.converged) {
    throw NoConvergence(std::move(r));
  }
  return r.log;
}

inline double qa_norm(const CorrMatrix& c, const HollowSym& x, const MetricParams& p = {}) {
  return std::sqrt(std::max(qa_metric(c, x, x, p), 0.0));
}

inline double qa_dist(const CorrMatrix& c1, const CorrMatrix& c2, const MetricParams& p = {},
                      const LogConfig& cfg = {}) {
  p.validate(c1.dim());
  return qa_norm(c1, qa_log(c1, c2, cfg), p);
}

// ---------------------------------------------------------------------------
// Connection and curvature, with lifts taken at C itself (Delta = I).

namespace detail {

// sym[Diag(X#) Y# + Diag(Y#) X# + Diag(X# C^{-1} Y#) C - X# C^{-1} Y#
//     - 1/2 Diag(X#) C Diag(Y#) - 3/2 Diag(X#) Diag(Y#) C]
inline SymMatrix connection_terms(const CorrMatrix& c, const HollowSym& x, const HollowSym& y) {
  const ProjectionFrame frame(c);
  const Matrix xs = x.mat() - frame.vertical(frame.mu(x.mat()));
  const Matrix ys = y.mat() - frame.vertical(frame.mu(y.mat()));
  const Matrix& ci = frame.inverse();
  const Matrix& cm = c.mat();
  const Matrix dx = diag_part(xs);
  const Matrix dy = diag_part(ys);
  const Matrix xcy = xs * ci * ys;
  const Matrix t = dx * ys + dy * xs + diag_part(xcy) * cm - xcy - 0.5 * dx * cm * dy -
                   1.5 * dx * dy * cm;
  return SymMatrix::trusted(t);
}

}  // namespace detail

// Levi-Civita connection in the hollow chart; dy is the Euclidean derivative of Y along X.
inline HollowSym qa_connection(const CorrMatrix& c, const HollowSym& x, const HollowSym& y,
                               const HollowSym& dy) {
  SymMatrix::check_same_dim(c, x);
  SymMatrix::check_same_dim(c, y);
  SymMatrix::check_same_dim(c, dy);
  return HollowSym::hollow_part(dy + detail::connection_terms(c, x, y));
}

// Euclidean derivative at C of the horizontal-lift field S -> hor_S(Delta_S Y Delta_S)
// (Y held constant) in the direction X#:
//
//   1/2 (Diag(X#) Y + Y Diag(X#)) - X# o psi(m) + C o psi((I + A)^{-1} D),
//   m = (I + A)^{-1} Diag(C^{-1} Y) 1,
//   D = Diag(C^{-1} X# C^{-1} Y) 1 + A' m - Diag(C^{-1} V') 1,
//   A' = X# o C^{-1} - C o (C^{-1} X# C^{-1}),  V' = 1/2 (Diag(X#) Y + Y Diag(X#)).
inline SymMatrix lift_derivative(const CorrMatrix& c, const HollowSym& x, const HollowSym& y) {
  SymMatrix::check_same_dim(c, x);
  SymMatrix::check_same_dim(c, y);
  const detail::ProjectionFrame frame(c);
  const Matrix& ci = frame.inverse();
  const Matrix& cm = c.mat();
  const Matrix xs = x.mat() - frame.vertical(frame.mu(x.mat()));
  const Matrix dx = diag_part(xs);

  const Vector m = frame.mu(y.mat());
  const Matrix v_dot = 0.5 * (dx * y.mat() + y.mat() * dx);
  const Matrix a_dot = xs.cwiseProduct(ci) - cm.cwiseProduct(ci * xs * ci);
  const Vector dvec = (ci * xs * ci * y.mat()).diagonal() + a_dot * m - (ci * v_dot).diagonal();
  const Vector nu = frame.solve_i_plus_a(dvec);

  return SymMatrix::trusted(v_dot - xs.cwiseProduct(psi(m).mat()) +
                            cm.cwiseProduct(psi(nu).mat()));
}

struct CurvatureTerms {
  double base = 0.0;        // affine-invariant sectional curvature of the lifted plane
  double correction = 0.0;  // 3/4 |ver [X#, Y#]|^2 / Gram
  double total() const { return base + correction; }
};

// O'Neill decomposition of the sectional curvature at (alpha, beta) = (1, 0).
inline CurvatureTerms qa_curvature_terms(const CorrMatrix& c, const HollowSym& x,
                                         const HollowSym& y) {
  SymMatrix::check_same_dim(c, x);
  SymMatrix::check_same_dim(c, y);
  if (c.dim() < 3) {
    throw Error(Errc::DimensionTooSmall, "sectional curvature needs n >= 3");
  }
  const double gxx = qa_metric(c, x, x);
  const double gyy = qa_metric(c, y, y);
  const double gxy = qa_metric(c, x, y);
  const double gram = gxx * gyy - gxy * gxy;
  if (!(gram > 1e-12 * gxx * gyy)) {
    throw Error(Errc::DegeneratePlane, "tangent vectors are (numerically) parallel");
  }
  const SymMatrix xs = horizontal_proj(c, x).value;
  const SymMatrix ys = horizontal_proj(c, y).value;
  const SymMatrix bracket = lift_derivative(c, x, y) - lift_derivative(c, y, x);
  const SymMatrix vb = vertical_proj(c, bracket).value();

  CurvatureTerms k;
  k.base = ai_curvature(c, xs, ys);
  k.correction = 0.75 * ai_metric(c, vb, vb) / gram;
  return k;
}

inline double qa_curvature(const CorrMatrix& c, const HollowSym& x, const HollowSym& y) {
  return qa_curvature_terms(c, x, y).total();
}

}  // namespace qacor
