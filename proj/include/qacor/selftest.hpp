#pragma once

// Invariant sweeps shared by the `selftest` command and the acceptance suite.
//
// Each sweep returns the worst observed defect; suites compare it against a
// fixed tolerance. Residuals are absolute unless noted.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qacor/dim2.hpp"
#include "qacor/io.hpp"
#include "qacor/matfun.hpp"
#include "qacor/product.hpp"
#include "qacor/quotient.hpp"
#include "qacor/random.hpp"
#include "qacor/spd.hpp"

namespace qacor::selftest {

using random::Rng;

// Correlation coefficients of the 36-pair reference grid.
inline const std::vector<double>& rho_grid() {
  static const std::vector<double> g{-0.95, -0.5, 0.0, 0.05, 0.5, 0.95};
  return g;
}

inline MetricParams random_params(Index n, Rng& rng) {
  const double alpha = std::exp(random::uniform(rng, -1.0, 1.0));
  // beta in (-alpha/n, 2 alpha), kept 5% away from the lower bound.
  const double beta = random::uniform(rng, -0.95 * alpha / static_cast<double>(n), 2.0 * alpha);
  return {alpha, beta};
}

inline Vector random_diag(Index n, Rng& rng) { return random::positive_diag(n, rng, 3.0); }

inline SpdMatrix congruence(const Vector& d, const SpdMatrix& s) {
  return SpdMatrix::trusted(d.asDiagonal() * s.mat() * d.asDiagonal());
}

// ---------------------------------------------------------------------------
// Sweeps

struct Dim2Defects {
  double log = 0.0;
  double dist = 0.0;
  double exp = 0.0;
  double roundtrip = 0.0;
};

// General-n quotient operations against the closed forms over the reference grid.
inline Dim2Defects dim2_oracle_sweep(const LogConfig& cfg = {}) {
  Dim2Defects w;
  const std::vector<double> ts{-1.0, 0.3, 1.0, 1.7};
  for (double r1 : rho_grid()) {
    for (double r2 : rho_grid()) {
      const dim2::Rho a(r1), b(r2);
      const CorrMatrix c1 = a.matrix();
      const CorrMatrix c2 = b.matrix();
      const LogReport rep = qa_log_report(c1, c2, cfg);
      w.log = std::max(w.log, qacor::detail::max_abs(rep.log.mat() - dim2::log2d(a, b).mat()));
      w.dist = std::max(w.dist, std::abs(qa_norm(c1, rep.log) - dim2::dist2d(a, b)));
      w.roundtrip = std::max(w.roundtrip, rep.roundtrip_error);
      const HollowSym closed = dim2::log2d(a, b);
      for (double t : ts) {
        const double rho_t = qa_exp(c1, t * closed)(0, 1);
        w.exp = std::max(w.exp, std::abs(rho_t - dim2::geodesic2d_value(a, b, t)));
      }
    }
  }
  return w;
}

struct ProjectionDefects {
  double decomposition = 0.0;   // |hor + ver - V| / |V|
  double orthogonality = 0.0;   // |G(hor, ver)| / G(V, V)
  double horizontality = 0.0;   // |Diag(S^{-1} W + W S^{-1})|
  double vertical_kernel = 0.0; // |d pi(ver)|
};

inline ProjectionDefects projection_sweep(Rng& rng, int count, const std::vector<Index>& dims) {
  ProjectionDefects w;
  for (int k = 0; k < count; ++k) {
    const Index n = dims[k % dims.size()];
    const SpdMatrix s = random::spd(n, rng);
    const SymMatrix v = random::sym(n, rng);
    const MetricParams p = random_params(n, rng);
    const SymMatrix ver = vertical_proj(s, v).value();
    const HorizontalVector hor = horizontal_proj(s, v);
    w.decomposition = std::max(w.decomposition, qacor::detail::max_abs((hor.value + ver - v).mat()) / qacor::detail::max_abs(v.mat()));
    w.orthogonality = std::max(
        w.orthogonality, std::abs(ai_metric(s, hor.value, ver, p)) / ai_metric(s, v, v, p));
    w.horizontality = std::max(w.horizontality, hor.horizontality_residual());
    w.vertical_kernel = std::max(w.vertical_kernel, qacor::detail::max_abs(d_submersion(s, ver).mat()));
  }
  return w;
}

// |g_C(X, Y) - G_S(X#, Y#)| / max(1, |g_C(X, Y)|) over fiber points S = D C D.
inline double gauge_sweep(Rng& rng, int count, const std::vector<Index>& dims, int fiber_points) {
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const Index n = dims[k % dims.size()];
    const CorrMatrix c = random::corr(n, rng, 0.05);
    const HollowSym x = random::hollow(n, rng);
    const HollowSym y = random::hollow(n, rng);
    const MetricParams p = random_params(n, rng);
    const double closed = qa_metric(c, x, y, p);
    for (int f = 0; f < fiber_points; ++f) {
      const SpdMatrix s = congruence(random_diag(n, rng), c);
      const double lifted =
          ai_metric(s, horizontal_lift(s, x).value, horizontal_lift(s, y).value, p);
      worst = std::max(worst, std::abs(closed - lifted) / std::max(1.0, std::abs(closed)));
    }
  }
  return worst;
}

// |pi(Exp^G_S(t X#)) - Exp_{pi(S)}(t X)|
inline double geodesic_projection_sweep(Rng& rng, int count, const std::vector<Index>& dims,
                                        const std::vector<double>& ts) {
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const Index n = dims[k % dims.size()];
    const SpdMatrix s = congruence(random_diag(n, rng), random::corr(n, rng, 0.05));
    const HollowSym x = 0.5 * random::hollow(n, rng);
    const SymMatrix lift = horizontal_lift(s, x).value;
    const CorrMatrix c = submersion(s);
    for (double t : ts) {
      const Matrix up = submersion(ai_exp(s, t * lift)).mat();
      const Matrix down = qa_exp(c, t * x).mat();
      worst = std::max(worst, qacor::detail::max_abs(up - down));
    }
  }
  return worst;
}

struct RoundtripDefects {
  double roundtrip = 0.0;
  double horizontality = 0.0;
  int failures = 0;
};

inline RoundtripDefects exp_log_sweep(Rng& rng, int count, Index max_dim, const LogConfig& cfg = {}) {
  RoundtripDefects w;
  for (int k = 0; k < count; ++k) {
    const Index n = 2 + k % (max_dim - 1);
    const CorrMatrix c1 = random::corr(n, rng, 0.02);
    const CorrMatrix c2 = random::corr(n, rng, 0.02);
    const LogReport rep = qa_log_report(c1, c2, cfg);
    if (!rep.converged) ++w.failures;
    w.roundtrip = std::max(w.roundtrip, qacor::detail::max_abs(qa_exp(c1, rep.log).mat() - c2.mat()));
    w.horizontality = std::max(w.horizontality, rep.residual);
  }
  return w;
}

// |nabla_{g'} g'| along g(t) = Exp_C(tX) with central differences of step h.
inline double geodesic_equation_residual(const CorrMatrix& c, const HollowSym& x, double t,
                                         double h = 1e-3) {
  const Matrix gm = qa_exp(c, (t - h) * x).mat();
  const Matrix g0 = qa_exp(c, t * x).mat();
  const Matrix gp = qa_exp(c, (t + h) * x).mat();
  const HollowSym vel = HollowSym::hollow_part(SymMatrix::trusted((gp - gm) / (2.0 * h)));
  const HollowSym acc = HollowSym::hollow_part(SymMatrix::trusted((gp - 2.0 * g0 + gm) / (h * h)));
  return qacor::detail::max_abs(qa_connection(CorrMatrix::trusted(g0), vel, vel, acc).mat());
}

inline double connection_sweep(Rng& rng, int count, const std::vector<Index>& dims) {
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    const Index n = dims[k % dims.size()];
    const CorrMatrix c = random::corr(n, rng, 0.1);
    const HollowSym x = 0.5 * random::hollow(n, rng);
    for (double t : {0.0, 0.5}) {
      worst = std::max(worst, geodesic_equation_residual(c, x, t));
    }
  }
  return worst;
}

struct CurvatureSigns {
  double max_base = -std::numeric_limits<double>::infinity();
  double min_correction = std::numeric_limits<double>::infinity();
  int negative_total = 0;
  int positive_total = 0;
};

inline CurvatureSigns curvature_sweep(Rng& rng, int count, const std::vector<Index>& dims) {
  CurvatureSigns s;
  for (int k = 0; k < count; ++k) {
    const Index n = dims[k % dims.size()];
    const CorrMatrix c = random::corr(n, rng, 0.05);
    const CurvatureTerms terms = qa_curvature_terms(c, random::hollow(n, rng), random::hollow(n, rng));
    s.max_base = std::max(s.max_base, terms.base);
    s.min_correction = std::min(s.min_correction, terms.correction);
    (terms.total() < 0.0 ? s.negative_total : s.positive_total) += 1;
  }
  return s;
}

struct ProductDefects {
  double p_independence = 0.0;   // max |rho_p(t) - rho_q(t)|
  bool rho_monotone = true;
  double trace_affinity = 0.0;   // Euclidean: |tr(t) - affine interpolant|
  double logdet_affinity = 0.0;  // LE and AI: |log det(t) - affine interpolant|
  double endpoints = 0.0;
};

// n = 2 product and comparison geodesics between s1 and s2, sampled at `samples` points of [0, 1].
inline ProductDefects product_sweep(const SpdMatrix& s1, const SpdMatrix& s2, int samples,
                                    const std::vector<double>& ps = {-1.0, 0.0, 1.0, 2.0},
                                    const LogConfig& cfg = {}) {
  ProductDefects w;
  const std::vector<double> ts = linspace(0.0, 1.0, samples);
  std::vector<ProductGeodesic> curves;
  for (double p : ps) curves.emplace_back(s1, s2, p, cfg);

  std::vector<double> ref;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::vector<double> rho;
    for (double t : ts) {
      const SpdMatrix s = curves[i](t);
      rho.push_back(submersion(s)(0, 1));
    }
    w.endpoints = std::max({w.endpoints, qacor::detail::max_abs(curves[i](0.0).mat() - s1.mat()),
                            qacor::detail::max_abs(curves[i](1.0).mat() - s2.mat())});
    const double dir = rho.back() - rho.front();
    for (std::size_t k = 1; k < rho.size(); ++k) {
      if ((rho[k] - rho[k - 1]) * dir < 0.0) w.rho_monotone = false;
    }
    if (i == 0) {
      ref = rho;
    } else {
      for (std::size_t k = 0; k < rho.size(); ++k)
        w.p_independence = std::max(w.p_independence, std::abs(rho[k] - ref[k]));
    }
  }

  const double tr1 = s1.mat().trace(), tr2 = s2.mat().trace();
  const double ld1 = std::log(s1.mat().determinant()), ld2 = std::log(s2.mat().determinant());
  const ComparisonGeodesic eu(s1, s2, ComparisonKind::Euclidean);
  const ComparisonGeodesic le(s1, s2, ComparisonKind::LogEuclidean);
  const ComparisonGeodesic ai(s1, s2, ComparisonKind::AffineInvariant);
  for (double t : ts) {
    w.trace_affinity =
        std::max(w.trace_affinity, std::abs(eu(t).mat().trace() - ((1 - t) * tr1 + t * tr2)));
    for (const auto* g : {&le, &ai}) {
      const CurveSample cs = sample_statistics(t, (*g)(t));
      w.logdet_affinity =
          std::max(w.logdet_affinity, std::abs(std::log(cs.det) - ((1 - t) * ld1 + t * ld2)));
    }
  }
  return w;
}

struct MatfunDefects {
  double log_exp = 0.0;   // relative Frobenius
  double a_map_invariance = 0.0;
  double sylvester = 0.0; // relative Frobenius residual
};

inline MatfunDefects matfun_sweep(Rng& rng, int count) {
  MatfunDefects w;
  for (int k = 0; k < count; ++k) {
    const Index n = 2 + k % 7;
    const SpdMatrix s = random::spd(n, rng, 1e6);
    const SymMatrix back = sym_fun(sym_fun(s, SpectralFn::log()), SpectralFn::exp());
    w.log_exp = std::max(w.log_exp, (back - s).norm() / s.norm());
    const SpdMatrix moved = congruence(random_diag(n, rng), s);
    const Matrix a = a_map(s).mat();
    w.a_map_invariance = std::max(
        w.a_map_invariance, qacor::detail::max_abs(a_map(moved).mat() - a) / qacor::detail::max_abs(a));
    const SymMatrix v = random::sym(n, rng);
    const Matrix x = sylvester_spd(s, v).mat();
    w.sylvester = std::max(w.sylvester, (s.mat() * x + x * s.mat() - v.mat()).norm() / v.norm());
  }
  return w;
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  unsigned seed = 20211;
  // Suite whose measured defect is perturbed to exercise failure reporting.
  std::optional<std::string> inject_failure;
};

namespace internal {

struct Check {
  std::string label;
  double value;
  double limit;
  bool below = true;  // pass iff value <= limit; otherwise pass iff value >= limit
};

inline SuiteResult evaluate(std::string name, std::vector<Check> checks, const Options& opt) {
  SuiteResult r;
  r.name = std::move(name);
  const bool inject = opt.inject_failure && *opt.inject_failure == r.name;
  r.passed = true;
  for (auto& c : checks) {
    if (inject) c.value += c.below ? 1.0 : -1.0;
    const bool ok = c.below ? c.value <= c.limit : c.value >= c.limit;
    r.passed = r.passed && ok;
    if (!r.detail.empty()) r.detail += "; ";
    r.detail += c.label + "=" + io::format_double(c.value) + (c.below ? " <= " : " >= ") +
                io::format_double(c.limit) + (ok ? "" : " FAILED");
  }
  return r;
}

}  // namespace internal

inline std::vector<std::string> suite_names() {
  return {"matfun", "dim2_oracle", "projections", "gauge", "geodesic_projection",
          "exp_log_roundtrip", "connection_curvature", "product"};
}

inline std::vector<SuiteResult> run(const Options& opt = {}) {
  using Clock = std::chrono::steady_clock;
  std::vector<SuiteResult> out;
  Rng rng(opt.seed);

  auto timed = [&](auto&& body) {
    const auto start = Clock::now();
    SuiteResult r = body();
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    out.push_back(std::move(r));
  };

  timed([&] {
    const MatfunDefects d = matfun_sweep(rng, 40);
    return internal::evaluate("matfun",
                            {{"log_exp", d.log_exp, 1e-10},
                             {"a_map_invariance", d.a_map_invariance, 1e-9},
                             {"sylvester", d.sylvester, 1e-10}},
                            opt);
  });
  timed([&] {
    const Dim2Defects d = dim2_oracle_sweep();
    return internal::evaluate("dim2_oracle",
                            {{"log", d.log, 1e-8}, {"dist", d.dist, 1e-8}, {"exp", d.exp, 1e-8}},
                            opt);
  });
  timed([&] {
    const ProjectionDefects d = projection_sweep(rng, 500, {2, 3, 5});
    return internal::evaluate("projections",
                            {{"decomposition", d.decomposition, 1e-12},
                             {"orthogonality", d.orthogonality, 1e-9},
                             {"horizontality", d.horizontality, 1e-10},
                             {"vertical_kernel", d.vertical_kernel, 1e-10}},
                            opt);
  });
  timed([&] {
    return internal::evaluate("gauge", {{"metric_gap", gauge_sweep(rng, 100, {2, 3, 4, 5}, 5), 1e-9}},
                            opt);
  });
  timed([&] {
    const double d = geodesic_projection_sweep(rng, 60, {2, 3, 4}, {-2.0, -1.0, 0.5, 1.0, 3.0});
    return internal::evaluate("geodesic_projection", {{"projection_gap", d, 1e-9}}, opt);
  });
  timed([&] {
    const RoundtripDefects d = exp_log_sweep(rng, 100, 5);
    return internal::evaluate("exp_log_roundtrip",
                            {{"roundtrip", d.roundtrip, 1e-7},
                             {"horizontality", d.horizontality, 1e-8},
                             {"failures", static_cast<double>(d.failures), 0.0}},
                            opt);
  });
  timed([&] {
    const double geo = connection_sweep(rng, 50, {2, 3, 4});
    const CurvatureSigns k = curvature_sweep(rng, 500, {3, 4});
    return internal::evaluate("connection_curvature",
                            {{"geodesic_equation", geo, 1e-4},
                             {"max_base_term", k.max_base, 1e-12},
                             {"min_correction_term", k.min_correction, -1e-12, false}},
                            opt);
  });
  timed([&] {
    Matrix a(2, 2), b(2, 2);
    a << 4, 1, 1, 100;
    b << 100, 19, 19, 4;
    const ProductDefects d = product_sweep(SpdMatrix(a), SpdMatrix(b), 101);
    return internal::evaluate("product",
                            {{"p_independence", d.p_independence, 1e-9},
                             {"rho_monotone", d.rho_monotone ? 1.0 : 0.0, 1.0, false},
                             {"trace_affinity", d.trace_affinity, 1e-9},
                             {"logdet_affinity", d.logdet_affinity, 1e-9},
                             {"endpoints", d.endpoints, 1e-7}},
                            opt);
  });
  return out;
}

}  // namespace qacor::selftest
