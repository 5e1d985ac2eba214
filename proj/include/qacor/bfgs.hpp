#pragma once

// Small dense BFGS with a strong-Wolfe line search (bracketing + zoom with
// safeguarded cubic interpolation). Intended for the handful of variables of
// the fiber optimization; the inverse Hessian is stored densely.
//
// Close to a minimizer the decrease in f drops below its rounding error while
// the gradient is still informative. Steps are then also accepted under the
// approximate Wolfe conditions of Hager and Zhang:
//   f(a) <= f0 + eps |f0|  and  c2 phi'(0) <= phi'(a) <= (2 c1 - 1) phi'(0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qacor/types.hpp"

namespace qacor::optim {

struct BfgsOptions {
  int max_iters = 500;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
  double approx_eps = 1e-10;  // relative rounding allowance on f
};

enum class BfgsStatus { Converged, MaxIterations, LineSearchFailed };

struct BfgsResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  int evaluations = 0;
  BfgsStatus status = BfgsStatus::MaxIterations;
};

namespace detail {

// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb), clamped
// to the interior of [min(a,b), max(a,b)].
inline double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  double x = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = gb - ga + 2.0 * d2;
    if (denom != 0.0) {
      x = b - (b - a) * (gb + d2 - d1) / denom;
    }
  }
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(x) || x < lo + margin || x > hi - margin) {
    x = 0.5 * (a + b);
  }
  return x;
}

}  // namespace detail

// Objective: double(const Vector& x, Vector& grad) returning f(x) and filling grad.
// Stop: bool(const Vector& x, double fx, const Vector& grad), checked at every iterate.
template <typename Objective, typename Stop>
BfgsResult minimize_bfgs(Objective&& objective, const Vector& x0, Stop&& stop,
                         const BfgsOptions& opt = {}) {
  const Index n = x0.size();
  BfgsResult res;
  res.x = x0;
  res.gradient = Vector::Zero(n);
  res.value = objective(res.x, res.gradient);
  res.evaluations = 1;

  Matrix h = Matrix::Identity(n, n);
  bool scaled = false;

  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    if (stop(res.x, res.value, res.gradient)) {
      res.status = BfgsStatus::Converged;
      return res;
    }

    Vector dir = -h * res.gradient;
    double slope0 = res.gradient.dot(dir);
    if (!(slope0 < 0.0)) {
      h.setIdentity();
      dir = -res.gradient;
      slope0 = -res.gradient.squaredNorm();
      if (!(slope0 < 0.0)) {
        res.status = BfgsStatus::LineSearchFailed;
        return res;
      }
    }

    const double f0 = res.value;
    const double f_slack = opt.approx_eps * std::abs(f0);
    auto approx_wolfe = [&](double f, double s) {
      return f <= f0 + f_slack && s >= opt.c2 * slope0 && s <= (2.0 * opt.c1 - 1.0) * slope0;
    };
    auto phi = [&](double a, Vector& x, Vector& g, double& slope) {
      x = res.x + a * dir;
      const double f = objective(x, g);
      ++res.evaluations;
      slope = g.dot(dir);
      return f;
    };

    Vector x_new(n), g_new(n), x_tmp(n), g_tmp(n);
    double f_new = 0.0;
    bool found = false;
    auto accept = [&](double f) {
      x_new = x_tmp, g_new = g_tmp, f_new = f;
      found = true;
    };

    // Shrinks [lo, hi] around a strong-Wolfe point; lo always satisfies sufficient decrease.
    auto zoom = [&](double lo, double flo, double slo, double hi, double fhi, double shi) {
      for (int z = 0; z < opt.max_line_search; ++z) {
        const double aj = std::isfinite(fhi) && std::isfinite(shi)
                              ? detail::cubic_step(lo, flo, slo, hi, fhi, shi)
                              : 0.5 * (lo + hi);
        double sj = 0.0;
        const double fj = phi(aj, x_tmp, g_tmp, sj);
        if (approx_wolfe(fj, sj)) {
          accept(fj);
          return;
        }
        if (!std::isfinite(fj) || fj > f0 + opt.c1 * aj * slope0 || fj >= flo) {
          hi = aj, fhi = fj, shi = sj;
        } else {
          if (std::abs(sj) <= -opt.c2 * slope0) {
            accept(fj);
            return;
          }
          if (sj * (hi - lo) >= 0.0) {
            hi = lo, fhi = flo, shi = slo;
          }
          lo = aj, flo = fj, slo = sj;
        }
        if (std::abs(hi - lo) <= std::numeric_limits<double>::epsilon() * std::max(1.0, lo)) {
          break;
        }
      }
      if (lo > 0.0 && flo < f0) {
        // Sufficient decrease without the curvature condition.
        x_tmp = res.x + lo * dir;
        accept(objective(x_tmp, g_tmp));
        ++res.evaluations;
      }
    };

    double a_prev = 0.0, f_prev = f0, s_prev = slope0;
    double a = 1.0;
    for (int k = 0; k < opt.max_line_search; ++k) {
      double s = 0.0;
      const double f = phi(a, x_tmp, g_tmp, s);
      if (approx_wolfe(f, s)) {
        accept(f);
        break;
      }
      if (!std::isfinite(f) || f > f0 + opt.c1 * a * slope0 || (k > 0 && f >= f_prev)) {
        zoom(a_prev, f_prev, s_prev, a, f, s);
        break;
      }
      if (std::abs(s) <= -opt.c2 * slope0) {
        accept(f);
        break;
      }
      if (s >= 0.0) {
        zoom(a, f, s, a_prev, f_prev, s_prev);
        break;
      }
      a_prev = a, f_prev = f, s_prev = s;
      a *= 2.0;
    }

    if (!found || !(f_new <= f0 + f_slack)) {
      res.status = BfgsStatus::LineSearchFailed;
      return res;
    }

    const Vector sk = x_new - res.x;
    const Vector yk = g_new - res.gradient;
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;

    const double sy = sk.dot(yk);
    if (sy > 1e-14 * sk.norm() * yk.norm()) {
      if (!scaled) {
        h *= sy / yk.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix eye = Matrix::Identity(n, n);
      h = (eye - rho * sk * yk.transpose()) * h * (eye - rho * yk * sk.transpose()) +
          rho * sk * sk.transpose();
    }
  }

  res.status = stop(res.x, res.value, res.gradient) ? BfgsStatus::Converged
                                                     : BfgsStatus::MaxIterations;
  return res;
}

}  // namespace qacor::optim
