#pragma once

// Closed-form quotient-affine geometry of Cor+(2) = {C(rho) : -1 < rho < 1},
// C(rho) = [[1, rho], [rho, 1]], at (alpha, beta) = (1, 0). Used as an exact
// reference for the general-n code paths.

#include <cmath>
#include <sstream>

#include "qacor/error.hpp"
#include "qacor/types.hpp"

namespace qacor::dim2 {

class Rho {
 public:
  explicit Rho(double value) : value_(value) {
    if (!(std::abs(value) < 1.0)) {
      std::ostringstream os;
      os << "correlation coefficient " << value << " is not inside (-1, 1)";
      throw Error(Errc::OutOfDomain, os.str());
    }
  }

  double value() const { return value_; }
  operator double() const { return value_; }

  CorrMatrix matrix() const { return corr2(value_); }

 private:
  double value_;
};

// f(rho) = (1 + rho) / (1 - rho), increasing from (-1, 1) onto (0, inf).
inline double f_map(Rho rho) { return (1.0 + rho) / (1.0 - rho); }

// lambda = 1/2 log(f(rho2) / f(rho1)), evaluated as a difference of logs.
// log f(rho) = log1p(rho) - log1p(-rho) keeps precision near rho = 0.
inline double lambda_of(Rho rho1, Rho rho2) {
  auto log_f = [](double r) { return std::log1p(r) - std::log1p(-r); };
  return 0.5 * (log_f(rho2) - log_f(rho1));
}

// Log_{C1}(C2) = lambda [[0, 1 - rho1^2], [1 - rho1^2, 0]].
inline HollowSym log2d(Rho rho1, Rho rho2) {
  const double off = lambda_of(rho1, rho2) * (1.0 - rho1 * rho1);
  Matrix m(2, 2);
  m << 0.0, off, off, 0.0;
  return HollowSym(m);
}

inline double dist2d(Rho rho1, Rho rho2) {
  return std::sqrt(2.0) * std::abs(lambda_of(rho1, rho2));
}

// rho(t) = (rho1 cosh(lambda t) + sinh(lambda t)) / (rho1 sinh(lambda t) + cosh(lambda t)),
// with numerator and denominator divided by cosh(lambda t) to avoid overflow.
inline double geodesic2d_value(Rho rho1, Rho rho2, double t) {
  const double th = std::tanh(lambda_of(rho1, rho2) * t);
  return (rho1 + th) / (rho1 * th + 1.0);
}

inline Rho geodesic2d(Rho rho1, Rho rho2, double t) { return Rho(geodesic2d_value(rho1, rho2, t)); }

// rho'' = -2 lambda^2 rho (1 - rho^2) along the geodesic.
inline double geodesic2d_second_derivative(Rho rho1, Rho rho2, double t) {
  const double lam = lambda_of(rho1, rho2);
  const double r = geodesic2d_value(rho1, rho2, t);
  return -2.0 * lam * lam * r * (1.0 - r * r);
}

}  // namespace qacor::dim2
