#pragma once

// Seeded generators for property sweeps.

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "qacor/matfun.hpp"
#include "qacor/quotient.hpp"
#include "qacor/types.hpp"

namespace qacor::random {

using Rng = std::mt19937_64;

inline double normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix gaussian(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline SymMatrix sym(Index n, Rng& rng) { return SymMatrix::trusted(gaussian(n, n, rng)); }

inline HollowSym hollow(Index n, Rng& rng) { return HollowSym::hollow_part(sym(n, rng)); }

inline Matrix orthogonal(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
  return qr.householderQ() * Matrix::Identity(n, n);
}

// SPD with log-eigenvalues uniform in [-log(cond)/2, log(cond)/2].
inline SpdMatrix spd(Index n, Rng& rng, double cond = 100.0) {
  const Matrix q = orthogonal(n, rng);
  const double h = 0.5 * std::log(cond);
  Vector ev(n);
  for (Index i = 0; i < n; ++i) ev(i) = std::exp(uniform(rng, -h, h));
  return SpdMatrix(Matrix(q * ev.asDiagonal() * q.transpose()));
}

inline Vector positive_diag(Index n, Rng& rng, double spread = 2.0) {
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::exp(uniform(rng, -std::log(spread), std::log(spread)));
  return d;
}

// Correlation matrix with every off-diagonal entry at most 1 - margin in magnitude.
inline CorrMatrix corr(Index n, Rng& rng, double margin = 0.02, double cond = 50.0) {
  while (true) {
    const CorrMatrix c = submersion(spd(n, rng, cond));
    Matrix off = c.mat();
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() <= 1.0 - margin) return c;
  }
}

}  // namespace qacor::random
