#pragma once

// Dense symmetric kernel: spectral matrix functions, Hadamard algebra, the
// maps A(S) = S o S^{-1} and psi(mu) = mu 1^T + 1 mu^T, and the spectral
// Sylvester solver for S X + X S = V.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "qacor/error.hpp"
#include "qacor/types.hpp"

namespace qacor {

// Scalar function applied to eigenvalues.
struct SpectralFn {
  enum class Kind { Exp, Log, Sqrt, InvSqrt, Power };

  Kind kind = Kind::Exp;
  double exponent = 1.0;

  static constexpr SpectralFn exp() { return {Kind::Exp, 1.0}; }
  static constexpr SpectralFn log() { return {Kind::Log, 1.0}; }
  static constexpr SpectralFn sqrt() { return {Kind::Sqrt, 0.5}; }
  static constexpr SpectralFn inv_sqrt() { return {Kind::InvSqrt, -0.5}; }
  static constexpr SpectralFn power(double p) { return {Kind::Power, p}; }

  bool needs_positive() const {
    switch (kind) {
      case Kind::Exp: return false;
      case Kind::Log:
      case Kind::Sqrt:
      case Kind::InvSqrt: return true;
      case Kind::Power: return exponent != std::floor(exponent);
    }
    return true;
  }

  double operator()(double x) const {
    switch (kind) {
      case Kind::Exp: return std::exp(x);
      case Kind::Log: return std::log(x);
      case Kind::Sqrt: return std::sqrt(x);
      case Kind::InvSqrt: return 1.0 / std::sqrt(x);
      case Kind::Power: return std::pow(x, exponent);
    }
    return x;
  }
};

// Eigendecomposition M = Q diag(values) Q^T of a symmetric matrix.
struct SymEig {
  Vector values;
  Matrix vectors;

  explicit SymEig(const SymMatrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
    if (es.info() != Eigen::Success) {
      throw Error(Errc::EigFailure, "symmetric eigensolver did not converge");
    }
    values = es.eigenvalues();
    vectors = es.eigenvectors();
  }

  Index dim() const { return values.size(); }

  SymMatrix apply(const SpectralFn& f) const {
    if (f.needs_positive() || (f.kind == SpectralFn::Kind::Power && f.exponent < 0)) {
      const double lo = values.minCoeff();
      if (!(lo > 0.0)) {
        std::ostringstream os;
        os << "eigenvalue " << lo << " is not positive";
        throw Error(Errc::NonSpdInput, os.str());
      }
    }
    const Vector fv = values.unaryExpr([&](double x) { return f(x); });
    return SymMatrix::trusted(vectors * fv.asDiagonal() * vectors.transpose());
  }
};

inline SymMatrix sym_fun(const SymMatrix& m, const SpectralFn& f) { return SymEig(m).apply(f); }

// Spectral pieces of an SPD point reused by the affine-invariant formulas.
struct SpdRoots {
  Matrix sqrt;
  Matrix inv_sqrt;

  explicit SpdRoots(const SpdMatrix& s) {
    const SymEig e(s);
    sqrt = e.apply(SpectralFn::sqrt()).mat();
    inv_sqrt = e.apply(SpectralFn::inv_sqrt()).mat();
  }
};

inline SymMatrix hadamard(const SymMatrix& a, const SymMatrix& b) {
  SymMatrix::check_same_dim(a, b);
  return SymMatrix::trusted(a.mat().cwiseProduct(b.mat()));
}

inline Matrix spd_inverse(const SpdMatrix& s) {
  Eigen::LLT<Matrix> llt(s.mat());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::NonSpdInput, "Cholesky factorization failed");
  }
  return detail::symmetrized(llt.solve(Matrix::Identity(s.dim(), s.dim())));
}

// A(S) = S o S^{-1}; SPD by the Schur product theorem, invariant under S -> D S D.
inline SpdMatrix a_map(const SpdMatrix& s) {
  return SpdMatrix::trusted(s.mat().cwiseProduct(spd_inverse(s)));
}

inline SymMatrix psi(const Vector& mu) {
  const Index n = mu.size();
  const Vector ones = Vector::Ones(n);
  return SymMatrix::trusted(mu * ones.transpose() + ones * mu.transpose());
}

// Unique X with S X + X S = V, solved in the eigenbasis of S.
inline SymMatrix sylvester_spd(const SpdMatrix& s, const SymMatrix& v) {
  SymMatrix::check_same_dim(s, v);
  const SymEig e(s);
  if (!(e.values.minCoeff() > 0.0)) {
    throw Error(Errc::NonSpdInput, "Sylvester operator needs a positive spectrum");
  }
  Matrix w = e.vectors.transpose() * v.mat() * e.vectors;
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      w(i, j) /= e.values(i) + e.values(j);
    }
  }
  return SymMatrix::trusted(e.vectors * w * e.vectors.transpose());
}

// Diagonal of M as a vector, i.e. Diag(M) 1.
inline Vector diag_vec(const Matrix& m) { return m.diagonal(); }

// Diag(M) as a matrix.
inline Matrix diag_part(const Matrix& m) { return m.diagonal().asDiagonal(); }

}  // namespace qacor
