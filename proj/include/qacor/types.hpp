#pragma once

// Value types for points and tangent vectors of Sym+(n) and Cor+(n).
//
// Every type owns a dense Eigen matrix and validates it once at construction.
// The hierarchy mirrors set inclusion: an SpdMatrix is a SymMatrix, a
// CorrMatrix is an SpdMatrix, a HollowSym is a SymMatrix. Derived types add no
// data members, so passing them by base reference or slicing them is safe.
//
// The `trusted` factories skip validation. They exist for results that hold
// the invariant by construction (the exponential of a symmetric matrix is
// SPD) but may fail the conditioning threshold at extreme arguments.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

#include "qacor/error.hpp"

namespace qacor {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tol {
// Relative asymmetry accepted (and removed) at construction.
inline constexpr double kSymmetry = 1e-10;
// Smallest eigenvalue must exceed this times the largest.
inline constexpr double kSpdRelative = 1e-12;
// Unit-diagonal slack; off-diagonals must stay this far inside (-1, 1).
inline constexpr double kCorrelation = 1e-12;
}  // namespace tol

namespace detail {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace detail

class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& m) : m_(checked(m)) {}

  static SymMatrix zero(Index n) { return trusted(Matrix::Zero(n, n)); }
  static SymMatrix identity(Index n) { return trusted(Matrix::Identity(n, n)); }

  // Symmetrizes without the asymmetry check.
  static SymMatrix trusted(const Matrix& m) {
    SymMatrix s;
    s.m_ = detail::symmetrized(m);
    return s;
  }

  const Matrix& mat() const { return m_; }
  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double norm() const { return m_.norm(); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    check_same_dim(a, b);
    return raw(a.m_ + b.m_);
  }
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    check_same_dim(a, b);
    return raw(a.m_ - b.m_);
  }
  friend SymMatrix operator*(double s, const SymMatrix& a) { return raw(s * a.m_); }
  friend SymMatrix operator-(const SymMatrix& a) { return raw(-a.m_); }

  static void check_same_dim(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) {
      throw Error(Errc::DimensionMismatch,
                  "dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
  }

 protected:
  // Entrywise combinations of exactly symmetric matrices stay exactly symmetric.
  static SymMatrix raw(Matrix m) {
    SymMatrix s;
    s.m_ = std::move(m);
    return s;
  }

  static Matrix checked(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw Error(Errc::NotSquare, "matrix is " + detail::dims(m));
    }
    if (!m.allFinite()) {
      throw Error(Errc::NonFinite, "matrix has NaN or Inf entries");
    }
    const double asym = detail::max_abs(m - m.transpose());
    if (asym > tol::kSymmetry * detail::max_abs(m)) {
      std::ostringstream os;
      os << "max |M - M^T| = " << asym << " exceeds " << tol::kSymmetry << " * max |M|";
      throw Error(Errc::NotSymmetric, os.str());
    }
    return detail::symmetrized(m);
  }

  Matrix m_;
};

class HollowSym : public SymMatrix {
 public:
  HollowSym() = default;

  // The diagonal must be exactly zero.
  explicit HollowSym(const Matrix& m) : SymMatrix(m) {
    for (Index i = 0; i < dim(); ++i) {
      if (m_(i, i) != 0.0) {
        throw Error(Errc::NotHollow, "diagonal entry " + std::to_string(i) + " is nonzero");
      }
    }
  }

  static HollowSym zero(Index n) { return hollow_part(SymMatrix::zero(n)); }

  // Off-diagonal part of a symmetric matrix.
  static HollowSym hollow_part(const SymMatrix& s) {
    HollowSym h;
    h.m_ = s.mat();
    h.m_.diagonal().setZero();
    return h;
  }

  friend HollowSym operator+(const HollowSym& a, const HollowSym& b) {
    return hollow_part(static_cast<const SymMatrix&>(a) + b);
  }
  friend HollowSym operator-(const HollowSym& a, const HollowSym& b) {
    return hollow_part(static_cast<const SymMatrix&>(a) - b);
  }
  friend HollowSym operator*(double s, const HollowSym& a) {
    return hollow_part(s * static_cast<const SymMatrix&>(a));
  }
};

class SpdMatrix : public SymMatrix {
 public:
  SpdMatrix() = default;

  explicit SpdMatrix(const Matrix& m) : SpdMatrix(SymMatrix(m)) {}

  explicit SpdMatrix(const SymMatrix& s) : SymMatrix(s) { check_spd(m_); }

  static SpdMatrix identity(Index n) { return trusted(Matrix::Identity(n, n)); }

  static SpdMatrix trusted(const Matrix& m) {
    SpdMatrix s;
    s.m_ = detail::symmetrized(m);
    return s;
  }

 protected:
  static void check_spd(const Matrix& m) {
    if (m.rows() == 0) {
      throw Error(Errc::NonSpdInput, "empty matrix");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw Error(Errc::EigFailure, "eigensolver did not converge");
    }
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || !(lo > tol::kSpdRelative * hi)) {
      std::ostringstream os;
      os << "smallest eigenvalue " << lo << " is not above " << tol::kSpdRelative
         << " * largest eigenvalue " << hi;
      throw Error(Errc::NonSpdInput, os.str());
    }
  }
};

class CorrMatrix : public SpdMatrix {
 public:
  CorrMatrix() = default;

  // Diagonal entries within 1e-12 of one are snapped to exactly one.
  explicit CorrMatrix(const Matrix& m) : CorrMatrix(SymMatrix(m)) {}

  explicit CorrMatrix(const SymMatrix& s) {
    Matrix c = s.mat();
    const Index n = c.rows();
    for (Index i = 0; i < n; ++i) {
      if (std::abs(c(i, i) - 1.0) > tol::kCorrelation) {
        throw Error(Errc::NotCorrelation,
                    "diagonal entry " + std::to_string(i) + " is not 1 (unit diagonal)");
      }
      c(i, i) = 1.0;
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (!(std::abs(c(i, j)) < 1.0 - tol::kCorrelation)) {
          throw Error(Errc::NotCorrelation,
                      "entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") is not inside (-1, 1): outside the open elliptope");
        }
      }
    }
    check_spd(c);
    m_ = std::move(c);
  }

  static CorrMatrix identity(Index n) { return trusted(Matrix::Identity(n, n)); }

  static CorrMatrix trusted(const Matrix& m) {
    CorrMatrix c;
    c.m_ = detail::symmetrized(m);
    c.m_.diagonal().setOnes();
    return c;
  }
};

// 2x2 correlation matrix with off-diagonal rho.
inline CorrMatrix corr2(double rho) {
  Matrix c(2, 2);
  c << 1.0, rho, rho, 1.0;
  return CorrMatrix(c);
}

}  // namespace qacor
