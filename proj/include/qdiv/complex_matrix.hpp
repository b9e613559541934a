#pragma once

#include <array>
#include <cmath>
#include <initializer_list>
#include <utility>

#include "qdiv/common.hpp"

namespace qdiv {

/// Dense complex matrix with a fixed 8x8 capacity and a runtime dimension.
/// Dimensions 1..8 cover everything that occurs here: qubit operators (2),
/// superoperator matrices (4), classical chains (<=3) and two-qubit or
/// qubit+qutrit extended states (4, 6, 8). Value semantics, no allocation.
class ComplexMatrix {
 public:
  static constexpr int kMaxDim = 8;

  ComplexMatrix() : dim_(0) { a_.fill(cxd(0.0, 0.0)); }

  explicit ComplexMatrix(int dim) : dim_(dim) {
    check_dim(dim);
    a_.fill(cxd(0.0, 0.0));
  }

  /// Row-major entries; list size must be dim*dim.
  ComplexMatrix(int dim, std::initializer_list<cxd> entries) : ComplexMatrix(dim) {
    if (static_cast<int>(entries.size()) != dim * dim)
      raise(ErrorCode::DimensionMismatch, "entry list does not match dimension");
    int k = 0;
    for (const cxd& e : entries) {
      a_[(k / dim) * kMaxDim + (k % dim)] = e;
      ++k;
    }
  }

  static ComplexMatrix zero(int dim) { return ComplexMatrix(dim); }

  static ComplexMatrix identity(int dim) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return dim_; }

  cxd& operator()(int r, int c) { return a_[r * kMaxDim + c]; }
  const cxd& operator()(int r, int c) const { return a_[r * kMaxDim + c]; }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_dim(o);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) += o(i, j);
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_dim(o);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
  }

  ComplexMatrix& operator*=(const cxd& s) {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) (*this)(i, j) *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, const cxd& s) { return a *= s; }
  friend ComplexMatrix operator*(const cxd& s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator-(const ComplexMatrix& a) { return a * cxd(-1.0, 0.0); }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    a.require_same_dim(b);
    const int n = a.dim_;
    ComplexMatrix r(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const cxd aik = a(i, k);
        if (aik == cxd(0.0, 0.0)) continue;
        for (int j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = std::conj((*this)(j, i));
    return r;
  }

  ComplexMatrix transpose() const {
    ComplexMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) r(i, j) = std::conj((*this)(i, j));
    return r;
  }

  cxd trace() const {
    cxd t(0.0, 0.0);
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) s += std::norm((*this)(i, j));
    return std::sqrt(s);
  }

  /// Hermitian within tol scaled by max(1, max|entry|).
  bool is_hermitian(double tolerance = tol::herm) const {
    const double scale = std::max(1.0, max_abs());
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tolerance * scale) return false;
    return true;
  }

  ComplexMatrix hermitian_part() const {
    ComplexMatrix r(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        r(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return r;
  }

 private:
  static void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim)
      raise(ErrorCode::DimensionOverflow, "matrix dimension must be in 1..8, got " + std::to_string(dim));
  }

  void require_same_dim(const ComplexMatrix& o) const {
    if (dim_ != o.dim_) raise(ErrorCode::DimensionMismatch, "matrix dimensions differ");
  }

  int dim_;
  std::array<cxd, kMaxDim * kMaxDim> a_;
};

/// Complex column vector, capacity 8.
class CVector {
 public:
  static constexpr int kMaxDim = 8;

  CVector() : dim_(0) { a_.fill(cxd(0.0, 0.0)); }

  explicit CVector(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim)
      raise(ErrorCode::DimensionOverflow, "vector dimension must be in 1..8");
    a_.fill(cxd(0.0, 0.0));
  }

  CVector(std::initializer_list<cxd> entries) : CVector(static_cast<int>(entries.size())) {
    int k = 0;
    for (const cxd& e : entries) a_[k++] = e;
  }

  int dim() const { return dim_; }
  cxd& operator[](int i) { return a_[i]; }
  const cxd& operator[](int i) const { return a_[i]; }

  CVector& operator+=(const CVector& o) {
    require_same_dim(o);
    for (int i = 0; i < dim_; ++i) a_[i] += o.a_[i];
    return *this;
  }
  CVector& operator-=(const CVector& o) {
    require_same_dim(o);
    for (int i = 0; i < dim_; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  CVector& operator*=(const cxd& s) {
    for (int i = 0; i < dim_; ++i) a_[i] *= s;
    return *this;
  }
  friend CVector operator+(CVector a, const CVector& b) { return a += b; }
  friend CVector operator-(CVector a, const CVector& b) { return a -= b; }
  friend CVector operator*(CVector a, const cxd& s) { return a *= s; }
  friend CVector operator*(const cxd& s, CVector a) { return a *= s; }

  double norm() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += std::norm(a_[i]);
    return std::sqrt(s);
  }

 private:
  void require_same_dim(const CVector& o) const {
    if (dim_ != o.dim_) raise(ErrorCode::DimensionMismatch, "vector dimensions differ");
  }

  int dim_;
  std::array<cxd, kMaxDim> a_;
};

/// Conjugate-linear in the first argument.
inline cxd inner(const CVector& a, const CVector& b) {
  if (a.dim() != b.dim()) raise(ErrorCode::DimensionMismatch, "vector dimensions differ");
  cxd s(0.0, 0.0);
  for (int i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline CVector operator*(const ComplexMatrix& m, const CVector& v) {
  if (m.dim() != v.dim()) raise(ErrorCode::DimensionMismatch, "matrix/vector dimensions differ");
  CVector r(v.dim());
  for (int i = 0; i < m.dim(); ++i) {
    cxd s(0.0, 0.0);
    for (int j = 0; j < m.dim(); ++j) s += m(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

/// Rank-one matrix a b^dagger.
inline ComplexMatrix outer(const CVector& a, const CVector& b) {
  if (a.dim() != b.dim()) raise(ErrorCode::DimensionMismatch, "vector dimensions differ");
  ComplexMatrix r(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) r(i, j) = a[i] * std::conj(b[j]);
  return r;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int n = a.dim() * b.dim();
  if (n > ComplexMatrix::kMaxDim)
    raise(ErrorCode::DimensionOverflow,
          "kron product dimension " + std::to_string(n) + " exceeds capacity 8");
  ComplexMatrix r(n);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      for (int k = 0; k < b.dim(); ++k)
        for (int l = 0; l < b.dim(); ++l)
          r(i * b.dim() + k, j * b.dim() + l) = a(i, j) * b(k, l);
  return r;
}

/// Row-stacking: vec(M)[dim*i + j] = M(i, j), so vec(A X B) = (A (x) B^T) vec(X).
/// Only needed for qubit operators (dim 2).
inline CVector vec(const ComplexMatrix& m) {
  const int n = m.dim() * m.dim();
  if (n > CVector::kMaxDim)
    raise(ErrorCode::DimensionOverflow, "vec target dimension exceeds capacity 8");
  CVector v(n);
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) v[m.dim() * i + j] = m(i, j);
  return v;
}

inline ComplexMatrix unvec(const CVector& v) {
  int d = 0;
  while (d * d < v.dim()) ++d;
  if (d * d != v.dim()) raise(ErrorCode::DimensionMismatch, "vector length is not a square");
  ComplexMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v[d * i + j];
  return m;
}

/// Trace out subsystem 0 (the first factor) or 1 (the second) of a matrix on
/// C^{dims.first} (x) C^{dims.second}.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, int subsystem,
                                   std::pair<int, int> dims) {
  const int da = dims.first, db = dims.second;
  if (da * db != m.dim()) raise(ErrorCode::DimensionMismatch, "dims do not factor the matrix");
  if (subsystem != 0 && subsystem != 1)
    raise(ErrorCode::DimensionMismatch, "subsystem index must be 0 or 1");
  if (subsystem == 0) {
    ComplexMatrix r(db);
    for (int k = 0; k < db; ++k)
      for (int l = 0; l < db; ++l) {
        cxd s(0.0, 0.0);
        for (int i = 0; i < da; ++i) s += m(i * db + k, i * db + l);
        r(k, l) = s;
      }
    return r;
  }
  ComplexMatrix r(da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) {
      cxd s(0.0, 0.0);
      for (int k = 0; k < db; ++k) s += m(i * db + k, j * db + k);
      r(i, j) = s;
    }
  return r;
}

/// Gaussian elimination with partial pivoting; returns A^{-1} B.
inline ComplexMatrix solve(ComplexMatrix a, ComplexMatrix b) {
  if (a.dim() != b.dim()) raise(ErrorCode::DimensionMismatch, "solve dimensions differ");
  const int n = a.dim();
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (std::abs(a(piv, col)) < 1e-300)
      raise(ErrorCode::SingularMatrix, "pivot vanished in solve");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(b(piv, j), b(col, j));
      }
    const cxd d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= d;
      b(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const cxd f = a(r, col);
      if (f == cxd(0.0, 0.0)) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        b(r, j) -= f * b(col, j);
      }
    }
  }
  return b;
}

inline ComplexMatrix inverse(const ComplexMatrix& a) {
  return solve(a, ComplexMatrix::identity(a.dim()));
}

inline ComplexMatrix pauli(int k) {
  switch (k) {
    case 0: return ComplexMatrix::identity(2);
    case 1: return ComplexMatrix(2, {0.0, 1.0, 1.0, 0.0});
    case 2: return ComplexMatrix(2, {0.0, cxd(0.0, -1.0), cxd(0.0, 1.0), 0.0});
    case 3: return ComplexMatrix(2, {1.0, 0.0, 0.0, -1.0});
    default: raise(ErrorCode::DimensionMismatch, "pauli index must be 0..3");
  }
}

}  // namespace qdiv
