#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "qdiv/complex_matrix.hpp"

namespace qdiv {

/// Eigenvalues sorted descending; vectors[k] is the unit eigenvector for values[k].
struct EigenDecomposition {
  std::vector<double> values;
  std::vector<CVector> vectors;
};

namespace detail {

inline double offdiag_mass(const ComplexMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace detail

/// Cyclic complex Jacobi for Hermitian matrices, dimensions up to 8.
/// Sweeps until the off-diagonal Frobenius mass drops below 1e-14 (scaled by
/// the Frobenius norm when that exceeds 1). Deterministic: fixed sweep order,
/// no data-dependent branching beyond the rotation itself.
inline EigenDecomposition hermitian_eigen(const ComplexMatrix& m) {
  if (!m.is_hermitian())
    raise(ErrorCode::NonHermitianInput, "hermitian_eigen requires a Hermitian matrix");
  const int n = m.dim();
  ComplexMatrix a = m.hermitian_part();
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double stop = 1e-14 * std::max(1.0, a.frobenius_norm());
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps && detail::offdiag_mass(a) > stop; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cxd g = a(p, q);
        const double r = std::abs(g);
        if (r <= 1e-300) continue;
        const cxd u = g / r;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        double phi = 0.5 * std::atan2(2.0 * r, app - aqq);
        if (phi > std::numbers::pi / 4.0) phi -= std::numbers::pi / 2.0;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        // J restricted to rows/cols (p,q): [[c, -s], [conj(u)*s, conj(u)*c]].
        const cxd jpp = c, jpq = -s;
        const cxd jqp = std::conj(u) * s, jqq = std::conj(u) * c;
        for (int i = 0; i < n; ++i) {  // A <- J^dagger A
          const cxd tp = a(p, i), tq = a(q, i);
          a(p, i) = std::conj(jpp) * tp + std::conj(jqp) * tq;
          a(q, i) = std::conj(jpq) * tp + std::conj(jqq) * tq;
        }
        for (int i = 0; i < n; ++i) {  // A <- A J, V <- V J
          const cxd tp = a(i, p), tq = a(i, q);
          a(i, p) = tp * jpp + tq * jqp;
          a(i, q) = tp * jpq + tq * jqq;
          const cxd wp = v(i, p), wq = v(i, q);
          v(i, p) = wp * jpp + wq * jqp;
          v(i, q) = wp * jpq + wq * jqq;
        }
        a(p, q) = cxd(0.5, 0.0) * (a(p, q) + std::conj(a(q, p)));
        a(q, p) = std::conj(a(p, q));
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = a(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return diag[x] > diag[y]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, CVector(n));
  for (int k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    for (int i = 0; i < n; ++i) out.vectors[k][i] = v(i, order[k]);
  }
  return out;
}

/// Sum of |eigenvalue| for a Hermitian matrix. Rejects non-Hermitian input.
inline double trace_norm(const ComplexMatrix& m) {
  if (!m.is_hermitian())
    raise(ErrorCode::NonHermitianInput, "trace_norm is defined here for Hermitian input only");
  EigenDecomposition e = hermitian_eigen(m);
  double s = 0.0;
  for (double x : e.values) s += std::abs(x);
  return s;
}

/// Compact SVD for dim <= 4, through the Hermitian embedding
/// [[0, M], [M^dagger, 0]] whose spectrum is {+-sigma_i}. Going through
/// M^dagger M would square the condition number and blur exactly-zero
/// singular values up to ~1e-8 relative, the same order as the rank cutoff;
/// the embedding resolves them at ~1e-15.
struct SingularDecomposition {
  std::vector<double> sigma;    // all dim values, descending, clamped >= 0
  std::vector<CVector> left;    // only for sigma > cut: M v = sigma u
  std::vector<CVector> right;
  double cut = 0.0;
};

inline SingularDecomposition svd_small(const ComplexMatrix& m, double rel_tol) {
  const int n = m.dim();
  if (2 * n > ComplexMatrix::kMaxDim)
    raise(ErrorCode::DimensionOverflow, "svd_small supports dimensions up to 4");
  ComplexMatrix b(2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      b(i, n + j) = m(i, j);
      b(n + i, j) = std::conj(m(j, i));
    }
  const EigenDecomposition e = hermitian_eigen(b);
  SingularDecomposition out;
  out.sigma.resize(n);
  for (int k = 0; k < n; ++k) out.sigma[k] = std::max(0.0, e.values[k]);
  if (out.sigma[0] <= 0.0)
    raise(ErrorCode::InvalidTP, "zero matrix has no singular profile");
  out.cut = rel_tol * out.sigma[0];
  for (int k = 0; k < n; ++k) {
    if (out.sigma[k] <= out.cut) continue;
    CVector u(n), v(n);
    for (int i = 0; i < n; ++i) {
      u[i] = e.vectors[k][i];
      v[i] = e.vectors[k][n + i];
    }
    u *= cxd(1.0 / u.norm(), 0.0);
    v *= cxd(1.0 / v.norm(), 0.0);
    out.left.push_back(u);
    out.right.push_back(v);
  }
  return out;
}

/// Moore-Penrose inverse with relative singular value cutoff.
inline ComplexMatrix pinv_small(const ComplexMatrix& m, double rel_tol) {
  const SingularDecomposition s = svd_small(m, rel_tol);
  ComplexMatrix p(m.dim());
  for (std::size_t k = 0; k < s.left.size(); ++k)
    p += cxd(1.0 / s.sigma[k], 0.0) * outer(s.right[k], s.left[k]);
  return p;
}

}  // namespace qdiv
