#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qdiv/eigen.hpp"
#include "qdiv/sampling.hpp"

namespace qdiv {

/// Linear map on qubit operators, stored as its 4x4 matrix in the row-vec
/// basis: vec(S[X]) = M vec(X). Generators and channels share this type.
class Superoperator {
 public:
  Superoperator() : m_(4) {}

  explicit Superoperator(const ComplexMatrix& m) : m_(m) {
    if (m.dim() != 4) raise(ErrorCode::DimensionMismatch, "superoperator matrix must be 4x4");
  }

  static Superoperator identity() { return Superoperator(ComplexMatrix::identity(4)); }
  static Superoperator zero() { return Superoperator(); }

  const ComplexMatrix& matrix() const { return m_; }
  ComplexMatrix& matrix() { return m_; }

  ComplexMatrix apply(const ComplexMatrix& rho) const {
    if (rho.dim() != 2) raise(ErrorCode::DimensionMismatch, "superoperator acts on 2x2 operators");
    return unvec(m_ * vec(rho));
  }

  /// Composition: (a * b)[X] = a[b[X]].
  friend Superoperator operator*(const Superoperator& a, const Superoperator& b) {
    return Superoperator(a.m_ * b.m_);
  }
  friend Superoperator operator+(const Superoperator& a, const Superoperator& b) {
    return Superoperator(a.m_ + b.m_);
  }
  friend Superoperator operator-(const Superoperator& a, const Superoperator& b) {
    return Superoperator(a.m_ - b.m_);
  }
  friend Superoperator operator*(const cxd& s, const Superoperator& a) {
    return Superoperator(s * a.m_);
  }

 private:
  ComplexMatrix m_;
};

/// X -> A X B as a superoperator; vec(A X B) = (A (x) B^T) vec(X).
inline Superoperator sandwich(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Superoperator(kron(a, b.transpose()));
}

inline Superoperator left_mult(const ComplexMatrix& a) {
  return sandwich(a, ComplexMatrix::identity(2));
}

inline Superoperator right_mult(const ComplexMatrix& b) {
  return sandwich(ComplexMatrix::identity(2), b);
}

/// rho -> U rho U^dagger.
inline Superoperator conjugation(const ComplexMatrix& u) {
  return sandwich(u, u.adjoint());
}

/// Lindblad dissipator L . L^dagger - 1/2 {L^dagger L, .}.
inline Superoperator dissipator(const ComplexMatrix& l) {
  const ComplexMatrix ll = l.adjoint() * l;
  return sandwich(l, l.adjoint()) - cxd(0.5, 0.0) * (left_mult(ll) + right_mult(ll));
}

inline Superoperator from_kraus(const std::vector<ComplexMatrix>& ops,
                                const std::vector<double>& weights) {
  if (ops.empty()) raise(ErrorCode::EmptyKrausList, "no Kraus operators given");
  if (ops.size() != weights.size())
    raise(ErrorCode::DimensionMismatch, "Kraus operator and weight counts differ");
  ComplexMatrix m(4);
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].dim() != 2) raise(ErrorCode::DimensionMismatch, "Kraus operators must be 2x2");
    m += weights[k] * kron(ops[k], ops[k].conjugate());
  }
  return Superoperator(m);
}

/// Unital qubit channel acting diagonally in the Pauli basis:
/// 1 -> 1, sigma_k -> s_k sigma_k.
inline Superoperator bloch_scaling_map(double sx, double sy, double sz) {
  ComplexMatrix m(4);
  const double s[4] = {1.0, sx, sy, sz};
  for (int alpha = 0; alpha < 4; ++alpha) {
    const CVector p = vec(pauli(alpha));
    m += cxd(0.5 * s[alpha], 0.0) * outer(p, p);
  }
  return Superoperator(m);
}

/// Choi matrix sum_{ij} |i><j| (x) S[|i><j|]; first factor carries the input index.
inline ComplexMatrix choi(const Superoperator& s) {
  const ComplexMatrix& m = s.matrix();
  ComplexMatrix g(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) g(2 * i + k, 2 * j + l) = m(2 * k + l, 2 * i + j);
  return g;
}

struct CpReport {
  bool cp = false;
  double min_choi_eig = 0.0;
  CVector witness;  // Choi eigenvector for the minimal eigenvalue
};

inline CpReport is_cp(const Superoperator& s, double tolerance = tol::cp) {
  const EigenDecomposition e = hermitian_eigen(choi(s).hermitian_part());
  CpReport r;
  r.min_choi_eig = e.values.back();
  r.witness = e.vectors.back();
  r.cp = r.min_choi_eig >= -tolerance;
  return r;
}

struct TpReport {
  bool tp = false;
  double deviation = 0.0;
};

inline TpReport is_tp(const Superoperator& s, double tolerance = tol::tp) {
  const ComplexMatrix traced = partial_trace(choi(s), 1, {2, 2});
  TpReport r;
  r.deviation = (traced - ComplexMatrix::identity(2)).max_abs();
  r.tp = r.deviation <= tolerance;
  return r;
}

struct PositivityReport {
  bool positive = false;
  double min_output_eig = 0.0;
  ComplexMatrix worst_input;
};

namespace detail {

inline CVector bloch_pure(double z, double phi) {
  const double theta = std::acos(std::clamp(z, -1.0, 1.0));
  CVector v(2);
  v[0] = cxd(std::cos(theta / 2.0), 0.0);
  v[1] = std::polar(std::sin(theta / 2.0), phi);
  return v;
}

}  // namespace detail

/// Positivity on states, probed on a deterministic Bloch grid (Fibonacci
/// lattice, 400 points) plus 600 seeded Haar states. For qubit maps pure
/// inputs are the extreme points, so this is a dense sample of the boundary.
inline PositivityReport is_positive_map(const Superoperator& s, double tolerance = tol::cp,
                                        std::uint64_t seed = 0x9d2c5680u) {
  PositivityReport r;
  r.min_output_eig = 1e300;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const int grid_n = 400;
  std::mt19937_64 rng(seed);
  const int random_n = 600;
  for (int k = 0; k < grid_n + random_n; ++k) {
    CVector psi(2);
    if (k < grid_n) {
      const double z = 1.0 - 2.0 * (k + 0.5) / grid_n;
      psi = detail::bloch_pure(z, std::fmod(k * golden, 2.0 * std::numbers::pi));
    } else {
      psi = random_pure(rng, 2);
    }
    const ComplexMatrix out = s.apply(outer(psi, psi)).hermitian_part();
    const double mn = hermitian_eigen(out).values.back();
    if (mn < r.min_output_eig) {
      r.min_output_eig = mn;
      r.worst_input = outer(psi, psi);
    }
  }
  r.positive = r.min_output_eig >= -tolerance;
  return r;
}

/// Singular value profile of the 4x4 matrix; bases are HS-orthonormal qubit
/// operators obtained by un-vec'ing the singular vectors.
struct RankProfile {
  int rank = 0;
  std::array<double, 4> singular_values{};
  std::vector<ComplexMatrix> image_basis;
  std::vector<ComplexMatrix> kernel_basis;
};

namespace detail {

/// Orthonormal completion of `span` inside C^4.
inline std::vector<CVector> orthogonal_complement(const std::vector<CVector>& span) {
  std::vector<CVector> basis = span;
  std::vector<CVector> complement;
  for (int seed = 0; seed < 4; ++seed) {
    CVector v(4);
    v[seed] = 1.0;
    for (const CVector& b : basis) v -= b * inner(b, v);
    if (v.norm() > 1e-7) {
      v *= cxd(1.0 / v.norm(), 0.0);
      for (const CVector& b : basis) v -= b * inner(b, v);  // second pass
      v *= cxd(1.0 / v.norm(), 0.0);
      basis.push_back(v);
      complement.push_back(v);
    }
  }
  return complement;
}

}  // namespace detail

inline RankProfile rank_profile(const Superoperator& s, double tol_rank = tol::rank) {
  const SingularDecomposition svd = svd_small(s.matrix(), tol_rank);
  RankProfile r;
  for (int k = 0; k < 4; ++k) r.singular_values[k] = svd.sigma[k];
  r.rank = static_cast<int>(svd.left.size());
  for (const CVector& u : svd.left) r.image_basis.push_back(unvec(u));
  for (const CVector& v : detail::orthogonal_complement(svd.right))
    r.kernel_basis.push_back(unvec(v));
  return r;
}

/// Moore-Penrose inverse with the same singular value cutoff as rank_profile.
inline Superoperator pseudo_inverse(const Superoperator& s, double tol_rank = tol::rank) {
  return Superoperator(pinv_small(s.matrix(), tol_rank));
}

/// Bloch picture r' = A r + c of a Hermiticity-preserving TP map.
struct BlochAffine {
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> c{};
};

inline BlochAffine bloch_affine(const Superoperator& s) {
  BlochAffine b;
  const ComplexMatrix id_out = s.apply(ComplexMatrix::identity(2));
  for (int i = 0; i < 3; ++i) {
    b.c[i] = 0.5 * (pauli(i + 1) * id_out).trace().real();
    for (int j = 0; j < 3; ++j)
      b.a[i][j] = 0.5 * (pauli(i + 1) * s.apply(pauli(j + 1))).trace().real();
  }
  return b;
}

/// Random CPTP qubit channel from a Haar 4x4 unitary via Stinespring with a
/// two-dimensional environment.
inline Superoperator random_cptp(std::mt19937_64& rng) {
  const ComplexMatrix u = random_unitary(rng, 4);
  // Isometry V|psi> = U(|psi> (x) |0>); Kraus K_e = (1 (x) <e|) V.
  std::vector<ComplexMatrix> kraus;
  for (int e = 0; e < 2; ++e) {
    ComplexMatrix k(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) k(i, j) = u(2 * i + e, 2 * j + 0);
    kraus.push_back(k);
  }
  return from_kraus(kraus, {1.0, 1.0});
}

}  // namespace qdiv
