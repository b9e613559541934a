#pragma once

#include <random>

#include "qdiv/complex_matrix.hpp"

namespace qdiv {

/// Haar-distributed pure state: normalized vector of complex Gaussians.
inline CVector random_pure(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(dim);
  for (int i = 0; i < dim; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v[i] = cxd(re, im);
  }
  const double n = v.norm();
  if (n < 1e-12) return random_pure(rng, dim);
  return v * cxd(1.0 / n, 0.0);
}

/// Mixture of `rank` Haar pure states with Dirichlet-ish weights.
inline ComplexMatrix random_density(std::mt19937_64& rng, int dim, int rank) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComplexMatrix rho(dim);
  double total = 0.0;
  for (int k = 0; k < rank; ++k) {
    const CVector psi = random_pure(rng, dim);
    const double w = -std::log(std::max(u(rng), 1e-300));
    rho += w * outer(psi, psi);
    total += w;
  }
  return rho * cxd(1.0 / total, 0.0);
}

/// Gram-Schmidt on a Gaussian matrix; Haar up to column phases, which is
/// enough for the randomized checks here.
inline ComplexMatrix random_unitary(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix u(dim);
  for (int col = 0; col < dim; ++col) {
    CVector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cxd(g(rng), g(rng));
    for (int prev = 0; prev < col; ++prev) {
      CVector p(dim);
      for (int i = 0; i < dim; ++i) p[i] = u(i, prev);
      const cxd ov = inner(p, v);
      v -= p * ov;
    }
    const double n = v.norm();
    if (n < 1e-9) return random_unitary(rng, dim);
    for (int i = 0; i < dim; ++i) u(i, col) = v[i] / n;
  }
  return u;
}

}  // namespace qdiv
