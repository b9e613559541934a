#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "qdiv/rates.hpp"
#include "qdiv/superop.hpp"

namespace qdiv::models {

// ---------------------------------------------------------------------------
// Pauli family: L_t = sum_k gamma_k(t) (sigma_k . sigma_k - .)/2, solved by
// lambda_i(t) = exp(-Gamma_j - Gamma_k) on sigma_i ({i,j,k} a permutation)
// and Kraus weights p_alpha(t) on the four Paulis.
// ---------------------------------------------------------------------------

struct PauliRates {
  Rate g1 = Rate::constant(0.0);
  Rate g2 = Rate::constant(0.0);
  Rate g3 = Rate::constant(0.0);
};

inline Superoperator pauli_generator(const PauliRates& r, double t) {
  Superoperator l = Superoperator::zero();
  const Rate* g[3] = {&r.g1, &r.g2, &r.g3};
  for (int k = 0; k < 3; ++k) {
    const double gk = g[k]->value(t);  // throws RateBlowUp at a blow-up instant
    l = l + cxd(0.5 * gk, 0.0) * (sandwich(pauli(k + 1), pauli(k + 1)) - Superoperator::identity());
  }
  return l;
}

struct PauliWeights {
  std::array<double, 3> lambda{};  // Pauli-basis eigenvalues, exact zeros past a blow-up
  std::array<double, 4> p{};       // Kraus weights on {1, sigma_1, sigma_2, sigma_3}
  bool negative_weight = false;    // some p_alpha < -1e-12: map is not CP at this instant
};

inline PauliWeights pauli_weights(const PauliRates& r, double t) {
  const double gam[3] = {r.g1.integral(t), r.g2.integral(t), r.g3.integral(t)};
  PauliWeights w;
  for (int i = 0; i < 3; ++i) {
    const double ex = gam[(i + 1) % 3] + gam[(i + 2) % 3];
    w.lambda[i] = std::isfinite(ex) ? std::exp(-ex) : 0.0;
  }
  w.p[0] = 0.25 * (1.0 + w.lambda[0] + w.lambda[1] + w.lambda[2]);
  w.p[1] = 0.25 * (1.0 + w.lambda[0] - w.lambda[1] - w.lambda[2]);
  w.p[2] = 0.25 * (1.0 - w.lambda[0] + w.lambda[1] - w.lambda[2]);
  w.p[3] = 0.25 * (1.0 - w.lambda[0] - w.lambda[1] + w.lambda[2]);
  for (double p : w.p)
    if (p < -1e-12) w.negative_weight = true;
  return w;
}

struct PauliMapResult {
  Superoperator map;
  PauliWeights weights;
};

inline PauliMapResult pauli_map(const PauliRates& r, double t) {
  PauliMapResult out;
  out.weights = pauli_weights(r, t);
  out.map = bloch_scaling_map(out.weights.lambda[0], out.weights.lambda[1],
                              out.weights.lambda[2]);
  return out;
}

// ---------------------------------------------------------------------------
// Spontaneous-emission family with dephasing:
//   L_t = omega(t) i[sigma_z, .]
//       + gamma_+(t)/2 D[sigma_+] + gamma_-(t)/2 D[sigma_-]
//       + gamma_3(t) (sigma_z . sigma_z - .)/2,
// where sigma_+ = |0><1|. The Hamiltonian prefactor is fixed so that the
// coherence picks up exp(+i Omega) with Omega = int 2 omega, matching the
// closed-form map below. Closed form, with Gamma = (1/2) int (gamma_+ +
// gamma_-), Gamma_3 = int gamma_3, G = (1/2) int exp(Gamma) gamma_-:
//   populations  p(t)  = e^-Gamma (G + p(0)),
//   coherence    a(t)  = a(0) exp(i Omega - Gamma/2 - Gamma_3).
// ---------------------------------------------------------------------------

struct ManiscalcoParams {
  Rate omega = Rate::constant(0.0);
  Rate gplus = Rate::constant(0.0);
  Rate gminus = Rate::constant(0.0);
  Rate g3 = Rate::constant(0.0);
};

inline Superoperator maniscalco_generator(const ManiscalcoParams& m, double t) {
  const ComplexMatrix sz = pauli(3);
  ComplexMatrix sp(2);  // |0><1|
  sp(0, 1) = 1.0;
  const ComplexMatrix sm = sp.adjoint();
  Superoperator l =
      cxd(0.0, m.omega.value(t)) * (left_mult(sz) - right_mult(sz));
  l = l + cxd(0.5 * m.gplus.value(t), 0.0) * dissipator(sp);
  l = l + cxd(0.5 * m.gminus.value(t), 0.0) * dissipator(sm);
  l = l + cxd(0.5 * m.g3.value(t), 0.0) * (sandwich(sz, sz) - Superoperator::identity());
  return l;
}

struct ManiscalcoIntegrals {
  double gamma = 0.0;    // Gamma(t)
  double gamma3 = 0.0;   // Gamma_3(t)
  double omega2 = 0.0;   // Omega(t) = int 2 omega
  double eg = 0.0;       // exp(-Gamma)
  double egG = 0.0;      // exp(-Gamma) G, exact 0 past a gamma_+/- blow-up
  cxd phase = 0.0;       // exp(i Omega - Gamma/2 - Gamma_3)
};

inline ManiscalcoIntegrals maniscalco_integrals(const ManiscalcoParams& m, double t) {
  ManiscalcoIntegrals e;
  e.gamma = 0.5 * (m.gplus.integral(t) + m.gminus.integral(t));
  e.gamma3 = m.g3.integral(t);
  e.omega2 = 2.0 * m.omega.integral(t);
  if (std::isfinite(e.gamma)) {
    e.eg = std::exp(-e.gamma);
    const auto integrand = [&](double tau) {
      return 0.5 * std::exp(0.5 * (m.gplus.integral(tau) + m.gminus.integral(tau))) *
             m.gminus.value(tau);
    };
    e.egG = t == 0.0 ? 0.0 : e.eg * integrate_adaptive(integrand, 0.0, t);
  } else {
    // Gamma diverged: e^-Gamma = 0 exactly, and e^-Gamma G -> 0 because G
    // grows strictly slower than e^Gamma for the admissible blow-up shapes.
    e.eg = 0.0;
    e.egG = 0.0;
  }
  const double decay = 0.5 * e.gamma + e.gamma3;
  e.phase = std::isfinite(decay) ? std::exp(cxd(-decay, e.omega2)) : cxd(0.0, 0.0);
  return e;
}

/// Closed-form map: in vec coordinates (rho_00, rho_01, rho_10, rho_11),
///   N_t = [[1 - eG, 0, 0, 1 - e(G+1)], [0, phase, 0, 0],
///          [0, 0, conj(phase), 0], [eG, 0, 0, e(G+1)]],  e = exp(-Gamma).
inline Superoperator maniscalco_map(const ManiscalcoParams& m, double t) {
  const ManiscalcoIntegrals e = maniscalco_integrals(m, t);
  ComplexMatrix n(4);
  n(0, 0) = 1.0 - e.egG;
  n(0, 3) = 1.0 - (e.egG + e.eg);
  n(1, 1) = e.phase;
  n(2, 2) = std::conj(e.phase);
  n(3, 0) = e.egG;
  n(3, 3) = e.egG + e.eg;
  return Superoperator(n);
}

/// Damping basis: right eigenoperators X_a and duals Y_a, biorthonormal under
/// the sesquilinear pairing Tr(X_a Y_b^dagger) = delta_ab. The dual of the
/// fixed point is the identity (Lambda^dagger[1] = 1 for a TP map); the
/// coherence operators |0><1| and |1><0| are self-dual.
struct DampingBasis {
  std::array<ComplexMatrix, 4> x;
  std::array<ComplexMatrix, 4> y;
  std::array<cxd, 4> eigenvalues;
};

inline DampingBasis maniscalco_damping_basis(const ManiscalcoParams& m, double t) {
  const ManiscalcoIntegrals e = maniscalco_integrals(m, t);
  const double denom = 1.0 - e.eg;
  if (std::abs(denom) < 1e-12)
    raise(ErrorCode::DegenerateTime,
          "damping basis undefined where exp(-Gamma(t)) = 1 (t = " + std::to_string(t) + ")");
  DampingBasis b;
  b.eigenvalues = {cxd(1.0, 0.0), e.phase, std::conj(e.phase), cxd(e.eg, 0.0)};

  // fixed point: diag((1 - e(G+1)) / (1-e), eG / (1-e)), unit trace
  ComplexMatrix x0(2);
  x0(0, 0) = (1.0 - (e.egG + e.eg)) / denom;
  x0(1, 1) = e.egG / denom;
  b.x[0] = x0;

  ComplexMatrix x1(2);
  x1(0, 1) = 1.0;
  b.x[1] = x1;
  b.x[2] = x1.adjoint();
  b.x[3] = pauli(3);

  b.y[0] = ComplexMatrix::identity(2);
  b.y[1] = b.x[1];
  b.y[2] = b.x[2];
  ComplexMatrix y3(2);
  y3(0, 0) = e.egG / denom;
  y3(1, 1) = (e.egG + e.eg - 1.0) / denom;
  b.y[3] = y3;
  return b;
}

// ---------------------------------------------------------------------------
// Rotation-dilated dephasing: Lambda_t = U_t o Psi_t with
// U_t[rho] = u_t rho u_t^dagger, u_t = exp(-i sigma_y t), and
// Psi_t = (1 - p(t)) id + p(t) Phi, Phi the z-basis dephasing projector.
// p climbs from 0 to 1 at t_star and stays there; the image keeps rotating
// afterwards, so the image is not non-increasing even though the family
// stays CP-divisible while p' >= 0.
// ---------------------------------------------------------------------------

/// p(t) profiles for the composition model.
class PFun {
 public:
  enum class Kind { Ramp, Smoothstep, Bump };

  /// min(t / t_star, 1)
  static PFun ramp(double t_star) { return PFun(Kind::Ramp, {t_star}); }
  /// 3 s^2 - 2 s^3 with s = clamp(t / t_star, 0, 1); p' = 0 at t_star
  static PFun smoothstep(double t_star) { return PFun(Kind::Smoothstep, {t_star}); }
  /// a exp(-((t - t0)/w)^2), never reaches 1 (requires a < 1); p' < 0 after t0
  static PFun bump(double a, double t0, double w) { return PFun(Kind::Bump, {a, t0, w}); }

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return p_; }

  double value(double t) const {
    switch (kind_) {
      case Kind::Ramp: return std::clamp(t / p_[0], 0.0, 1.0);
      case Kind::Smoothstep: {
        const double s = std::clamp(t / p_[0], 0.0, 1.0);
        return s * s * (3.0 - 2.0 * s);
      }
      case Kind::Bump: {
        const double z = (t - p_[1]) / p_[2];
        return p_[0] * std::exp(-z * z);
      }
    }
    return 0.0;
  }

  double derivative(double t) const {
    switch (kind_) {
      case Kind::Ramp: return (t >= 0.0 && t < p_[0]) ? 1.0 / p_[0] : 0.0;
      case Kind::Smoothstep: {
        if (t <= 0.0 || t >= p_[0]) return 0.0;
        const double s = t / p_[0];
        return 6.0 * s * (1.0 - s) / p_[0];
      }
      case Kind::Bump: {
        const double z = (t - p_[1]) / p_[2];
        return -2.0 * z / p_[2] * p_[0] * std::exp(-z * z);
      }
    }
    return 0.0;
  }

  /// First time p reaches 1 (+inf if never).
  double t_star() const {
    if (kind_ == Kind::Bump) return std::numeric_limits<double>::infinity();
    return p_[0];
  }

 private:
  PFun(Kind kind, std::vector<double> p) : kind_(kind), p_(std::move(p)) {}
  Kind kind_;
  std::vector<double> p_;
};

struct CompositionParams {
  PFun p = PFun::smoothstep(2.0);
};

inline ComplexMatrix composition_rotation(double t) {
  // exp(-i sigma_y t) is the real rotation [[cos t, -sin t], [sin t, cos t]]
  ComplexMatrix u(2);
  u(0, 0) = std::cos(t);
  u(0, 1) = -std::sin(t);
  u(1, 0) = std::sin(t);
  u(1, 1) = std::cos(t);
  return u;
}

inline Superoperator composition_map(const CompositionParams& c, double t) {
  const double p = c.p.value(t);
  const Superoperator psi =
      cxd(1.0 - p, 0.0) * Superoperator::identity() + cxd(p, 0.0) * bloch_scaling_map(0.0, 0.0, 1.0);
  return conjugation(composition_rotation(t)) * psi;
}

/// Time-local generator; singular wherever p(t) = 1.
inline Superoperator composition_generator(const CompositionParams& c, double t) {
  const double p = c.p.value(t);
  if (1.0 - p < 1e-12)
    raise(ErrorCode::GeneratorSingular,
          "time-local generator does not exist where p(t) = 1 (t = " + std::to_string(t) + ")");
  const ComplexMatrix sy = pauli(2);
  const Superoperator ham = cxd(0.0, -1.0) * (left_mult(sy) - right_mult(sy));
  const Superoperator dephase_part =
      bloch_scaling_map(0.0, 0.0, 1.0) - Superoperator::identity();
  const Superoperator u = conjugation(composition_rotation(t));
  const Superoperator uinv = conjugation(composition_rotation(-t));
  const double prefactor = c.p.derivative(t) / (1.0 - p);
  return ham + cxd(prefactor, 0.0) * (u * dephase_part * uinv);
}

}  // namespace qdiv::models
