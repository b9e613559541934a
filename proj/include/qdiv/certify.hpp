#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qdiv/superop.hpp"

namespace qdiv {

// ---------------------------------------------------------------------------
// Alberti-Uhlmann extendability: a CPTP map sending sigma_i to tau_i (i=1,2)
// on a qubit exists iff ||sigma_1 - d sigma_2||_1 >= ||tau_1 - d tau_2||_1
// for every d > 0. The margin below is the minimum over d of the difference.
// ---------------------------------------------------------------------------

struct AUInstance {
  ComplexMatrix source1, source2;
  ComplexMatrix target1, target2;
};

struct AUReport {
  bool feasible = false;
  double margin = 0.0;       // min_d (lhs - rhs); >= 0 up to tolerance iff feasible
  double worst_delta = 1.0;  // argmin d
  double worst_p1 = 0.5;     // same point in the biased form p1 = 1/(1+d)
};

namespace detail {

inline double au_margin_at(const AUInstance& in, double delta) {
  const double lhs = trace_norm((in.source1 - delta * in.source2).hermitian_part());
  const double rhs = trace_norm((in.target1 - delta * in.target2).hermitian_part());
  return lhs - rhs;
}

}  // namespace detail

/// Scans delta over a log grid [1e-4, 1e4] (200 points), then refines the
/// worst bracket by golden-section search in log-delta.
inline AUReport alberti_uhlmann(const AUInstance& in, double tolerance = 1e-9) {
  for (const ComplexMatrix* m : {&in.source1, &in.source2, &in.target1, &in.target2})
    if (!m->is_hermitian())
      raise(ErrorCode::NonHermitianInput, "extendability inputs must be Hermitian");

  constexpr int kGrid = 200;
  const double lo = std::log(1e-4), hi = std::log(1e4);
  double best = 1e300;
  int best_k = 0;
  std::vector<double> margins(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    const double d = std::exp(lo + (hi - lo) * k / (kGrid - 1));
    margins[k] = detail::au_margin_at(in, d);
    if (margins[k] < best) {
      best = margins[k];
      best_k = k;
    }
  }

  double a = lo + (hi - lo) * std::max(0, best_k - 1) / (kGrid - 1);
  double b = lo + (hi - lo) * std::min(kGrid - 1, best_k + 1) / (kGrid - 1);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = detail::au_margin_at(in, std::exp(x1));
  double f2 = detail::au_margin_at(in, std::exp(x2));
  for (int it = 0; it < 70; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = detail::au_margin_at(in, std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = detail::au_margin_at(in, std::exp(x2));
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = detail::au_margin_at(in, std::exp(xm));

  AUReport r;
  r.margin = std::min(best, fm);
  r.worst_delta = fm <= best ? std::exp(xm) : std::exp(lo + (hi - lo) * best_k / (kGrid - 1));
  r.worst_p1 = 1.0 / (1.0 + r.worst_delta);
  r.feasible = r.margin >= -tolerance;
  return r;
}

/// A map known only by its action on two spanning states.
struct RestrictedMap {
  ComplexMatrix in1, in2;
  ComplexMatrix out1, out2;
};

inline AUReport extendability(const RestrictedMap& v, double tolerance = 1e-9) {
  // the two inputs must actually span a two-dimensional operator direction
  const double g11 = (v.in1.adjoint() * v.in1).trace().real();
  const double g22 = (v.in2.adjoint() * v.in2).trace().real();
  const cxd g12 = (v.in1.adjoint() * v.in2).trace();
  if (g11 * g22 - std::norm(g12) <= 1e-10)
    raise(ErrorCode::DegenerateSpan, "input states of a restricted map must be independent");
  return alberti_uhlmann({v.in1, v.in2, v.out1, v.out2}, tolerance);
}

// ---------------------------------------------------------------------------
// Canonical form of a 3-dim operator subspace spanned by density matrices:
// a basis in which every spanning state has diagonal (p, 1-p), fixed by the
// Hermitian annihilator K of the subspace. Convention: p in (0, 1/2].
// ---------------------------------------------------------------------------

struct DensitySubspace {
  std::array<ComplexMatrix, 3> states;       // the input states
  std::array<ComplexMatrix, 3> canonical;    // same states in the canonical basis
  ComplexMatrix basis;                       // unitary, columns are the canonical basis
  ComplexMatrix k;                           // Hermitian annihilator, Tr(K rho) = 0 on M
  double p = 0.0;                            // common diagonal, in (0, 1/2]
  double lambda = 0.0;                       // eigenvalue ratio of K, negative
  double diag_residual = 0.0;                // max deviation of diagonals from (p, 1-p)
  double s_offset = 0.0;                     // residual outside span{Z, |0><1|, |1><0|}
  std::array<cxd, 3> coherence;              // canonical off-diagonal entries
};

inline DensitySubspace canonicalize_subspace(const std::array<ComplexMatrix, 3>& states,
                                             double state_tol = 1e-8) {
  for (const ComplexMatrix& s : states) {
    if (s.dim() != 2) raise(ErrorCode::DimensionMismatch, "subspace states must be qubit states");
    if (!s.is_hermitian()) raise(ErrorCode::NonHermitianInput, "subspace states must be Hermitian");
    if (std::abs(s.trace() - cxd(1.0, 0.0)) > state_tol)
      raise(ErrorCode::NotDensitySpanned, "subspace states must have unit trace");
    if (hermitian_eigen(s.hermitian_part()).values.back() < -state_tol)
      raise(ErrorCode::NotDensitySpanned, "subspace states must be positive semidefinite");
  }

  // linear independence via the HS Gram determinant
  ComplexMatrix gram(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      gram(i, j) = (states[i].adjoint() * states[j]).trace();
  const EigenDecomposition ge = hermitian_eigen(gram.hermitian_part());
  double det = 1.0;
  for (double v : ge.values) det *= v;
  if (det <= 1e-10)
    raise(ErrorCode::NotThreeDimensional,
          "states do not span a three-dimensional operator subspace");

  // Pauli coordinates are real for Hermitian states; K spans the null space
  // of the 3x4 coordinate matrix, found as the bottom eigenvector of R^T R.
  ComplexMatrix rtr(4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        s += (states[i] * pauli(a)).trace().real() * (states[i] * pauli(b)).trace().real();
      rtr(a, b) = s;
    }
  const EigenDecomposition re = hermitian_eigen(rtr);
  CVector kvec = re.vectors.back();
  // phase-fix so the components are real
  int big = 0;
  for (int i = 1; i < 4; ++i)
    if (std::abs(kvec[i]) > std::abs(kvec[big])) big = i;
  kvec *= std::conj(kvec[big]) / std::abs(kvec[big]);

  ComplexMatrix k(2);
  for (int a = 0; a < 4; ++a) k += cxd(kvec[a].real(), 0.0) * pauli(a);

  EigenDecomposition ke = hermitian_eigen(k);
  const double scale = std::max(std::abs(ke.values[0]), std::abs(ke.values[1]));
  if (scale < 1e-12 || std::min(std::abs(ke.values[0]), std::abs(ke.values[1])) < 1e-10 * scale ||
      ke.values[0] * ke.values[1] > 0.0)
    raise(ErrorCode::NotDensitySpanned,
          "annihilator is not indefinite; subspace admits no common (p, 1-p) form");

  // order the basis so that the common diagonal p lands in (0, 1/2]
  CVector v0 = ke.vectors[0], v1 = ke.vectors[1];
  double lambda = ke.values[1] / ke.values[0];
  double p = lambda / (lambda - 1.0);
  if (p > 0.5) {
    std::swap(v0, v1);
    lambda = 1.0 / lambda;
    p = lambda / (lambda - 1.0);
  }
  for (CVector* v : {&v0, &v1}) {
    int idx = std::abs((*v)[0]) >= std::abs((*v)[1]) ? 0 : 1;
    *v *= std::conj((*v)[idx]) / std::abs((*v)[idx]);
  }

  DensitySubspace out;
  out.states = states;
  out.p = p;
  out.lambda = lambda;
  out.k = k;
  out.basis = ComplexMatrix(2);
  for (int i = 0; i < 2; ++i) {
    out.basis(i, 0) = v0[i];
    out.basis(i, 1) = v1[i];
  }
  for (int i = 0; i < 3; ++i) {
    const ComplexMatrix c = out.basis.adjoint() * states[i] * out.basis;
    out.canonical[i] = c;
    out.diag_residual = std::max(out.diag_residual, std::abs(c(0, 0) - cxd(p, 0.0)));
    out.diag_residual =
        std::max(out.diag_residual, std::abs(c(1, 1) - cxd(1.0 - p, 0.0)));
    out.coherence[i] = c(0, 1);
    out.s_offset = std::max(out.s_offset, std::abs(c(0, 1) - std::conj(c(1, 0))));
  }
  if (out.diag_residual > 1e-7)
    raise(ErrorCode::NotDensitySpanned, "states have no common diagonal in the canonical basis");
  return out;
}

// ---------------------------------------------------------------------------
// CPTP projector infeasibility scan: in the canonical basis any projector
// onto M = span{Z, |0><1|, |1><0|} must fix the coherences and send |0><0|,
// |1><1| into M; the Choi matrix of such a candidate has the fixed pattern
//   [[q1, w1, 0, 1], [w1*, 1-q1, 0, 0], [0, 0, 1-q2, w2], [1, 0, w2*, q2]]
// whose {00,11} principal minor [[q1, 1], [1, q2]] forces q1 q2 >= 1 for
// positivity. The scan confirms every candidate short of q1 = q2 = 1 dips
// below -1e-9, and the corner is the identity map, which is no projector.
// ---------------------------------------------------------------------------

struct ProjectorScan {
  bool feasible = false;       // stays false; recorded from the scan outcome
  double worst_min_eig = 0.0;  // largest min-eigenvalue over all candidates
  double corner_q1 = 0.0, corner_q2 = 0.0;  // q at the worst candidate
  int candidates = 0;
};

inline ProjectorScan cptp_projector_feasibility(const DensitySubspace&,
                                                double tolerance = 1e-9) {
  ProjectorScan scan;
  scan.worst_min_eig = -1e300;
  const std::array<double, 8> qgrid = {0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.99, 1.0};
  const std::array<cxd, 5> phases = {cxd(0, 0), cxd(1, 0), cxd(0, 1), cxd(-1, 0), cxd(0, -1)};
  for (double q1 : qgrid)
    for (double q2 : qgrid) {
      if (q1 == 1.0 && q2 == 1.0) continue;  // the identity map, not a projector onto M
      const double r1 = std::sqrt(std::max(0.0, q1 * (1.0 - q1)));
      const double r2 = std::sqrt(std::max(0.0, q2 * (1.0 - q2)));
      for (const cxd& ph1 : phases)
        for (const cxd& ph2 : phases) {
          const cxd w1 = r1 * ph1;
          const cxd w2 = r2 * ph2;
          ComplexMatrix g(4);
          g(0, 0) = q1;
          g(0, 1) = w1;
          g(1, 0) = std::conj(w1);
          g(1, 1) = 1.0 - q1;
          g(2, 2) = 1.0 - q2;
          g(2, 3) = w2;
          g(3, 2) = std::conj(w2);
          g(3, 3) = q2;
          g(0, 3) = 1.0;
          g(3, 0) = 1.0;
          ++scan.candidates;
          const double mn = hermitian_eigen(g).values.back();
          if (mn > scan.worst_min_eig) {
            scan.worst_min_eig = mn;
            scan.corner_q1 = q1;
            scan.corner_q2 = q2;
          }
        }
    }
  scan.feasible = scan.worst_min_eig >= -tolerance;
  return scan;
}

// ---------------------------------------------------------------------------
// PTP projector: exists iff the subspace is an operator system, i.e. the
// identity lies in M, which in the canonical form means p = 1/2. The
// projector is then 1 -> 1, coherences fixed, sigma_3 -> 0, conjugated back
// to the original basis. It is positive and TP but not CP (Choi eig -1/2).
// ---------------------------------------------------------------------------

struct PtpReport {
  bool exists = false;
  bool operator_system = false;
  double p = 0.0;
  double p_deviation = 0.0;   // |p - 1/2|
  double s_offset = 0.0;
  std::optional<Superoperator> projector;
  double min_choi_eig = 0.0;  // of the projector, when it exists
};

inline PtpReport ptp_projector_existence(const DensitySubspace& sub, double tolerance = 1e-9) {
  PtpReport r;
  r.p = sub.p;
  r.p_deviation = std::abs(sub.p - 0.5);
  r.s_offset = sub.s_offset;
  const double kf = sub.k.frobenius_norm();
  r.operator_system = std::abs(sub.k.trace()) <= 1e-7 * std::max(1.0, kf);
  r.exists = r.p_deviation <= 1e-7 && sub.s_offset <= tolerance;
  if (r.exists) {
    const Superoperator u = conjugation(sub.basis);
    const Superoperator uin = conjugation(sub.basis.adjoint());
    const Superoperator proj = u * bloch_scaling_map(1.0, 1.0, 0.0) * uin;
    r.projector = proj;
    r.min_choi_eig = is_cp(proj).min_choi_eig;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pure output scan in the Bloch picture r' = A r + c: ascent iteration
// x <- normalize(A^T (A x + c)) climbs ||A x + c|| to its maximum over the
// sphere; starts on a Fibonacci lattice. Outputs reaching purity 1 are the
// pure-output set, then classified by their geometry.
// ---------------------------------------------------------------------------

enum class PureOutputShape { FewPoints, Circle, Sphere, Other };

struct PureOutputReport {
  PureOutputShape shape = PureOutputShape::FewPoints;
  std::vector<std::array<double, 3>> points;  // deduplicated Bloch vectors
  bool great_circle = false;
  double plane_residual = 0.0;
  double max_purity = 0.0;  // max ||A x + c|| reached
};

namespace detail {

inline std::array<double, 3> affine_apply(const BlochAffine& b, const std::array<double, 3>& x) {
  std::array<double, 3> y{};
  for (int i = 0; i < 3; ++i) {
    y[i] = b.c[i];
    for (int j = 0; j < 3; ++j) y[i] += b.a[i][j] * x[j];
  }
  return y;
}

inline double norm3(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace detail

inline PureOutputReport pure_output_scan(const Superoperator& s, int n_starts = 96,
                                         double purity_tol = 1e-7) {
  const BlochAffine b = bloch_affine(s);
  PureOutputReport rep;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));

  std::vector<std::array<double, 3>> found;
  for (int k = 0; k < n_starts; ++k) {
    const double z = 1.0 - 2.0 * (k + 0.5) / n_starts;
    const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = k * golden;
    std::array<double, 3> x = {rad * std::cos(phi), rad * std::sin(phi), z};

    // ascend purity along great circles; a line search handles maxima where
    // the image ellipsoid osculates the sphere and plain iteration stalls
    for (int it = 0; it < 60; ++it) {
      const std::array<double, 3> y = detail::affine_apply(b, x);
      std::array<double, 3> g{};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g[j] += b.a[i][j] * y[i];
      const double radial = g[0] * x[0] + g[1] * x[1] + g[2] * x[2];
      std::array<double, 3> u = {g[0] - radial * x[0], g[1] - radial * x[1],
                                 g[2] - radial * x[2]};
      const double un = detail::norm3(u);
      // relative cutoff: below it the tangential residual is rounding noise
      // and normalizing it would leak a radial component
      if (un < 1e-12 * std::max(detail::norm3(g), 1e-300)) break;
      for (double& c : u) c /= un;

      const auto at_angle = [&](double t) {
        const double ct = std::cos(t), st = std::sin(t);
        return std::array<double, 3>{ct * x[0] + st * u[0], ct * x[1] + st * u[1],
                                     ct * x[2] + st * u[2]};
      };
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double lo = 0.0, hi = std::numbers::pi / 2.0;
      double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
      double f1 = detail::norm3(detail::affine_apply(b, at_angle(m1)));
      double f2 = detail::norm3(detail::affine_apply(b, at_angle(m2)));
      for (int gs = 0; gs < 60; ++gs) {
        if (f1 < f2) {
          lo = m1;
          m1 = m2;
          f1 = f2;
          m2 = lo + gr * (hi - lo);
          f2 = detail::norm3(detail::affine_apply(b, at_angle(m2)));
        } else {
          hi = m2;
          m2 = m1;
          f2 = f1;
          m1 = hi - gr * (hi - lo);
          f1 = detail::norm3(detail::affine_apply(b, at_angle(m1)));
        }
      }
      const double t_best = 0.5 * (lo + hi);
      std::array<double, 3> cand = at_angle(t_best);
      const double cn = detail::norm3(cand);
      for (double& c : cand) c /= cn;
      const double gain = detail::norm3(detail::affine_apply(b, cand)) -
                          detail::norm3(detail::affine_apply(b, x));
      if (gain <= 1e-16) break;
      x = cand;
    }
    const std::array<double, 3> out = detail::affine_apply(b, x);
    const double purity = detail::norm3(out);
    rep.max_purity = std::max(rep.max_purity, purity);
    if (purity < 1.0 - purity_tol) continue;
    // merge radius sits above the residual spread left around quartically
    // flat maxima (~2e-4 at the 1e-16 gain cutoff) and well below the
    // spacing of genuinely distinct points from 96 starts
    bool fresh = true;
    for (const auto& q : found)
      if (detail::norm3({q[0] - out[0], q[1] - out[1], q[2] - out[2]}) < 1e-3) {
        fresh = false;
        break;
      }
    if (fresh) found.push_back(out);
  }
  rep.points = found;

  if (found.size() <= 2) {
    rep.shape = PureOutputShape::FewPoints;
    return rep;
  }

  // plane fit: covariance about the centroid, smallest eigenvector = normal
  std::array<double, 3> centroid{};
  for (const auto& q : found)
    for (int i = 0; i < 3; ++i) centroid[i] += q[i] / found.size();
  ComplexMatrix cov(3);
  for (const auto& q : found)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        cov(i, j) += cxd((q[i] - centroid[i]) * (q[j] - centroid[j]), 0.0);
  const EigenDecomposition ce = hermitian_eigen(cov);
  const double thin = ce.values.back() / found.size();

  if (thin < 1e-10) {
    rep.shape = PureOutputShape::Circle;
    double res = 0.0;
    for (const auto& q : found) {
      double dot = 0.0;
      for (int i = 0; i < 3; ++i) dot += (q[i] - centroid[i]) * ce.vectors.back()[i].real();
      res = std::max(res, std::abs(dot));
    }
    rep.plane_residual = res;
    // all points are unit vectors, so the circle is great iff its plane
    // passes through the origin
    double offset = 0.0;
    for (int i = 0; i < 3; ++i) offset += centroid[i] * ce.vectors.back()[i].real();
    rep.great_circle = std::abs(offset) < 1e-6 && res < 1e-6;
    return rep;
  }
  if (ce.values.back() / found.size() > 1e-3) {
    rep.shape = PureOutputShape::Sphere;
    return rep;
  }
  rep.shape = PureOutputShape::Other;
  return rep;
}

}  // namespace qdiv
