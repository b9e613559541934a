#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qdiv/certify.hpp"
#include "qdiv/superop.hpp"

namespace qdiv {

// ---------------------------------------------------------------------------
// Time grids and map trajectories.
// ---------------------------------------------------------------------------

struct TimeGrid {
  double t_end = 1.0;
  int steps = 100;

  static TimeGrid uniform(double t_end, int steps) {
    if (!(t_end > 0.0) || steps < 1)
      raise(ErrorCode::BadValue, "time grid needs t_end > 0 and at least one step");
    TimeGrid g;
    g.t_end = t_end;
    g.steps = steps;
    return g;
  }

  double dt() const { return t_end / steps; }
  int size() const { return steps + 1; }
  double time(int k) const { return t_end * k / steps; }

  int index_of(double t, double tol = 1e-9) const {
    const double x = t / dt();
    const int k = static_cast<int>(std::lround(x));
    if (k < 0 || k > steps || std::abs(t - time(k)) > tol)
      raise(ErrorCode::OffGridTime, "time " + std::to_string(t) + " is not a grid point");
    return k;
  }
};

enum class TrajectorySource { Analytic, Integrated };

struct MapTrajectory {
  TimeGrid grid;
  std::vector<Superoperator> maps;
  TrajectorySource source = TrajectorySource::Analytic;

  const Superoperator& at(int k) const { return maps.at(static_cast<size_t>(k)); }
  const Superoperator& at_time(double t) const { return at(grid.index_of(t)); }
};

// ---------------------------------------------------------------------------
// Matrix exponential: Pade (6,6) with scaling and squaring. Plenty for 4x4
// generator steps whose scaled norm is far below one.
// ---------------------------------------------------------------------------

inline ComplexMatrix expm(const ComplexMatrix& a) {
  const int n = a.dim();
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(a(i, j));
    norm = std::max(norm, row);
  }
  int squarings = 0;
  if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  const double scale = std::ldexp(1.0, -squarings);

  const ComplexMatrix as = scale * a;
  // Pade coefficients c_{k+1} = c_k (m-k) / ((2m-k)(k+1)) with m = 6
  std::array<double, 7> c;
  c[0] = 1.0;
  for (int k = 0; k < 6; ++k) c[k + 1] = c[k] * (6.0 - k) / ((12.0 - k) * (k + 1));

  ComplexMatrix power = ComplexMatrix::identity(n);
  ComplexMatrix num = c[0] * power;
  ComplexMatrix den = c[0] * power;
  double sign = 1.0;
  for (int k = 1; k <= 6; ++k) {
    power = power * as;
    sign = -sign;
    num += c[k] * power;
    den += (sign * c[k]) * power;
  }

  ComplexMatrix result = solve(den, num);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

// ---------------------------------------------------------------------------
// Time-ordered integration: commutator-free 4th-order scheme with two
// generator evaluations per step at the Gauss nodes,
//   U = exp(h(a2 L1 + a1 L2)) exp(h(a1 L1 + a2 L2)),
// a1 = 1/4 + sqrt(3)/6, a2 = 1/4 - sqrt(3)/6.
// ---------------------------------------------------------------------------

using GeneratorFn = std::function<Superoperator(double)>;
using MapFn = std::function<Superoperator(double)>;

inline MapTrajectory integrate(const GeneratorFn& generator, const TimeGrid& grid) {
  const double root3 = std::sqrt(3.0);
  const double c1 = 0.5 - root3 / 6.0, c2 = 0.5 + root3 / 6.0;
  const double a1 = 0.25 + root3 / 6.0, a2 = 0.25 - root3 / 6.0;
  const double h = grid.dt();

  MapTrajectory traj;
  traj.grid = grid;
  traj.source = TrajectorySource::Integrated;
  traj.maps.reserve(grid.size());
  traj.maps.push_back(Superoperator::identity());

  for (int k = 0; k < grid.steps; ++k) {
    const double t = grid.time(k);
    Superoperator l1, l2;
    try {
      l1 = generator(t + c1 * h);
      l2 = generator(t + c2 * h);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::RateBlowUp)
        raise(ErrorCode::RateBlowUpInsideStep,
              "rate blows up inside step " + std::to_string(k) +
                  "; blow-up instants must be grid points and the trajectory past them "
                  "assembled analytically");
      throw;
    }
    const ComplexMatrix x1 = h * (a1 * l1.matrix() + a2 * l2.matrix());
    const ComplexMatrix x2 = h * (a2 * l1.matrix() + a1 * l2.matrix());
    const Superoperator step(expm(x2) * expm(x1));
    traj.maps.push_back(step * traj.maps.back());

    const TpReport tp = is_tp(traj.maps.back(), 1e-7);
    if (!tp.tp)
      raise(ErrorCode::NonTPDrift, "trace preservation drifted to " +
                                       std::to_string(tp.deviation) + " at step " +
                                       std::to_string(k + 1) + "; reduce the step size");
  }
  return traj;
}

/// Evaluates an analytic map family on the grid.
inline MapTrajectory tabulate(const MapFn& map_at, const TimeGrid& grid) {
  MapTrajectory traj;
  traj.grid = grid;
  traj.source = TrajectorySource::Analytic;
  traj.maps.reserve(grid.size());
  for (int k = 0; k < grid.size(); ++k) traj.maps.push_back(map_at(grid.time(k)));
  if ((traj.maps[0].matrix() - ComplexMatrix::identity(4)).max_abs() > 1e-12)
    raise(ErrorCode::InvalidTP, "trajectory must start at the identity map");
  return traj;
}

// ---------------------------------------------------------------------------
// Propagators V_{t,s}, including at non-invertible instants.
// ---------------------------------------------------------------------------

struct PropagatorResult {
  Superoperator v;
  RankProfile domain;     // rank data of the source map; image_basis is Im(Lambda_s)
  bool kernel_ok = true;  // Ker(Lambda_s) contained in Ker(Lambda_t)
  double kernel_leak = 0.0;
};

/// Non-throwing form: kernel_ok reports whether the propagator exists.
inline PropagatorResult try_propagator(const MapTrajectory& traj, int s_index, int t_index,
                                       double tol_rank = tol::rank) {
  if (s_index > t_index || s_index < 0 || t_index >= traj.grid.size())
    raise(ErrorCode::DimensionMismatch, "propagator needs 0 <= s_index <= t_index < grid size");
  const Superoperator& ls = traj.at(s_index);
  const Superoperator& lt = traj.at(t_index);

  PropagatorResult out;
  out.domain = rank_profile(ls, tol_rank);

  if (out.domain.rank == 4) {
    out.v = (s_index == t_index) ? Superoperator::identity()
                                 : Superoperator(lt.matrix() * inverse(ls.matrix()));
    return out;
  }

  double lt_scale = 0.0;
  for (double sv : rank_profile(lt, tol_rank).singular_values) lt_scale = std::max(lt_scale, sv);
  for (const ComplexMatrix& k : out.domain.kernel_basis) {
    const double leak = (lt.matrix() * vec(k)).norm() / std::max(lt_scale, 1e-300);
    out.kernel_leak = std::max(out.kernel_leak, leak);
  }
  out.kernel_ok = out.kernel_leak <= tol_rank;
  out.v = lt * pseudo_inverse(ls, tol_rank);
  return out;
}

/// Raises NotDivisible when the kernel condition fails at (s, t).
inline PropagatorResult propagator(const MapTrajectory& traj, int s_index, int t_index,
                                   double tol_rank = tol::rank) {
  PropagatorResult r = try_propagator(traj, s_index, t_index, tol_rank);
  if (!r.kernel_ok)
    raise(ErrorCode::NotDivisible,
          "kernel of the map at index " + std::to_string(s_index) +
              " is not contained in the kernel at index " + std::to_string(t_index) +
              " (leak " + std::to_string(r.kernel_leak) + ")");
  return r;
}

// ---------------------------------------------------------------------------
// Limit projector at a first non-invertible instant t1 of an analytic family:
// V_{t1, t1 - eps} extrapolated to eps -> 0 (polynomial extrapolation through
// eps = {1e-2, 1e-3, 1e-4} t1). Needs the map at off-grid times, so it takes
// the map function, not a trajectory.
// ---------------------------------------------------------------------------

struct LimitProjector {
  Superoperator projector;
  double extrapolation_residual = 0.0;
  double idempotency = 0.0;  // max |P P - P|
  CpReport cp;
};

inline LimitProjector limit_projector(const MapFn& map_at, double t1) {
  if (!(t1 > 0.0)) raise(ErrorCode::BadValue, "limit projector needs t1 > 0");
  const std::array<double, 3> eps = {1e-2 * t1, 1e-3 * t1, 1e-4 * t1};
  const Superoperator target = map_at(t1);
  std::array<ComplexMatrix, 3> v;
  for (int i = 0; i < 3; ++i)
    v[i] = target.matrix() * inverse(map_at(t1 - eps[i]).matrix());

  // Lagrange extrapolation to eps = 0 through the three samples
  ComplexMatrix p(4);
  std::array<double, 3> w;
  for (int i = 0; i < 3; ++i) {
    w[i] = 1.0;
    for (int j = 0; j < 3; ++j)
      if (j != i) w[i] *= eps[j] / (eps[j] - eps[i]);
    p += w[i] * v[i];
  }
  // two-point extrapolation of the finer pair, for the residual estimate
  ComplexMatrix fine(4);
  fine += (eps[1] / (eps[1] - eps[2])) * v[2];
  fine += (eps[2] / (eps[2] - eps[1])) * v[1];

  LimitProjector out;
  out.projector = Superoperator(p);
  out.extrapolation_residual = (p - fine).max_abs();
  out.idempotency = (p * p - p).max_abs();
  out.cp = is_cp(out.projector);
  return out;
}

// ---------------------------------------------------------------------------
// Divisibility classification.
// ---------------------------------------------------------------------------

enum class Verdict { CPDivisible, PDivisibleOnly, DivisibleNotP, NotDivisible };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::CPDivisible: return "CP-divisible";
    case Verdict::PDivisibleOnly: return "P-divisible-only";
    case Verdict::DivisibleNotP: return "divisible-not-P";
    case Verdict::NotDivisible: return "not-divisible";
  }
  return "?";
}

struct IntervalRecord {
  double s = 0.0, t = 0.0;
  int rank_s = 4;
  bool kernel_ok = true;
  bool cp = true;
  bool p_div = true;
  double min_choi_eig = 0.0;  // of V when rank 4; of the pinv extension otherwise
  double tp_deviation = 0.0;  // trace preservation on the domain
  double au_margin = 0.0;     // Alberti-Uhlmann margin when the AU route ran
  std::string note;
  std::optional<ComplexMatrix> witness;
};

struct DivisibilityReport {
  std::vector<IntervalRecord> intervals;
  Verdict verdict = Verdict::CPDivisible;
};

namespace detail {

/// Trace preservation of V restricted to a set of (vec'd) domain operators.
inline double tp_on_domain(const Superoperator& v, const std::vector<ComplexMatrix>& domain_ops) {
  double worst = 0.0;
  for (const ComplexMatrix& b : domain_ops) {
    const ComplexMatrix out = v.apply(b);
    worst = std::max(worst, std::abs(out.trace() - b.trace()));
  }
  return worst;
}

/// Hermitian orthonormal basis of the span of (possibly non-Hermitian)
/// image operators of a Hermiticity-preserving map.
inline std::vector<ComplexMatrix> hermitian_image_basis(const std::vector<ComplexMatrix>& image) {
  std::vector<ComplexMatrix> cand;
  for (const ComplexMatrix& b : image) {
    cand.push_back(cxd(0.5, 0.0) * (b + b.adjoint()));
    cand.push_back(cxd(0.0, -0.5) * (b - b.adjoint()));
  }
  std::vector<ComplexMatrix> basis;
  for (ComplexMatrix m : cand) {
    for (const ComplexMatrix& e : basis) {
      cxd overlap(0.0, 0.0);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) overlap += std::conj(e(i, j)) * m(i, j);
      m -= overlap * e;
    }
    if (m.frobenius_norm() > 1e-9) basis.push_back((1.0 / m.frobenius_norm()) * m);
    if (basis.size() == image.size()) break;
  }
  return basis;
}

struct ImageSegment {
  ComplexMatrix lo, hi;  // boundary states of the state segment in a 2-dim image
};

/// States inside a 2-dim image form a segment X(mu) = X_c + mu D; its
/// endpoints solve det X(mu) = 0, a quadratic with det D < 0.
inline ImageSegment image_segment(const std::vector<ComplexMatrix>& image) {
  const std::vector<ComplexMatrix> basis = hermitian_image_basis(image);
  if (basis.size() != 2)
    raise(ErrorCode::DegenerateSpan, "image does not span two Hermitian directions");
  const double tr0 = basis[0].trace().real();
  const double tr1 = basis[1].trace().real();
  const double nrm = tr0 * tr0 + tr1 * tr1;
  if (nrm < 1e-18)
    raise(ErrorCode::DegenerateSpan, "image contains no unit-trace operator");
  const ComplexMatrix center =
      cxd(tr0 / nrm, 0.0) * basis[0] + cxd(tr1 / nrm, 0.0) * basis[1];
  ComplexMatrix dir = cxd(-tr1, 0.0) * basis[0] + cxd(tr0, 0.0) * basis[1];
  if (dir.frobenius_norm() < 1e-12)
    raise(ErrorCode::DegenerateSpan, "image state set is a single point");
  dir = (1.0 / dir.frobenius_norm()) * dir;

  const auto det2 = [](const ComplexMatrix& m) {
    return (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real();
  };
  const double a = det2(dir);
  const double c = det2(center);
  const double b = det2(center + dir) - a - c;
  const double disc = b * b - 4.0 * a * c;
  if (!(a < 0.0) || disc < 0.0)
    raise(ErrorCode::DegenerateSpan, "image segment has no boundary states");
  const double r = std::sqrt(disc);
  const double mu1 = (-b + r) / (2.0 * a);
  const double mu2 = (-b - r) / (2.0 * a);
  ImageSegment seg;
  seg.lo = center + cxd(mu1, 0.0) * dir;
  seg.hi = center + cxd(mu2, 0.0) * dir;
  return seg;
}

}  // namespace detail

/// Classifies every consecutive interval of the trajectory. CP verdicts on
/// rank-deficient domains come from the Alberti-Uhlmann test on the boundary
/// states of the image segment, never from the Choi matrix of the pinv
/// extension, whose off-domain action is an arbitrary convention.
inline DivisibilityReport classify(const MapTrajectory& traj, double tol_rank = tol::rank,
                                   double cp_tol = tol::cp) {
  DivisibilityReport report;
  bool all_cp = true, all_p = true, all_kernel = true;

  for (int k = 0; k + 1 < traj.grid.size(); ++k) {
    IntervalRecord rec;
    rec.s = traj.grid.time(k);
    rec.t = traj.grid.time(k + 1);

    const PropagatorResult pr = try_propagator(traj, k, k + 1, tol_rank);
    rec.rank_s = pr.domain.rank;
    rec.kernel_ok = pr.kernel_ok;

    if (!pr.kernel_ok) {
      rec.cp = false;
      rec.p_div = false;
      rec.note = "kernel shrinks across the interval";
      if (!pr.domain.kernel_basis.empty()) rec.witness = pr.domain.kernel_basis.front();
      report.intervals.push_back(rec);
      all_cp = all_p = all_kernel = false;
      continue;
    }

    rec.tp_deviation = detail::tp_on_domain(pr.v, pr.domain.image_basis);
    const bool tp_ok = rec.tp_deviation <= 1e-8;
    const CpReport cp = is_cp(pr.v, cp_tol);
    rec.min_choi_eig = cp.min_choi_eig;

    if (pr.domain.rank == 4) {
      rec.cp = cp.cp && tp_ok;
      if (!rec.cp) rec.witness = outer(cp.witness, cp.witness);
      const PositivityReport pos = is_positive_map(pr.v);
      rec.p_div = (pos.positive || rec.cp) && tp_ok;
      if (!pos.positive && !rec.p_div) rec.witness = pos.worst_input;
    } else if (pr.domain.rank == 3) {
      rec.cp = cp.cp && tp_ok;
      const PositivityReport pos = is_positive_map(pr.v);
      rec.p_div = (pos.positive || rec.cp) && tp_ok;
      rec.note = "rank-3 domain: no two-state certificate; Choi of the extension is informational";
    } else if (pr.domain.rank == 2) {
      const detail::ImageSegment seg = detail::image_segment(pr.domain.image_basis);
      AUInstance inst;
      inst.source1 = seg.lo.hermitian_part();
      inst.source2 = seg.hi.hermitian_part();
      inst.target1 = pr.v.apply(inst.source1).hermitian_part();
      inst.target2 = pr.v.apply(inst.source2).hermitian_part();
      const AUReport au = alberti_uhlmann(inst);
      rec.au_margin = au.margin;
      rec.cp = au.feasible && tp_ok;
      const double out_lo = hermitian_eigen(inst.target1).values.back();
      const double out_hi = hermitian_eigen(inst.target2).values.back();
      rec.p_div = (std::min(out_lo, out_hi) >= -1e-9 && tp_ok) || rec.cp;
      rec.note = "rank-2 domain: CP via extendability of the restricted propagator";
    } else {
      // rank 1: the restricted map sends the unique image state to a state;
      // a constant map extends it, so divisibility alone settles CP
      const ComplexMatrix only = pr.domain.image_basis.front().hermitian_part();
      const ComplexMatrix out = pr.v.apply(only).hermitian_part();
      const double mn = hermitian_eigen(out).values.back() /
                        std::max(out.frobenius_norm(), 1e-300);
      rec.cp = tp_ok && mn >= -1e-9;
      rec.p_div = rec.cp;
      rec.note = "rank-1 domain: constant extension";
    }

    all_cp = all_cp && rec.cp;
    all_p = all_p && rec.p_div;
    report.intervals.push_back(rec);
  }

  if (all_cp)
    report.verdict = Verdict::CPDivisible;
  else if (all_p)
    report.verdict = Verdict::PDivisibleOnly;
  else if (all_kernel)
    report.verdict = Verdict::DivisibleNotP;
  else
    report.verdict = Verdict::NotDivisible;
  return report;
}

// ---------------------------------------------------------------------------
// Image dimension profile.
// ---------------------------------------------------------------------------

struct ImageProfile {
  struct Point {
    double t = 0.0;
    int dim = 4;
  };
  std::vector<Point> points;
  bool image_non_increasing = true;
  double worst_containment = 0.0;  // largest residual of Im(t_{k+1}) inside Im(t_k)
};

inline ImageProfile image_profile(const MapTrajectory& traj, double tol_rank = tol::rank) {
  ImageProfile prof;
  std::vector<ComplexMatrix> prev;
  for (int k = 0; k < traj.grid.size(); ++k) {
    const RankProfile rp = rank_profile(traj.at(k), tol_rank);
    prof.points.push_back({traj.grid.time(k), rp.rank});
    if (k > 0) {
      for (const ComplexMatrix& b : rp.image_basis) {
        CVector v = vec(b);
        for (const ComplexMatrix& e : prev) {
          const CVector ev = vec(e);
          v -= inner(ev, v) * ev;
        }
        prof.worst_containment = std::max(prof.worst_containment, v.norm());
      }
    }
    prev = rp.image_basis;
  }
  prof.image_non_increasing = prof.worst_containment <= 1e-6;
  return prof;
}

// ---------------------------------------------------------------------------
// Classical stochastic chains (d <= 3): P-divisibility of T_{k+1} = S T_k
// against l1-contraction of biased differences, which must agree.
// ---------------------------------------------------------------------------

struct ClassicalReport {
  bool p_div = true;
  bool contraction_ok = true;
  double worst_entry = 0.0;     // most negative intermediate entry
  double worst_increase = 0.0;  // largest l1 increase over the probe grid
  int first_bad_step = -1;
};

namespace detail {

inline void check_stochastic(const ComplexMatrix& t) {
  const int d = t.dim();
  if (d > 3) raise(ErrorCode::NotStochasticInput, "classical chains support dimension <= 3");
  for (int j = 0; j < d; ++j) {
    double colsum = 0.0;
    for (int i = 0; i < d; ++i) {
      if (std::abs(t(i, j).imag()) > 1e-12 || t(i, j).real() < -1e-12)
        raise(ErrorCode::NotStochasticInput, "matrix entries must be real and nonnegative");
      colsum += t(i, j).real();
    }
    if (std::abs(colsum - 1.0) > 1e-9)
      raise(ErrorCode::NotStochasticInput, "columns must sum to one");
  }
}

inline std::vector<std::vector<double>> simplex_grid(int d) {
  std::vector<std::vector<double>> pts;
  const int res = 4;
  if (d == 2) {
    for (int i = 0; i <= res; ++i)
      pts.push_back({double(i) / res, double(res - i) / res});
  } else {
    for (int i = 0; i <= res; ++i)
      for (int j = 0; i + j <= res; ++j)
        pts.push_back({double(i) / res, double(j) / res, double(res - i - j) / res});
  }
  return pts;
}

}  // namespace detail

inline ClassicalReport classical_pdiv(const std::vector<ComplexMatrix>& chain) {
  if (chain.size() < 2)
    raise(ErrorCode::NotStochasticInput, "a chain needs at least two matrices");
  const int d = chain.front().dim();
  for (const ComplexMatrix& t : chain) {
    if (t.dim() != d) raise(ErrorCode::DimensionMismatch, "chain matrices must share dimension");
    detail::check_stochastic(t);
  }

  ClassicalReport rep;
  for (size_t k = 0; k + 1 < chain.size(); ++k) {
    const SingularDecomposition svd = svd_small(chain[k], tol::rank);
    ComplexMatrix s(d);
    bool kernel_ok = true;
    if (svd.left.size() == static_cast<size_t>(d)) {
      s = chain[k + 1] * inverse(chain[k]);
    } else {
      // kernel of T_k must stay killed by T_{k+1}
      const ComplexMatrix pinv = pinv_small(chain[k], tol::rank);
      s = chain[k + 1] * pinv;
      // kernel directions are the orthocomplement of the right singular vectors
      for (int col = 0; col < d; ++col) {
        CVector e(d);
        e[col] = 1.0;
        for (const CVector& rv : svd.right) e -= inner(rv, e) * rv;
        if (e.norm() > 1e-8) {
          const CVector image = chain[k + 1] * e;
          if (image.norm() > tol::rank * std::max(1.0, svd.sigma[0]) * e.norm())
            kernel_ok = false;
        }
      }
    }
    double min_entry = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) min_entry = std::min(min_entry, s(i, j).real());
    rep.worst_entry = std::min(rep.worst_entry, min_entry);

    // trace preservation on the image of T_k
    double tp_dev = 0.0;
    for (const CVector& lv : svd.left) {
      const CVector out = s * lv;
      cxd in_sum(0.0, 0.0), out_sum(0.0, 0.0);
      for (int i = 0; i < d; ++i) {
        in_sum += lv[i];
        out_sum += out[i];
      }
      tp_dev = std::max(tp_dev, std::abs(in_sum - out_sum));
    }

    if (!kernel_ok || min_entry < -1e-10 || tp_dev > 1e-8) {
      rep.p_div = false;
      if (rep.first_bad_step < 0) rep.first_bad_step = static_cast<int>(k);
    }
  }

  const std::vector<std::vector<double>> probes = detail::simplex_grid(d);
  const std::array<double, 5> pgrid = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (size_t k = 0; k + 1 < chain.size(); ++k) {
    for (size_t i = 0; i < probes.size(); ++i)
      for (size_t j = 0; j < probes.size(); ++j) {
        if (i == j) continue;
        for (double p1 : pgrid) {
          CVector z(d);
          for (int m = 0; m < d; ++m) z[m] = p1 * probes[i][m] - (1.0 - p1) * probes[j][m];
          double before = 0.0, after = 0.0;
          const CVector zb = chain[k] * z;
          const CVector za = chain[k + 1] * z;
          for (int m = 0; m < d; ++m) {
            before += std::abs(zb[m]);
            after += std::abs(za[m]);
          }
          rep.worst_increase = std::max(rep.worst_increase, after - before);
        }
      }
  }
  if (rep.worst_increase > 1e-10) rep.contraction_ok = false;
  return rep;
}

}  // namespace qdiv
