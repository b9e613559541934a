#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "qdiv/propagation.hpp"
#include "qdiv/sampling.hpp"

namespace qdiv {

// ---------------------------------------------------------------------------
// State pairs, possibly extended by an ancilla. The ancilla factor comes
// first: states live on C^a (x) C^2 and the map acts as id_a (x) Lambda.
// ---------------------------------------------------------------------------

struct StatePair {
  ComplexMatrix rho1{2}, rho2{2};
  double p1 = 0.5, p2 = 0.5;
  int ancilla_dim = 1;
};

inline StatePair make_state_pair(const ComplexMatrix& rho1, const ComplexMatrix& rho2,
                                 double p1, int ancilla_dim) {
  if (ancilla_dim < 1 || ancilla_dim > 3)
    raise(ErrorCode::DimensionMismatch, "ancilla dimension must be 1, 2 or 3");
  const int dim = 2 * ancilla_dim;
  if (rho1.dim() != dim || rho2.dim() != dim)
    raise(ErrorCode::DimensionMismatch, "state dimension must be 2 * ancilla_dim");
  if (!(p1 >= 0.0 && p1 <= 1.0))
    raise(ErrorCode::BadValue, "p1 must lie in [0, 1]");
  for (const ComplexMatrix* r : {&rho1, &rho2}) {
    if (!r->is_hermitian()) raise(ErrorCode::NonHermitianInput, "states must be Hermitian");
    if (std::abs(r->trace() - cxd(1.0, 0.0)) > 1e-10)
      raise(ErrorCode::BadValue, "states must have unit trace");
    if (hermitian_eigen(r->hermitian_part()).values.back() < -1e-10)
      raise(ErrorCode::BadValue, "states must be positive semidefinite");
  }
  StatePair pair;
  pair.rho1 = rho1;
  pair.rho2 = rho2;
  pair.p1 = p1;
  pair.p2 = 1.0 - p1;
  pair.ancilla_dim = ancilla_dim;
  return pair;
}

/// Applies id_a (x) S blockwise to an operator on C^a (x) C^2.
inline ComplexMatrix apply_extended(const Superoperator& s, const ComplexMatrix& x,
                                    int ancilla_dim) {
  if (x.dim() != 2 * ancilla_dim)
    raise(ErrorCode::DimensionMismatch, "operator dimension must be 2 * ancilla_dim");
  if (ancilla_dim == 1) return s.apply(x);
  ComplexMatrix out(x.dim());
  for (int i = 0; i < ancilla_dim; ++i)
    for (int j = 0; j < ancilla_dim; ++j) {
      ComplexMatrix block(2);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) block(k, l) = x(2 * i + k, 2 * j + l);
      const ComplexMatrix mapped = s.apply(block);
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = mapped(k, l);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Biased, ancilla-extended trace-norm functional and its time derivative.
// ---------------------------------------------------------------------------

inline double biased_norm(const MapTrajectory& traj, const StatePair& pair, double t) {
  const int k = traj.grid.index_of(t);
  const ComplexMatrix x = pair.p1 * pair.rho1 - pair.p2 * pair.rho2;
  return trace_norm(apply_extended(traj.at(k), x, pair.ancilla_dim).hermitian_part());
}

struct FlowSample {
  double t = 0.0;
  double value = 0.0;  // derivative estimate of the biased norm
};

/// Central difference of biased_norm with step h (a grid multiple); one-sided
/// at the ends of the grid.
inline FlowSample sigma(const MapTrajectory& traj, const StatePair& pair, double t,
                        double h = -1.0) {
  const double dt = traj.grid.dt();
  if (h <= 0.0) h = dt;
  if (h < dt * (1.0 - 1e-9))
    raise(ErrorCode::StepTooSmall, "sigma step must be at least the grid resolution");
  const int k = traj.grid.index_of(t);
  const int m = static_cast<int>(std::lround(h / dt));
  const double hh = m * dt;

  FlowSample out;
  out.t = t;
  if (k - m >= 0 && k + m < traj.grid.size()) {
    out.value = (biased_norm(traj, pair, traj.grid.time(k + m)) -
                 biased_norm(traj, pair, traj.grid.time(k - m))) /
                (2.0 * hh);
  } else if (k + m < traj.grid.size()) {
    out.value =
        (biased_norm(traj, pair, traj.grid.time(k + m)) - biased_norm(traj, pair, t)) / hh;
  } else if (k - m >= 0) {
    out.value =
        (biased_norm(traj, pair, t) - biased_norm(traj, pair, traj.grid.time(k - m))) / hh;
  } else {
    raise(ErrorCode::StepTooSmall, "grid too short for the requested sigma step");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Randomized backflow hunter. Sample pairs are Haar-random pure states on
// system (x) ancilla, derived per index from the seed, so the stream does not
// depend on evaluation order. For each pair the biased norm is tabulated on
// the whole grid and differentiated; the report keeps the global maximum.
// ---------------------------------------------------------------------------

struct HuntConfig {
  int n_pairs = 1000;
  int ancilla_dim = 2;
  bool biased = true;  // p1 grid {0.1 .. 0.9}; p1 = 1/2 when false
  std::uint64_t seed = 12345;
  double threshold = tol::backflow;
};

struct BackflowReport {
  double max_sigma = -std::numeric_limits<double>::infinity();
  double argmax_t = 0.0;
  int argmax_pair = -1;
  double argmax_p1 = 0.5;
  StatePair argmax_states;
  long samples_used = 0;  // sigma evaluations
  HuntConfig config;

  bool found() const { return max_sigma > config.threshold; }
};

/// Optional row sink for CSV export: called once per (pair, grid time) with
/// the sigma value maximized over the probability grid.
using FlowSink = std::function<void(int pair_id, double t, double sigma_value)>;

inline BackflowReport hunt_backflow(const MapTrajectory& traj, const HuntConfig& config,
                                    const FlowSink& sink = nullptr) {
  BackflowReport report;
  report.config = config;

  std::vector<double> pgrid;
  if (config.biased)
    for (int i = 1; i <= 9; ++i) pgrid.push_back(i / 10.0);
  else
    pgrid.push_back(0.5);

  const int dim = 2 * config.ancilla_dim;
  const int n = traj.grid.size();
  const double dt = traj.grid.dt();

  std::vector<std::vector<double>> norms(pgrid.size(), std::vector<double>(n));
  for (int pair_id = 0; pair_id < config.n_pairs; ++pair_id) {
    std::mt19937_64 rng1(mix_seed(config.seed, 2 * static_cast<std::uint64_t>(pair_id)));
    std::mt19937_64 rng2(mix_seed(config.seed, 2 * static_cast<std::uint64_t>(pair_id) + 1));
    const CVector psi1 = random_pure(rng1, dim);
    const CVector psi2 = random_pure(rng2, dim);
    const ComplexMatrix rho1 = outer(psi1, psi1);
    const ComplexMatrix rho2 = outer(psi2, psi2);

    for (int k = 0; k < n; ++k) {
      const ComplexMatrix y1 = apply_extended(traj.at(k), rho1, config.ancilla_dim);
      const ComplexMatrix y2 = apply_extended(traj.at(k), rho2, config.ancilla_dim);
      for (size_t pi = 0; pi < pgrid.size(); ++pi) {
        const double p1 = pgrid[pi];
        norms[pi][k] =
            trace_norm((p1 * y1 - (1.0 - p1) * y2).hermitian_part());
      }
    }

    for (int k = 0; k < n; ++k) {
      double row_max = -std::numeric_limits<double>::infinity();
      for (size_t pi = 0; pi < pgrid.size(); ++pi) {
        double value;
        if (k == 0)
          value = (norms[pi][1] - norms[pi][0]) / dt;
        else if (k == n - 1)
          value = (norms[pi][k] - norms[pi][k - 1]) / dt;
        else
          value = (norms[pi][k + 1] - norms[pi][k - 1]) / (2.0 * dt);
        ++report.samples_used;
        row_max = std::max(row_max, value);
        if (value > report.max_sigma) {
          report.max_sigma = value;
          report.argmax_t = traj.grid.time(k);
          report.argmax_pair = pair_id;
          report.argmax_p1 = pgrid[pi];
          report.argmax_states = make_state_pair(rho1, rho2, pgrid[pi], config.ancilla_dim);
        }
      }
      if (sink) sink(pair_id, traj.grid.time(k), row_max);
    }
  }
  return report;
}

}  // namespace qdiv
