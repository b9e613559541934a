#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "qdiv/certify.hpp"
#include "qdiv/infoflow.hpp"
#include "qdiv/models.hpp"
#include "qdiv/propagation.hpp"
#include "qdiv/sampling.hpp"
#include "qdiv/scenario.hpp"

namespace qdiv {

struct CertificateRow {
  int id = 0;  // draw index; -1 marks the constructed operator-system instance
  double p = 0.0;
  double lambda = 0.0;
  double trace_k = 0.0;
  bool cptp_feasible = false;
  double worst_min_eig = 0.0;
  double corner_q1 = 0.0;
  double corner_q2 = 0.0;
  bool ptp_exists = false;
  bool operator_system = false;
  double min_choi_eig = 0.0;
  int great_circle = -1;  // -1: no projector to scan
};

struct RunRecord {
  Scenario scenario;
  std::string verdict = "none";
  std::optional<MapTrajectory> trajectory;
  std::optional<ImageProfile> profile;
  std::optional<DivisibilityReport> divisibility;
  std::optional<BackflowReport> backflow;
  std::vector<std::array<double, 3>> backflow_rows;  // (pair id, t, max sigma over p grid)
  std::vector<CertificateRow> certificates;
  std::optional<ClassicalReport> classical;
  double wall_seconds = 0.0;
  std::string tool_version = "qdiv 1.0.0";
};

namespace detail {

inline std::array<ComplexMatrix, 3> sample_density_subspace(std::mt19937_64& rng) {
  while (true) {
    std::array<ComplexMatrix, 3> states = {random_density(rng, 2, 2), random_density(rng, 2, 2),
                                           random_density(rng, 2, 2)};
    ComplexMatrix gram(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) gram(i, j) = (states[i].adjoint() * states[j]).trace();
    double det = 1.0;
    for (double v : hermitian_eigen(gram.hermitian_part()).values) det *= v;
    if (det < 1e-6) continue;
    try {
      const DensitySubspace sub = canonicalize_subspace(states);
      if (sub.p < 0.05 || sub.p > 0.95) continue;
    } catch (const Error&) {
      continue;
    }
    return states;
  }
}

inline CertificateRow certify_one(const DensitySubspace& sub, int id) {
  CertificateRow row;
  row.id = id;
  row.p = sub.p;
  row.lambda = sub.lambda;
  row.trace_k = sub.k.trace().real();
  const ProjectorScan scan = cptp_projector_feasibility(sub);
  row.cptp_feasible = scan.feasible;
  row.worst_min_eig = scan.worst_min_eig;
  row.corner_q1 = scan.corner_q1;
  row.corner_q2 = scan.corner_q2;
  const PtpReport ptp = ptp_projector_existence(sub);
  row.ptp_exists = ptp.exists;
  row.operator_system = ptp.operator_system;
  row.min_choi_eig = ptp.min_choi_eig;
  if (ptp.projector) {
    const PureOutputReport scan_out = pure_output_scan(*ptp.projector);
    row.great_circle = scan_out.great_circle ? 1 : 0;
  }
  return row;
}

inline MapTrajectory build_trajectory(const Scenario& sc) {
  const TimeGrid grid = TimeGrid::uniform(sc.grid.t_end, sc.grid.steps);
  if (sc.source == SourceKind::Analytic) {
    switch (sc.model) {
      case ModelKind::Pauli:
        return tabulate([&](double t) { return models::pauli_map(sc.pauli, t).map; }, grid);
      case ModelKind::Maniscalco:
        return tabulate([&](double t) { return models::maniscalco_map(sc.maniscalco, t); }, grid);
      case ModelKind::Composition:
        return tabulate([&](double t) { return models::composition_map(sc.composition, t); },
                        grid);
      default: break;
    }
  } else {
    switch (sc.model) {
      case ModelKind::Pauli:
        return integrate([&](double t) { return models::pauli_generator(sc.pauli, t); }, grid);
      case ModelKind::Maniscalco:
        return integrate([&](double t) { return models::maniscalco_generator(sc.maniscalco, t); },
                         grid);
      case ModelKind::Composition:
        return integrate([&](double t) { return models::composition_generator(sc.composition, t); },
                         grid);
      default: break;
    }
  }
  raise(ErrorCode::BadValue, "no trajectory for this model");
}

inline std::vector<ComplexMatrix> build_chain(const ClassicalSpec& cl) {
  const int d = cl.matrix.dim();
  std::vector<ComplexMatrix> chain;
  chain.push_back(ComplexMatrix::identity(d));
  if (cl.kind == ClassicalSpec::Kind::Powers) {
    ComplexMatrix cur = ComplexMatrix::identity(d);
    for (int k = 1; k <= cl.steps; ++k) {
      cur = cl.matrix * cur;
      chain.push_back(cur);
    }
  } else {
    chain.push_back(cl.matrix);
    chain.push_back(cl.matrix_b);
  }
  return chain;
}

}  // namespace detail

inline RunRecord run(const Scenario& sc) {
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.scenario = sc;

  if (sc.model == ModelKind::Classical) {
    rec.classical = classical_pdiv(detail::build_chain(sc.classical));
    rec.verdict = rec.classical->p_div ? "P-divisible (classical)" : "not P-divisible (classical)";
  } else {
    rec.trajectory = detail::build_trajectory(sc);
    for (Analysis a : sc.analyses) {
      switch (a) {
        case Analysis::ImageProfile:
          rec.profile = image_profile(*rec.trajectory, sc.tolerances.rank);
          break;
        case Analysis::Divisibility:
          rec.divisibility = classify(*rec.trajectory, sc.tolerances.rank);
          rec.verdict = to_string(rec.divisibility->verdict);
          break;
        case Analysis::Backflow: {
          HuntConfig cfg;
          cfg.n_pairs = sc.sampler.n_pairs;
          cfg.ancilla_dim = sc.sampler.ancilla_dim;
          cfg.biased = sc.sampler.biased;
          cfg.seed = sc.sampler.seed;
          cfg.threshold = sc.tolerances.backflow;
          rec.backflow_rows.clear();
          rec.backflow = hunt_backflow(*rec.trajectory, cfg,
                                       [&rec](int pair_id, double t, double sv) {
                                         rec.backflow_rows.push_back(
                                             {static_cast<double>(pair_id), t, sv});
                                       });
          break;
        }
        case Analysis::Certify: {
          std::mt19937_64 rng(mix_seed(sc.sampler.seed, 1000003));
          for (int id = 0; id < 20; ++id) {
            const DensitySubspace sub =
                canonicalize_subspace(detail::sample_density_subspace(rng));
            rec.certificates.push_back(detail::certify_one(sub, id));
          }
          // one constructed operator-system instance (p = 1/2): the PTP
          // projector exists here and projects onto a great circle
          std::array<ComplexMatrix, 3> even;
          for (int i = 0; i < 3; ++i) {
            ComplexMatrix m(2);
            m(0, 0) = 0.5;
            m(1, 1) = 0.5;
            const cxd off = i == 0 ? cxd(0.0, 0.0) : (i == 1 ? cxd(0.2, 0.0) : cxd(0.0, 0.2));
            m(0, 1) = off;
            m(1, 0) = std::conj(off);
            even[i] = m;
          }
          rec.certificates.push_back(detail::certify_one(canonicalize_subspace(even), -1));
          break;
        }
      }
    }
  }

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace qdiv
