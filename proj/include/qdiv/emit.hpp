#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdiv/run.hpp"

namespace qdiv {

namespace detail {

inline std::string csv_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out.good()) raise(ErrorCode::IoFailure, "write failed for " + path.string());
}

inline void report_divisibility(std::ostringstream& os, const DivisibilityReport& rep) {
  int n_cp = 0, n_p_only = 0, n_kernel_bad = 0;
  double most_negative = 0.0;
  double first_non_cp = -1.0;
  for (const IntervalRecord& r : rep.intervals) {
    if (r.cp)
      ++n_cp;
    else if (r.p_div)
      ++n_p_only;
    if (!r.kernel_ok) ++n_kernel_bad;
    if (r.min_choi_eig < most_negative) most_negative = r.min_choi_eig;
    if (!r.cp && first_non_cp < 0.0) first_non_cp = r.s;
  }
  os << "divisibility: verdict = " << to_string(rep.verdict) << "\n";
  os << "  intervals: " << rep.intervals.size() << " total, " << n_cp << " CP, " << n_p_only
     << " positive-only, " << n_kernel_bad << " with shrinking kernel\n";
  os << "  most negative interval Choi eigenvalue: " << csv_num(most_negative) << "\n";
  if (first_non_cp >= 0.0)
    os << "  first non-CP interval starts at t = " << csv_num(first_non_cp) << "\n";
}

inline void report_backflow(std::ostringstream& os, const BackflowReport& rep) {
  os << "backflow: max sigma = " << csv_num(rep.max_sigma) << " at t = " << csv_num(rep.argmax_t)
     << " (pair " << rep.argmax_pair << ", p1 = " << csv_num(rep.argmax_p1) << ")\n";
  os << "  sampler: " << rep.config.n_pairs << " pairs, ancilla_dim = " << rep.config.ancilla_dim
     << ", " << (rep.config.biased ? "biased" : "unbiased") << ", seed = " << rep.config.seed
     << "\n";
  os << "  threshold " << csv_num(rep.config.threshold) << ": "
     << (rep.found() ? "backflow detected" : "no backflow detected") << "\n";
  os << "  (for qubit maps, CP-divisibility is equivalent to the absence of\n"
        "   information backflow over biased pairs with a two-dimensional ancilla)\n";
}

inline void report_certificates(std::ostringstream& os, const std::vector<CertificateRow>& rows) {
  int infeasible = 0, ptp_count = 0;
  double largest_min_eig = -std::numeric_limits<double>::infinity();
  for (const CertificateRow& r : rows) {
    if (!r.cptp_feasible) ++infeasible;
    if (r.ptp_exists) ++ptp_count;
    largest_min_eig = std::max(largest_min_eig, r.worst_min_eig);
  }
  os << "certify: " << rows.size() << " three-dimensional density-spanned subspaces\n";
  os << "  CPTP projector infeasible in " << infeasible << "/" << rows.size()
     << " (largest minimum Choi eigenvalue over all candidates: " << csv_num(largest_min_eig)
     << ")\n";
  os << "  PTP projector exists in " << ptp_count
     << " (exactly the operator-system instances, p = 1/2)\n";
  for (const CertificateRow& r : rows)
    if (r.id == -1 && r.great_circle >= 0)
      os << "  constructed p = 1/2 instance: projector "
         << (r.great_circle ? "maps pure states onto a great circle" : "found") << "\n";
}

}  // namespace detail

/// Writes report.txt, trajectory.csv, backflow.csv, certificates.csv and
/// plotdata/pair_<id>.csv under out_dir (created if needed).
inline void emit(const RunRecord& rec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path base(out_dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) raise(ErrorCode::IoFailure, "cannot create " + base.string() + ": " + ec.message());

  // ---------------------------------------------------------------- report
  {
    std::ostringstream os;
    os << rec.tool_version << " run report\n\n";
    os << "== scenario ==\n" << print_scenario(rec.scenario) << "\n";
    os << "== results ==\n";
    os << "verdict: " << rec.verdict << "\n";
    if (rec.profile) {
      const ImageProfile& pr = *rec.profile;
      os << "image profile: non-increasing = " << (pr.image_non_increasing ? "yes" : "no")
         << ", dims ";
      int last = -1;
      bool first = true;
      for (const ImageProfile::Point& p : pr.points)
        if (p.dim != last) {
          os << (first ? "" : " -> ") << p.dim;
          last = p.dim;
          first = false;
        }
      os << ", worst containment residual = " << detail::csv_num(pr.worst_containment) << "\n";
      if (!pr.image_non_increasing)
        os << "  (image dimension grows along the trajectory: such a family admits no\n"
              "   divisible realization with non-increasing images, yet may still be\n"
              "   CP-divisible through non-invertible instants)\n";
    }
    if (rec.divisibility) detail::report_divisibility(os, *rec.divisibility);
    if (rec.backflow) detail::report_backflow(os, *rec.backflow);
    if (!rec.certificates.empty()) detail::report_certificates(os, rec.certificates);
    if (rec.classical) {
      const ClassicalReport& cl = *rec.classical;
      os << "classical chain: P-divisible = " << (cl.p_div ? "yes" : "no")
         << ", simplex contraction = " << (cl.contraction_ok ? "yes" : "no") << "\n";
      os << "  worst intermediate entry = " << detail::csv_num(cl.worst_entry)
         << ", worst l1 increase = " << detail::csv_num(cl.worst_increase) << "\n";
      if (cl.first_bad_step >= 0) os << "  first violating step: " << cl.first_bad_step << "\n";
      os << "  (stochastic evolutions are P-divisible exactly when every intermediate\n"
            "   step is stochastic on the reachable simplex)\n";
    }
    os << "\nwall time: " << detail::csv_num(rec.wall_seconds) << " s\n";
    detail::write_file(base / "report.txt", os.str());
  }

  // ------------------------------------------------------------ trajectory
  // an empty analyses list means "report only"
  if (rec.trajectory && !rec.scenario.analyses.empty()) {
    const MapTrajectory& traj = *rec.trajectory;
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) os << ",m" << i << j << "_re,m" << i << j << "_im";
    os << ",rank,min_choi_interval\n";
    for (int k = 0; k < traj.grid.size(); ++k) {
      os << detail::csv_num(traj.grid.time(k));
      const ComplexMatrix& m = traj.at(k).matrix();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          os << "," << detail::csv_num(m(i, j).real()) << "," << detail::csv_num(m(i, j).imag());
      os << "," << rank_profile(traj.at(k), rec.scenario.tolerances.rank).rank;
      os << ",";
      if (rec.divisibility && k < static_cast<int>(rec.divisibility->intervals.size()))
        os << detail::csv_num(rec.divisibility->intervals[static_cast<size_t>(k)].min_choi_eig);
      os << "\n";
    }
    detail::write_file(base / "trajectory.csv", os.str());
  }

  // -------------------------------------------------------------- backflow
  if (rec.backflow) {
    const HuntConfig& cfg = rec.backflow->config;
    std::ostringstream os;
    os << "# seed = " << cfg.seed << "\n";
    os << "# n_pairs = " << cfg.n_pairs << ", ancilla_dim = " << cfg.ancilla_dim
       << ", biased = " << (cfg.biased ? "true" : "false") << "\n";
    os << "# threshold = " << detail::csv_num(cfg.threshold) << "\n";
    os << "pair,t,sigma\n";
    for (const auto& row : rec.backflow_rows)
      os << static_cast<long>(row[0]) << "," << detail::csv_num(row[1]) << ","
         << detail::csv_num(row[2]) << "\n";
    detail::write_file(base / "backflow.csv", os.str());
  }

  // ---------------------------------------------------------- certificates
  if (!rec.certificates.empty()) {
    std::ostringstream os;
    os << "# seed = " << rec.scenario.sampler.seed << "\n";
    os << "id,p,lambda,trace_k,cptp_feasible,worst_min_eig,corner_q1,corner_q2,"
          "ptp_exists,operator_system,min_choi_eig,great_circle\n";
    for (const CertificateRow& r : rec.certificates) {
      os << r.id << "," << detail::csv_num(r.p) << "," << detail::csv_num(r.lambda) << ","
         << detail::csv_num(r.trace_k) << "," << (r.cptp_feasible ? 1 : 0) << ","
         << detail::csv_num(r.worst_min_eig) << "," << detail::csv_num(r.corner_q1) << ","
         << detail::csv_num(r.corner_q2) << "," << (r.ptp_exists ? 1 : 0) << ","
         << (r.operator_system ? 1 : 0) << "," << detail::csv_num(r.min_choi_eig) << ",";
      if (r.great_circle >= 0) os << r.great_circle;
      os << "\n";
    }
    detail::write_file(base / "certificates.csv", os.str());
  }

  // -------------------------------------------------------------- plotdata
  if (rec.backflow && rec.trajectory) {
    const fs::path plots = base / "plotdata";
    fs::create_directories(plots, ec);
    if (ec) raise(ErrorCode::IoFailure, "cannot create " + plots.string() + ": " + ec.message());
    const HuntConfig& cfg = rec.backflow->config;
    std::vector<int> tracked;
    for (int id = 0; id < std::min(4, cfg.n_pairs); ++id) tracked.push_back(id);
    if (rec.backflow->argmax_pair >= 0 &&
        std::find(tracked.begin(), tracked.end(), rec.backflow->argmax_pair) == tracked.end())
      tracked.push_back(rec.backflow->argmax_pair);

    const MapTrajectory& traj = *rec.trajectory;
    for (int id : tracked) {
      std::mt19937_64 rng1(mix_seed(cfg.seed, 2 * static_cast<std::uint64_t>(id)));
      std::mt19937_64 rng2(mix_seed(cfg.seed, 2 * static_cast<std::uint64_t>(id) + 1));
      const CVector psi1 = random_pure(rng1, 2 * cfg.ancilla_dim);
      const CVector psi2 = random_pure(rng2, 2 * cfg.ancilla_dim);
      const ComplexMatrix rho1 = outer(psi1, psi1);
      const ComplexMatrix rho2 = outer(psi2, psi2);
      const double p1 = id == rec.backflow->argmax_pair ? rec.backflow->argmax_p1 : 0.5;

      std::ostringstream os;
      os << "# pair " << id << ", p1 = " << detail::csv_num(p1)
         << ", ancilla_dim = " << cfg.ancilla_dim << ", seed = " << cfg.seed << "\n";
      os << "t,norm\n";
      for (int k = 0; k < traj.grid.size(); ++k) {
        const ComplexMatrix y1 = apply_extended(traj.at(k), rho1, cfg.ancilla_dim);
        const ComplexMatrix y2 = apply_extended(traj.at(k), rho2, cfg.ancilla_dim);
        const double norm = trace_norm((p1 * y1 - (1.0 - p1) * y2).hermitian_part());
        os << detail::csv_num(traj.grid.time(k)) << "," << detail::csv_num(norm) << "\n";
      }
      detail::write_file(plots / ("pair_" + std::to_string(id) + ".csv"), os.str());
    }
  }
}

}  // namespace qdiv
