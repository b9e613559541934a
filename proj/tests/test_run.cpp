#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qdiv/emit.hpp"
#include "qdiv/run.hpp"

using namespace qdiv;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("qdiv_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("empty analyses produce a report and nothing else") {
  Scenario sc = parse_scenario(
      "model = pauli\n"
      "pauli.gamma1 = constant(1)\n"
      "analyses = none\n");
  const RunRecord rec = run(sc);
  REQUIRE(rec.trajectory.has_value());
  REQUIRE(!rec.profile);
  REQUIRE(!rec.divisibility);
  REQUIRE(!rec.backflow);
  REQUIRE(rec.certificates.empty());
  REQUIRE(rec.verdict == "none");

  const fs::path dir = fresh_dir("report_only");
  emit(rec, dir.string());
  REQUIRE(fs::exists(dir / "report.txt"));
  REQUIRE(!fs::exists(dir / "trajectory.csv"));
  REQUIRE(!fs::exists(dir / "backflow.csv"));
  REQUIRE(!fs::exists(dir / "certificates.csv"));
  REQUIRE(!fs::exists(dir / "plotdata"));

  const std::string report = slurp(dir / "report.txt");
  REQUIRE(report.find("sampler.seed = 12345") != std::string::npos);
  REQUIRE(report.find("wall time:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("backflow rows count pairs times grid points") {
  Scenario sc = parse_scenario(
      "model = pauli\n"
      "grid.t_end = 1\n"
      "grid.steps = 20\n"
      "pauli.gamma1 = constant(1)\n"
      "analyses = backflow\n"
      "sampler.n_pairs = 7\n"
      "sampler.ancilla_dim = 1\n"
      "sampler.seed = 99\n");
  const RunRecord rec = run(sc);
  REQUIRE(rec.backflow.has_value());
  REQUIRE(rec.backflow_rows.size() == 7u * 21u);

  const fs::path dir = fresh_dir("backflow");
  emit(rec, dir.string());
  REQUIRE(fs::exists(dir / "trajectory.csv"));

  const std::string csv = slurp(dir / "backflow.csv");
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  REQUIRE(rows == 7u * 21u + 4u);  // three comment lines and the header

  // plot data for the first four pairs, plus the argmax pair when distinct
  int tracked = 0;
  for (const auto& entry : fs::directory_iterator(dir / "plotdata")) {
    (void)entry;
    ++tracked;
  }
  const int argmax = rec.backflow->argmax_pair;
  REQUIRE(tracked == (argmax >= 4 ? 5 : 4));
  fs::remove_all(dir);
}

TEST_CASE("classical runs carry their own verdict") {
  Scenario sc = parse_scenario(
      "model = classical\n"
      "classical.kind = pair\n"
      "classical.matrix = 0.75, 0.25; 0.25, 0.75\n"
      "classical.matrix_b = 1, 0; 0, 1\n"
      "analyses = divisibility\n");
  const RunRecord rec = run(sc);
  REQUIRE(rec.classical.has_value());
  REQUIRE(!rec.classical->p_div);
  REQUIRE(!rec.classical->contraction_ok);
  REQUIRE(rec.verdict == "not P-divisible (classical)");
  REQUIRE(!rec.trajectory);

  const fs::path dir = fresh_dir("classical");
  emit(rec, dir.string());
  const std::string report = slurp(dir / "report.txt");
  REQUIRE(report.find("P-divisible = no") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("certify produces the constructed instance plus sampled rows") {
  Scenario sc = parse_scenario(
      "model = pauli\n"
      "pauli.gamma1 = constant(1)\n"
      "analyses = certify\n"
      "sampler.seed = 5\n");
  const RunRecord rec = run(sc);
  REQUIRE(rec.certificates.size() == 21u);
  int constructed = 0;
  for (const CertificateRow& r : rec.certificates) {
    REQUIRE(!r.cptp_feasible);
    if (r.id == -1) {
      ++constructed;
      REQUIRE(r.ptp_exists);
      REQUIRE(r.operator_system);
      REQUIRE(r.great_circle == 1);
    }
  }
  REQUIRE(constructed == 1);
}

TEST_CASE("record reruns reproduce verdicts") {
  Scenario sc = parse_scenario(
      "model = pauli\n"
      "grid.t_end = 2\n"
      "grid.steps = 40\n"
      "pauli.gamma1 = constant(1)\n"
      "pauli.gamma2 = constant(1)\n"
      "pauli.gamma3 = neg_tanh\n"
      "analyses = divisibility, backflow\n"
      "sampler.n_pairs = 12\n"
      "sampler.seed = 2718\n");
  const RunRecord a = run(sc);
  const RunRecord b = run(sc);
  REQUIRE(a.verdict == b.verdict);
  REQUIRE(a.backflow->max_sigma == b.backflow->max_sigma);
  REQUIRE(a.backflow->argmax_pair == b.backflow->argmax_pair);
  REQUIRE(a.backflow_rows == b.backflow_rows);
}
