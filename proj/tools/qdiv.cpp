#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qdiv/emit.hpp"
#include "qdiv/run.hpp"
#include "qdiv/scenario.hpp"

namespace {

// Exit codes: 0 completed, 2 scenario invalid, 3 analysis error or
// non-divisible verdict, 1 unexpected failure.
constexpr int kExitOk = 0;
constexpr int kExitScenario = 2;
constexpr int kExitAnalysis = 3;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qdiv::Error(qdiv::ErrorCode::IoFailure, "cannot read scenario file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdiv: divisibility, information backflow and projector "
               "certificates for qubit dynamical maps"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "qdiv_out";
  std::optional<std::uint64_t> seed_flag;
  std::optional<double> tol_rank_flag;
  std::optional<double> threshold_flag;

  app.add_option("--scenario", scenario_path, "scenario config file")->required();
  app.add_option("--out", out_dir, "output directory (default qdiv_out)");
  app.add_option("--seed", seed_flag, "override the sampler seed (flag > QDIV_SEED > file)");
  app.add_option("--tol-rank", tol_rank_flag, "relative singular-value cutoff for rank decisions");
  app.add_option("--threshold", threshold_flag, "backflow detection threshold");

  CLI::App* cmd_simulate = app.add_subcommand("simulate", "integrate or evaluate the trajectory");
  CLI::App* cmd_div = app.add_subcommand("divisibility", "image profile and interval classifier");
  CLI::App* cmd_backflow = app.add_subcommand("backflow", "randomized biased backflow hunt");
  CLI::App* cmd_certify = app.add_subcommand("certify", "projector and extendability certificates");
  CLI::App* cmd_all = app.add_subcommand("all", "everything the scenario requests");
  for (CLI::App* c : {cmd_simulate, cmd_div, cmd_backflow, cmd_certify, cmd_all})
    c->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  qdiv::Scenario sc;
  try {
    sc = qdiv::parse_scenario(read_text(scenario_path));
  } catch (const qdiv::Error& e) {
    std::fprintf(stderr, "scenario error: %s\n", e.what());
    return kExitScenario;
  }

  // subcommands narrow the analysis list; "all" keeps the scenario's request
  using qdiv::Analysis;
  if (cmd_simulate->parsed()) sc.analyses = {};
  if (cmd_div->parsed()) sc.analyses = {Analysis::ImageProfile, Analysis::Divisibility};
  if (cmd_backflow->parsed()) sc.analyses = {Analysis::Backflow};
  if (cmd_certify->parsed()) sc.analyses = {Analysis::Certify};
  if (cmd_all->parsed() && sc.analyses.empty())
    sc.analyses = {Analysis::ImageProfile, Analysis::Divisibility, Analysis::Backflow,
                   Analysis::Certify};

  // precedence: flag > environment > scenario file
  if (const char* env = std::getenv("QDIV_SEED"); env && !seed_flag) {
    try {
      const std::string es(env);
      if (es.empty() || es[0] == '-' || es[0] == '+') throw std::invalid_argument("sign");
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(es, &used);
      if (used != es.size()) throw std::invalid_argument("trailing");
      sc.sampler.seed = v;
    } catch (const std::exception&) {
      std::fprintf(stderr, "scenario error: bad QDIV_SEED '%s'\n", env);
      return kExitScenario;
    }
  }
  if (seed_flag) sc.sampler.seed = *seed_flag;
  if (tol_rank_flag) {
    if (*tol_rank_flag <= 0.0) {
      std::fprintf(stderr, "scenario error: --tol-rank must be positive\n");
      return kExitScenario;
    }
    sc.tolerances.rank = *tol_rank_flag;
  }
  if (threshold_flag) {
    if (*threshold_flag <= 0.0) {
      std::fprintf(stderr, "scenario error: --threshold must be positive\n");
      return kExitScenario;
    }
    sc.tolerances.backflow = *threshold_flag;
  }

  try {
    const qdiv::RunRecord rec = qdiv::run(sc);
    qdiv::emit(rec, out_dir);
    std::printf("%s\n", rec.verdict.c_str());
    if (rec.divisibility && rec.divisibility->verdict == qdiv::Verdict::NotDivisible)
      return kExitAnalysis;
    return kExitOk;
  } catch (const qdiv::Error& e) {
    std::fprintf(stderr, "analysis error: %s\n", e.what());
    return kExitAnalysis;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
