#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qdiv/common.hpp"
#include "qdiv/complex_matrix.hpp"
#include "qdiv/models.hpp"

namespace qdiv {

// ---------------------------------------------------------------------------
// Scenario files: flat "key = value" lines, '#' comments, dotted keys.
// parse_scenario validates and fills defaults; print_scenario writes the
// canonical form, and print(parse(s)) reparses to an equal Scenario.
// ---------------------------------------------------------------------------

enum class ModelKind { Pauli, Maniscalco, Composition, Classical };

enum class SourceKind { Analytic, Integrate };

enum class Analysis { Divisibility, Backflow, Certify, ImageProfile };

struct GridSpec {
  double t_end = 1.0;
  int steps = 100;
};

struct SamplerSpec {
  int n_pairs = 1000;
  int ancilla_dim = 2;
  bool biased = true;
  std::uint64_t seed = 12345;
};

struct TolSpec {
  double rank = tol::rank;
  double backflow = tol::backflow;
};

struct ClassicalSpec {
  enum class Kind { Powers, Pair };
  Kind kind = Kind::Powers;
  ComplexMatrix matrix{2};    // column-stochastic transition matrix, d <= 3
  ComplexMatrix matrix_b{2};  // second step for kind = pair
  int steps = 3;              // chain length for kind = powers
};

struct Scenario {
  ModelKind model = ModelKind::Pauli;
  GridSpec grid;
  SourceKind source = SourceKind::Analytic;
  std::vector<Analysis> analyses;  // kept in pipeline order
  models::PauliRates pauli;
  models::ManiscalcoParams maniscalco;
  models::CompositionParams composition;
  ClassicalSpec classical;
  SamplerSpec sampler;
  TolSpec tolerances;
};

inline bool operator==(const Rate& a, const Rate& b) {
  return a.kind() == b.kind() && a.params() == b.params();
}

inline bool operator==(const models::PFun& a, const models::PFun& b) {
  return a.kind() == b.kind() && a.params() == b.params();
}

inline bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.t_end == b.t_end && a.steps == b.steps;
}

inline bool operator==(const SamplerSpec& a, const SamplerSpec& b) {
  return a.n_pairs == b.n_pairs && a.ancilla_dim == b.ancilla_dim && a.biased == b.biased &&
         a.seed == b.seed;
}

inline bool operator==(const TolSpec& a, const TolSpec& b) {
  return a.rank == b.rank && a.backflow == b.backflow;
}

inline bool operator==(const ClassicalSpec& a, const ClassicalSpec& b) {
  return a.kind == b.kind && a.steps == b.steps &&
         a.matrix.dim() == b.matrix.dim() && (a.matrix - b.matrix).max_abs() == 0.0 &&
         a.matrix_b.dim() == b.matrix_b.dim() && (a.matrix_b - b.matrix_b).max_abs() == 0.0;
}

inline bool operator==(const Scenario& a, const Scenario& b) {
  return a.model == b.model && a.grid == b.grid && a.source == b.source &&
         a.analyses == b.analyses && a.pauli.g1 == b.pauli.g1 && a.pauli.g2 == b.pauli.g2 &&
         a.pauli.g3 == b.pauli.g3 && a.maniscalco.omega == b.maniscalco.omega &&
         a.maniscalco.gplus == b.maniscalco.gplus && a.maniscalco.gminus == b.maniscalco.gminus &&
         a.maniscalco.g3 == b.maniscalco.g3 && a.composition.p == b.composition.p &&
         a.classical == b.classical && a.sampler == b.sampler && a.tolerances == b.tolerances;
}

namespace detail {

[[noreturn]] inline void parse_fail(ErrorCode code, int line, const std::string& what) {
  raise(code, "line " + std::to_string(line) + ": " + what);
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    parse_fail(ErrorCode::BadValue, line, "not a number: '" + s + "'");
  }
  if (used != s.size()) parse_fail(ErrorCode::BadValue, line, "trailing text in number: '" + s + "'");
  return v;
}

inline long parse_integer(const std::string& s, int line) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    parse_fail(ErrorCode::BadValue, line, "not an integer: '" + s + "'");
  }
  if (used != s.size())
    parse_fail(ErrorCode::BadValue, line, "trailing text in integer: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s, int line) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  parse_fail(ErrorCode::BadValue, line, "expected true/false: '" + s + "'");
}

/// Split "name(a, b)" into name and numeric arguments; bare names get none.
inline std::pair<std::string, std::vector<double>> parse_call(const std::string& s, int line) {
  const std::size_t open = s.find('(');
  if (open == std::string::npos) return {trim(s), {}};
  if (s.back() != ')')
    parse_fail(ErrorCode::BadValue, line, "unbalanced parentheses: '" + s + "'");
  const std::string name = trim(s.substr(0, open));
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  std::vector<double> args;
  std::string item;
  std::istringstream iss(inner);
  while (std::getline(iss, item, ',')) args.push_back(parse_number(trim(item), line));
  if (trim(inner).empty()) args.clear();
  return {name, args};
}

inline void expect_arity(const std::string& name, const std::vector<double>& args,
                         std::initializer_list<std::size_t> allowed, int line) {
  for (std::size_t n : allowed)
    if (args.size() == n) return;
  parse_fail(ErrorCode::BadValue, line,
             "wrong number of arguments for '" + name + "' (" + std::to_string(args.size()) + ")");
}

inline Rate parse_rate(const std::string& s, int line) {
  const auto [name, args] = parse_call(s, line);
  if (name == "constant") {
    expect_arity(name, args, {1}, line);
    return Rate::constant(args[0]);
  }
  if (name == "step") {
    expect_arity(name, args, {2}, line);
    return Rate::step(args[0], args[1]);
  }
  if (name == "tanh") {
    expect_arity(name, args, {0, 1}, line);
    return args.empty() ? Rate::tanh_shape() : Rate::tanh_shape(args[0]);
  }
  if (name == "neg_tanh") {
    expect_arity(name, args, {0, 1}, line);
    return args.empty() ? Rate::neg_tanh() : Rate::neg_tanh(args[0]);
  }
  if (name == "sin") {
    expect_arity(name, args, {0, 1, 2}, line);
    if (args.empty()) return Rate::sin_shape();
    return args.size() == 1 ? Rate::sin_shape(args[0]) : Rate::sin_shape(args[0], args[1]);
  }
  if (name == "neg_sin") {
    expect_arity(name, args, {0, 1, 2}, line);
    if (args.empty()) return Rate::neg_sin();
    return args.size() == 1 ? Rate::neg_sin(args[0]) : Rate::neg_sin(args[0], args[1]);
  }
  if (name == "poly") {
    if (args.empty()) parse_fail(ErrorCode::BadValue, line, "poly needs coefficients");
    return Rate::poly(args);
  }
  if (name == "blowup") {
    expect_arity(name, args, {2}, line);
    if (args[1] <= 0.0) parse_fail(ErrorCode::BadValue, line, "blow-up instant must be positive");
    return Rate::blowup(args[0], args[1]);
  }
  parse_fail(ErrorCode::UnknownKey, line, "unknown rate shape '" + name + "'");
}

inline models::PFun parse_pfun(const std::string& s, int line) {
  const auto [name, args] = parse_call(s, line);
  if (name == "ramp") {
    expect_arity(name, args, {1}, line);
    if (args[0] <= 0.0) parse_fail(ErrorCode::BadValue, line, "ramp time must be positive");
    return models::PFun::ramp(args[0]);
  }
  if (name == "smoothstep") {
    expect_arity(name, args, {1}, line);
    if (args[0] <= 0.0) parse_fail(ErrorCode::BadValue, line, "smoothstep time must be positive");
    return models::PFun::smoothstep(args[0]);
  }
  if (name == "bump") {
    expect_arity(name, args, {3}, line);
    if (!(args[0] > 0.0 && args[0] < 1.0))
      parse_fail(ErrorCode::BadValue, line, "bump amplitude must lie in (0, 1)");
    if (args[2] <= 0.0) parse_fail(ErrorCode::BadValue, line, "bump width must be positive");
    return models::PFun::bump(args[0], args[1], args[2]);
  }
  parse_fail(ErrorCode::UnknownKey, line, "unknown p(t) shape '" + name + "'");
}

/// Rows separated by ';', entries by ','. Real entries only.
inline ComplexMatrix parse_matrix(const std::string& s, int line) {
  std::vector<std::vector<double>> rows;
  std::string row;
  std::istringstream iss(s);
  while (std::getline(iss, row, ';')) {
    rows.emplace_back();
    std::string item;
    std::istringstream ris(row);
    while (std::getline(ris, item, ',')) rows.back().push_back(parse_number(trim(item), line));
  }
  const std::size_t d = rows.size();
  if (d < 1 || d > 3) parse_fail(ErrorCode::BadValue, line, "matrix dimension must be 1..3");
  for (const auto& r : rows)
    if (r.size() != d) parse_fail(ErrorCode::BadValue, line, "matrix rows must be square");
  ComplexMatrix m(static_cast<int>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  return m;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string format_call(const std::string& name, const std::vector<double>& args) {
  std::string out = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += format_number(args[i]);
  }
  return out + ")";
}

inline std::string format_rate(const Rate& r) {
  switch (r.kind()) {
    case Rate::Kind::Constant: return format_call("constant", r.params());
    case Rate::Kind::Step: return format_call("step", r.params());
    case Rate::Kind::Tanh: return format_call("tanh", r.params());
    case Rate::Kind::NegTanh: return format_call("neg_tanh", r.params());
    case Rate::Kind::Sin: return format_call("sin", r.params());
    case Rate::Kind::NegSin: return format_call("neg_sin", r.params());
    case Rate::Kind::Poly: return format_call("poly", r.params());
    case Rate::Kind::Blowup: return format_call("blowup", r.params());
  }
  return "";
}

inline std::string format_pfun(const models::PFun& p) {
  switch (p.kind()) {
    case models::PFun::Kind::Ramp: return format_call("ramp", p.params());
    case models::PFun::Kind::Smoothstep: return format_call("smoothstep", p.params());
    case models::PFun::Kind::Bump: return format_call("bump", p.params());
  }
  return "";
}

inline std::string format_matrix(const ComplexMatrix& m) {
  std::string out;
  for (int i = 0; i < m.dim(); ++i) {
    if (i) out += "; ";
    for (int j = 0; j < m.dim(); ++j) {
      if (j) out += ", ";
      out += format_number(m(i, j).real());
    }
  }
  return out;
}

inline const char* analysis_name(Analysis a) {
  switch (a) {
    case Analysis::Divisibility: return "divisibility";
    case Analysis::Backflow: return "backflow";
    case Analysis::Certify: return "certify";
    case Analysis::ImageProfile: return "image-profile";
  }
  return "";
}

inline const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::Pauli: return "pauli";
    case ModelKind::Maniscalco: return "maniscalco";
    case ModelKind::Composition: return "composition";
    case ModelKind::Classical: return "classical";
  }
  return "";
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::map<std::string, std::pair<std::string, int>> kv;  // key -> (value, line)
  {
    std::istringstream iss(text);
    std::string raw;
    int line = 0;
    while (std::getline(iss, raw)) {
      ++line;
      const std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string s = detail::trim(raw);
      if (s.empty()) continue;
      const std::size_t eq = s.find('=');
      if (eq == std::string::npos)
        detail::parse_fail(ErrorCode::BadValue, line, "expected 'key = value'");
      const std::string key = detail::trim(s.substr(0, eq));
      const std::string value = detail::trim(s.substr(eq + 1));
      if (key.empty()) detail::parse_fail(ErrorCode::BadValue, line, "empty key");
      if (value.empty()) detail::parse_fail(ErrorCode::BadValue, line, "empty value for '" + key + "'");
      if (kv.count(key))
        detail::parse_fail(ErrorCode::BadValue, line, "duplicate key '" + key + "'");
      kv[key] = {value, line};
    }
  }

  std::set<std::string> seen;
  const auto take = [&](const std::string& key) -> const std::pair<std::string, int>* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    seen.insert(key);
    return &it->second;
  };

  const auto* model = take("model");
  if (!model) raise(ErrorCode::MissingRequired, "missing required key 'model'");
  if (model->first == "pauli")
    sc.model = ModelKind::Pauli;
  else if (model->first == "maniscalco")
    sc.model = ModelKind::Maniscalco;
  else if (model->first == "composition")
    sc.model = ModelKind::Composition;
  else if (model->first == "classical")
    sc.model = ModelKind::Classical;
  else
    detail::parse_fail(ErrorCode::UnknownKey, model->second,
                       "unknown model '" + model->first + "'");

  if (const auto* v = take("grid.t_end")) {
    sc.grid.t_end = detail::parse_number(v->first, v->second);
    if (sc.grid.t_end <= 0.0)
      detail::parse_fail(ErrorCode::BadValue, v->second, "grid.t_end must be positive");
  }
  if (const auto* v = take("grid.steps")) {
    const long n = detail::parse_integer(v->first, v->second);
    if (n < 10) detail::parse_fail(ErrorCode::BadValue, v->second, "grid.steps must be >= 10");
    sc.grid.steps = static_cast<int>(n);
  }

  if (const auto* v = take("trajectory.source")) {
    if (v->first == "analytic")
      sc.source = SourceKind::Analytic;
    else if (v->first == "integrate")
      sc.source = SourceKind::Integrate;
    else
      detail::parse_fail(ErrorCode::UnknownKey, v->second,
                         "unknown trajectory source '" + v->first + "'");
  }

  if (const auto* v = take("analyses")) {
    std::set<Analysis> requested;
    if (v->first != "none") {
      std::string item;
      std::istringstream iss(v->first);
      while (std::getline(iss, item, ',')) {
        const std::string name = detail::trim(item);
        if (name == "divisibility")
          requested.insert(Analysis::Divisibility);
        else if (name == "backflow")
          requested.insert(Analysis::Backflow);
        else if (name == "certify")
          requested.insert(Analysis::Certify);
        else if (name == "image-profile")
          requested.insert(Analysis::ImageProfile);
        else
          detail::parse_fail(ErrorCode::UnknownKey, v->second, "unknown analysis '" + name + "'");
      }
    }
    // pipeline order: profile -> classify -> backflow -> certify
    for (Analysis a : {Analysis::ImageProfile, Analysis::Divisibility, Analysis::Backflow,
                       Analysis::Certify})
      if (requested.count(a)) sc.analyses.push_back(a);
  } else {
    sc.analyses = {Analysis::ImageProfile, Analysis::Divisibility};
  }

  if (const auto* v = take("pauli.gamma1")) sc.pauli.g1 = detail::parse_rate(v->first, v->second);
  if (const auto* v = take("pauli.gamma2")) sc.pauli.g2 = detail::parse_rate(v->first, v->second);
  if (const auto* v = take("pauli.gamma3")) sc.pauli.g3 = detail::parse_rate(v->first, v->second);

  if (const auto* v = take("maniscalco.omega"))
    sc.maniscalco.omega = detail::parse_rate(v->first, v->second);
  if (const auto* v = take("maniscalco.gplus"))
    sc.maniscalco.gplus = detail::parse_rate(v->first, v->second);
  if (const auto* v = take("maniscalco.gminus"))
    sc.maniscalco.gminus = detail::parse_rate(v->first, v->second);
  if (const auto* v = take("maniscalco.g3"))
    sc.maniscalco.g3 = detail::parse_rate(v->first, v->second);

  if (const auto* v = take("composition.p"))
    sc.composition.p = detail::parse_pfun(v->first, v->second);

  if (const auto* v = take("classical.kind")) {
    if (v->first == "powers")
      sc.classical.kind = ClassicalSpec::Kind::Powers;
    else if (v->first == "pair")
      sc.classical.kind = ClassicalSpec::Kind::Pair;
    else
      detail::parse_fail(ErrorCode::UnknownKey, v->second,
                         "unknown classical chain kind '" + v->first + "'");
  }
  if (const auto* v = take("classical.matrix"))
    sc.classical.matrix = detail::parse_matrix(v->first, v->second);
  if (const auto* v = take("classical.matrix_b"))
    sc.classical.matrix_b = detail::parse_matrix(v->first, v->second);
  if (const auto* v = take("classical.steps")) {
    const long n = detail::parse_integer(v->first, v->second);
    if (n < 2 || n > 64)
      detail::parse_fail(ErrorCode::BadValue, v->second, "classical.steps must be in 2..64");
    sc.classical.steps = static_cast<int>(n);
  }

  if (const auto* v = take("sampler.n_pairs")) {
    const long n = detail::parse_integer(v->first, v->second);
    if (n < 1) detail::parse_fail(ErrorCode::BadValue, v->second, "sampler.n_pairs must be >= 1");
    sc.sampler.n_pairs = static_cast<int>(n);
  }
  if (const auto* v = take("sampler.ancilla_dim")) {
    const long n = detail::parse_integer(v->first, v->second);
    if (n < 1 || n > 3)
      detail::parse_fail(ErrorCode::BadValue, v->second, "sampler.ancilla_dim must be 1, 2 or 3");
    sc.sampler.ancilla_dim = static_cast<int>(n);
  }
  if (const auto* v = take("sampler.biased"))
    sc.sampler.biased = detail::parse_bool(v->first, v->second);
  if (const auto* v = take("sampler.seed")) {
    // stoull wraps negative input around instead of failing, so reject signs
    if (v->first[0] == '-' || v->first[0] == '+')
      detail::parse_fail(ErrorCode::BadValue, v->second, "bad seed '" + v->first + "'");
    try {
      std::size_t used = 0;
      sc.sampler.seed = std::stoull(v->first, &used);
      if (used != v->first.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      detail::parse_fail(ErrorCode::BadValue, v->second, "bad seed '" + v->first + "'");
    }
  }

  if (const auto* v = take("tol.rank")) {
    sc.tolerances.rank = detail::parse_number(v->first, v->second);
    if (sc.tolerances.rank <= 0.0)
      detail::parse_fail(ErrorCode::BadValue, v->second, "tol.rank must be positive");
  }
  if (const auto* v = take("tol.backflow")) {
    sc.tolerances.backflow = detail::parse_number(v->first, v->second);
    if (sc.tolerances.backflow <= 0.0)
      detail::parse_fail(ErrorCode::BadValue, v->second, "tol.backflow must be positive");
  }

  for (const auto& [key, val] : kv)
    if (!seen.count(key))
      detail::parse_fail(ErrorCode::UnknownKey, val.second, "unknown key '" + key + "'");

  if (sc.model == ModelKind::Classical) {
    if (!kv.count("classical.matrix"))
      raise(ErrorCode::MissingRequired, "classical model requires 'classical.matrix'");
    if (sc.classical.kind == ClassicalSpec::Kind::Pair && !kv.count("classical.matrix_b"))
      raise(ErrorCode::MissingRequired, "classical pair chains require 'classical.matrix_b'");
  }

  return sc;
}

/// Canonical form: every field is printed so that print(parse(s)) reparses
/// to an equal Scenario regardless of which keys the input supplied.
inline std::string print_scenario(const Scenario& sc) {
  std::ostringstream os;
  os << "model = " << detail::model_name(sc.model) << "\n";
  os << "grid.t_end = " << detail::format_number(sc.grid.t_end) << "\n";
  os << "grid.steps = " << sc.grid.steps << "\n";
  os << "trajectory.source = "
     << (sc.source == SourceKind::Analytic ? "analytic" : "integrate") << "\n";
  os << "analyses = ";
  if (sc.analyses.empty()) os << "none";
  for (std::size_t i = 0; i < sc.analyses.size(); ++i) {
    if (i) os << ", ";
    os << detail::analysis_name(sc.analyses[i]);
  }
  os << "\n";

  os << "pauli.gamma1 = " << detail::format_rate(sc.pauli.g1) << "\n";
  os << "pauli.gamma2 = " << detail::format_rate(sc.pauli.g2) << "\n";
  os << "pauli.gamma3 = " << detail::format_rate(sc.pauli.g3) << "\n";
  os << "maniscalco.omega = " << detail::format_rate(sc.maniscalco.omega) << "\n";
  os << "maniscalco.gplus = " << detail::format_rate(sc.maniscalco.gplus) << "\n";
  os << "maniscalco.gminus = " << detail::format_rate(sc.maniscalco.gminus) << "\n";
  os << "maniscalco.g3 = " << detail::format_rate(sc.maniscalco.g3) << "\n";
  os << "composition.p = " << detail::format_pfun(sc.composition.p) << "\n";
  os << "classical.kind = "
     << (sc.classical.kind == ClassicalSpec::Kind::Powers ? "powers" : "pair") << "\n";
  os << "classical.matrix = " << detail::format_matrix(sc.classical.matrix) << "\n";
  os << "classical.matrix_b = " << detail::format_matrix(sc.classical.matrix_b) << "\n";
  os << "classical.steps = " << sc.classical.steps << "\n";

  os << "sampler.n_pairs = " << sc.sampler.n_pairs << "\n";
  os << "sampler.ancilla_dim = " << sc.sampler.ancilla_dim << "\n";
  os << "sampler.biased = " << (sc.sampler.biased ? "true" : "false") << "\n";
  os << "sampler.seed = " << sc.sampler.seed << "\n";
  os << "tol.rank = " << detail::format_number(sc.tolerances.rank) << "\n";
  os << "tol.backflow = " << detail::format_number(sc.tolerances.backflow) << "\n";
  return os.str();
}

}  // namespace qdiv
