#pragma once

// Command-line front end. run() is the whole program; main only forwards argv.
// Exit codes: 0 pass, 1 validation failure, 2 usage or schema error.

#include "combkit/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <ostream>

namespace combkit::cli {

using io::json;

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

enum class Format { json, table };

/// Parsed command line.
struct RunConfig {
  std::string subcommand;
  std::map<std::string, std::string> inputs;  // option name -> path
  double tol = kEqualityTol;
  int restarts = -1;  // -1: the module default
  std::uint64_t seed = 7;
  int threads = 0;
  Format format = Format::json;
  // align
  std::string group;
  int nab = 1, nba = 1, rounds = 1, classical_dim = 2;
  bool charge_conjugate = false;
  std::string cost = "delta";
};

/// Default tolerance, overridden by COMBKIT_TOL when set.
inline double default_tolerance() {
  if (const char* env = std::getenv("COMBKIT_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0)) throw io::SchemaError("COMBKIT_TOL", "expected a positive number");
    return v;
  }
  return kEqualityTol;
}

// ---------------------------------------------------------------------------
// Report formatting

inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array()) && j.size() <= 16) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", rows);
  } else if (j.is_array() && j.size() > 16) {
    rows.emplace_back(prefix, "<" + std::to_string(j.size()) + " entries>");
  } else {
    rows.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

inline void emit(const json& report, Format format, std::ostream& out) {
  if (format == Format::json) {
    out << io::dump(report) << "\n";
    return;
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(report, "", rows);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) out << k << std::string(width - k.size() + 2, ' ') << v << "\n";
}

inline json report_header(const std::string& command) {
  json j = io::header("report");
  j["command"] = command;
  return j;
}

inline json chain_json(const ValidationReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back({{"tooth", s.tooth}, {"residual", s.residual}});
  return {{"pass", r.pass}, {"max_residual", r.max_residual}, {"final_scalar", r.final_scalar}, {"steps", steps}};
}

// ---------------------------------------------------------------------------
// Inputs

inline const std::string& input(const RunConfig& cfg, const std::string& name) {
  const auto it = cfg.inputs.find(name);
  if (it == cfg.inputs.end() || it->second.empty())
    throw CLI::RequiredError("--" + name);
  return it->second;
}

inline bool has_input(const RunConfig& cfg, const std::string& name) {
  const auto it = cfg.inputs.find(name);
  return it != cfg.inputs.end() && !it->second.empty();
}

/// A comb from a comb, operator or network document.
inline Comb load_comb(const std::string& path) {
  const json j = io::read_file(path);
  const std::string type = io::document_type(j);
  if (type == "network") return comb_from_network(io::parse_network(j));
  if (type == "operator") return make_comb(io::parse_operator(j));
  return io::parse_comb(j);
}

inline LabeledOperator load_operator(const std::string& path) {
  const json j = io::read_file(path);
  const std::string type = io::document_type(j);
  if (type == "comb" || type == "network") return load_comb(path).op;
  return io::parse_operator(j);
}

inline Representation load_representation(const std::string& path) {
  return io::parse_representation(io::read_file(path));
}

/// The outcome action from --action, or the regular action when absent.
inline CovariantStructure load_action(const RunConfig& cfg, const FiniteGroup& g) {
  if (has_input(cfg, "action")) return io::parse_action(io::read_file(input(cfg, "action")), g);
  return CovariantStructure::regular(g);
}

/// Single-wire rep used by `align` when no --rep file is given.
inline SingleRep library_rep(const FiniteGroup& g) {
  const std::string& n = g.name();
  const int k = n.size() > 1 ? std::atoi(n.c_str() + 1) : 0;
  if (!n.empty() && n[0] == 'Z' && k > 0 && n.find('x') == std::string::npos) return qubit_phase_rep(k);
  if (!n.empty() && n[0] == 'D' && k > 0) return dihedral_rep(k);
  if (!n.empty() && n[0] == 'S' && k > 0) return permutation_rep(k);
  throw io::SchemaError("--group", "no built-in representation for group '" + n + "'; pass --rep");
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const std::string& path = input(cfg, "in");
  const json j = io::read_file(path);
  const std::string type = io::document_type(j);
  json rep = report_header("validate");
  bool pass = false;
  if (type == "tester" || type == "instrument") {
    const ValidationReport r = type == "tester" ? validate_tester(io::parse_tester(j), cfg.tol)
                                                : validate_instrument(io::parse_instrument(j), cfg.tol);
    rep["object"] = type;
    rep.update(chain_json(r));
    pass = r.pass;
  } else {
    Comb c;
    if (type == "network") {
      const ChannelNetwork net = io::parse_network(j);
      const NetworkCheck nc = check_network(net, std::max(cfg.tol, kPsdTol));
      rep["network"] = {{"trace_preserving", nc.trace_preserving}, {"max_excess", nc.max_excess}};
      c = comb_from_network(net, std::max(cfg.tol, kPsdTol));
    } else {
      c = type == "operator" ? make_comb(io::parse_operator(j)) : io::parse_comb(j);
    }
    rep["object"] = "comb";
    if (c.kind == CombKind::probabilistic) {
      const ProbabilisticReport r = validate_probabilistic(c, std::max(cfg.tol, kPsdTol));
      rep["kind"] = kind_name(c.kind);
      rep["pass"] = r.member;
      rep["residual"] = r.residual;
      rep["iterations"] = r.iterations;
      pass = r.member;
    } else {
      const ValidationReport r = validate_deterministic(c, cfg.tol);
      rep["kind"] = kind_name(CombKind::deterministic);
      rep.update(chain_json(r));
      pass = r.pass;
    }
  }
  rep["tolerance"] = cfg.tol;
  emit(rep, cfg.format, out);
  return pass ? kPass : kFail;
}

inline int cmd_link(const RunConfig& cfg, std::ostream& out) {
  const LabeledOperator a = load_operator(input(cfg, "a"));
  const LabeledOperator b = load_operator(input(cfg, "b"));
  emit(io::operator_json(link_product(a, b)), cfg.format, out);
  return kPass;
}

inline int cmd_born(const RunConfig& cfg, std::ostream& out) {
  const Comb c = load_comb(input(cfg, "comb"));
  const Tester t = io::parse_tester(io::read_file(input(cfg, "tester")));
  const auto p = born_all(t, c);
  json rep = report_header("born");
  json probs = json::object();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    probs[t.outcomes[i]] = p[i];
    total += p[i];
  }
  rep["p"] = probs;
  rep["total"] = total;
  emit(rep, cfg.format, out);
  return kPass;
}

inline int cmd_dilate(const RunConfig& cfg, std::ostream& out) {
  const Instrument inst = io::parse_instrument(io::read_file(input(cfg, "instrument")));
  const InstrumentDilation d = dilate_instrument(inst, cfg.tol);
  double recon = 0.0;
  for (std::size_t b = 0; b < inst.size(); ++b)
    recon = std::max(recon, (d.reconstruct(b).matrix() - aligned_to(inst.elements[b], d.reconstruct(b)).matrix()).norm());
  Matrix sum = Matrix::Zero(d.ancilla_dim, d.ancilla_dim);
  for (const auto& p : d.povm) sum += p;
  const double completeness = (sum - Matrix::Identity(d.ancilla_dim, d.ancilla_dim)).norm();
  const ValidationReport sv = validate_deterministic(d.comb, cfg.tol);
  json rep = report_header("dilate");
  rep["ancilla_dim"] = d.ancilla_dim;
  rep["reconstruction_residual"] = recon;
  rep["povm_completeness_residual"] = completeness;
  rep["comb_valid"] = sv.pass;
  rep["comb"] = io::comb_json(d.comb);
  rep["povm"] = io::matrices_json(d.povm);
  const bool pass = sv.pass && recon <= cfg.tol && completeness <= cfg.tol;
  rep["pass"] = pass;
  emit(rep, cfg.format, out);
  return pass ? kPass : kFail;
}

inline int cmd_decompose(const RunConfig& cfg, std::ostream& out) {
  const Tester t = io::parse_tester(io::read_file(input(cfg, "tester")));
  const TesterDecomposition d = decompose_tester(t, cfg.tol);
  const auto r = d.ancilla_dim();
  Matrix sum = Matrix::Zero(r, r);
  for (const auto& p : d.povm) sum += p;
  const double completeness = (sum - Matrix::Identity(r, r)).norm();
  json rep = report_header("decompose");
  rep["ancilla_dim"] = r;
  rep["povm_completeness_residual"] = completeness;
  rep["sandwich"] = io::matrix_json(d.sandwich);
  rep["povm"] = io::matrices_json(d.povm);
  bool pass = completeness <= cfg.tol;
  if (has_input(cfg, "comb")) {
    const Comb c = load_comb(input(cfg, "comb"));
    const auto direct = born_all(t, c);
    double diff = 0.0;
    json probs = json::object();
    for (std::size_t b = 0; b < t.size(); ++b) {
      const double p = d.probability(b, c.op);
      probs[t.outcomes[b]] = p;
      diff = std::max(diff, std::abs(p - direct[b]));
    }
    rep["p"] = probs;
    rep["probability_residual"] = diff;
    pass = pass && diff <= cfg.tol;
  }
  rep["pass"] = pass;
  emit(rep, cfg.format, out);
  return pass ? kPass : kFail;
}

inline int cmd_distance(const RunConfig& cfg, std::ostream& out) {
  const Comb a = load_comb(input(cfg, "a"));
  const Comb b = load_comb(input(cfg, "b"));
  DistanceOptions o;
  if (cfg.restarts >= 0) o.restarts = cfg.restarts;
  o.seed = cfg.seed;
  const DistanceResult r = operational_distance(a, b, o);
  json rep = report_header("distance");
  rep["value"] = r.value;
  rep["rounds"] = r.rounds;
  rep["restarts"] = o.restarts;
  rep["seed"] = cfg.seed;
  rep["per_restart"] = r.per_restart;
  rep["witness"] = io::operator_json(r.witness);
  emit(rep, cfg.format, out);
  return kPass;
}

inline int cmd_twirl(const RunConfig& cfg, std::ostream& out) {
  const Representation rep = load_representation(input(cfg, "rep"));
  if (has_input(cfg, "comb")) {
    emit(io::comb_json(twirl_comb(load_comb(input(cfg, "comb")), rep)), cfg.format, out);
    return kPass;
  }
  const CovariantStructure st = load_action(cfg, rep.group());
  if (has_input(cfg, "instrument")) {
    const Instrument inst = io::parse_instrument(io::read_file(input(cfg, "instrument")));
    emit(io::instrument_json(twirl_instrument(inst, rep, st)), cfg.format, out);
    return kPass;
  }
  const Tester t = io::parse_tester(io::read_file(input(cfg, "tester")));
  emit(io::tester_json(twirl_tester(t, rep, st)), cfg.format, out);
  return kPass;
}

inline int cmd_check_covariance(const RunConfig& cfg, std::ostream& out) {
  const Representation rep = load_representation(input(cfg, "rep"));
  json report = report_header("check-covariance");
  double residual = 0.0;
  if (has_input(cfg, "comb")) {
    report["object"] = "comb";
    residual = check_covariant_comb(load_comb(input(cfg, "comb")), rep);
  } else if (has_input(cfg, "instrument")) {
    report["object"] = "instrument";
    residual = check_covariant_instrument(io::parse_instrument(io::read_file(input(cfg, "instrument"))), rep,
                                          load_action(cfg, rep.group()));
  } else {
    report["object"] = "tester";
    const Tester t = io::parse_tester(io::read_file(input(cfg, "tester")));
    residual = check_covariant_tester(t, rep, load_action(cfg, rep.group()));
  }
  report["residual"] = residual;
  report["tolerance"] = cfg.tol;
  report["pass"] = residual <= cfg.tol;
  emit(report, cfg.format, out);
  return residual <= cfg.tol ? kPass : kFail;
}

inline int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  const CombFamily f = io::parse_family(io::read_file(input(cfg, "family")));
  const CostFunction c = io::parse_cost(io::read_file(input(cfg, "cost")), f);
  EstimationOptions o;
  if (cfg.restarts >= 0) o.restarts = cfg.restarts;
  o.seed = cfg.seed;
  const EstimationResult r = optimize_covariant_tester(f, c, o);
  json rep = report_header("estimate");
  rep["cost"] = r.cost;
  rep["worst_case_cost"] = worst_case_cost(r.tester, f, c);
  rep["restarts"] = o.restarts;
  rep["seed"] = cfg.seed;
  rep["per_restart"] = r.per_restart;
  rep["iterations"] = r.iterations;
  rep["converged"] = r.converged;
  rep["witness_seed"] = io::operator_json(r.seed);
  rep["tester"] = io::tester_json(r.tester);
  emit(rep, cfg.format, out);
  return kPass;
}

inline int cmd_align(const RunConfig& cfg, std::ostream& out) {
  FiniteGroup g;
  SingleRep u;
  if (has_input(cfg, "rep")) {
    const Representation rep = load_representation(input(cfg, "rep"));
    if (rep.maps().size() != 1) throw io::SchemaError("--rep", "expected a representation on exactly one space");
    g = rep.group();
    u = rep.maps().begin()->second;
  } else {
    try {
      g = group_by_name(cfg.group.empty() ? "Z3" : cfg.group);
    } catch (const GroupError& e) {
      throw io::SchemaError("--group", e.what());
    }
    u = library_rep(g);
  }
  CostFunction c;
  if (cfg.cost == "delta") {
    c = delta_cost(g);
  } else if (cfg.cost == "fidelity") {
    c = fidelity_cost(g, u);
  } else {
    throw io::SchemaError("--cost", "expected 'delta' or 'fidelity'");
  }
  AlignmentOptions o;
  o.classical_dim = cfg.classical_dim;
  o.charge_conjugate = cfg.charge_conjugate;
  if (cfg.restarts >= 0) o.restarts = cfg.restarts;
  o.seed = cfg.seed;
  if (cfg.tol != kEqualityTol) o.tolerance = cfg.tol;
  const AlignmentReport r = frame_alignment_compare(g, u, cfg.nab, cfg.nba, cfg.rounds, c, o);
  json rep = report_header("align");
  rep["group"] = g.name();
  rep["nab"] = cfg.nab;
  rep["nba"] = cfg.nba;
  rep["rounds"] = cfg.rounds;
  rep["classical_dim"] = cfg.classical_dim;
  rep["charge_conjugate"] = cfg.charge_conjugate;
  rep["multi_round"] = r.multi_round;
  rep["single_round"] = r.single_round;
  rep["gap"] = r.gap;
  rep["tolerance"] = r.tolerance;
  rep["consistent"] = r.consistent;
  rep["equal"] = r.equal;
  rep["see_saw_rounds"] = r.rounds;
  rep["iterations"] = r.iterations;
  rep["witness_seed"] = io::operator_json(r.seed);
  emit(rep, cfg.format, out);
  return r.consistent ? kPass : kFail;
}

// ---------------------------------------------------------------------------
// Entry point

inline int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (cfg.threads > 0) Eigen::setNbThreads(cfg.threads);
  const std::string& s = cfg.subcommand;
  if (s == "validate") return cmd_validate(cfg, out);
  if (s == "link") return cmd_link(cfg, out);
  if (s == "born") return cmd_born(cfg, out);
  if (s == "dilate") return cmd_dilate(cfg, out);
  if (s == "decompose") return cmd_decompose(cfg, out);
  if (s == "distance") return cmd_distance(cfg, out);
  if (s == "twirl") return cmd_twirl(cfg, out);
  if (s == "check-covariance") return cmd_check_covariance(cfg, out);
  if (s == "estimate") return cmd_estimate(cfg, out);
  if (s == "align") return cmd_align(cfg, out);
  throw CLI::CallForHelp();
}

/// Runs one command line (args excludes the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Quantum comb toolkit", "combkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::optional<double> tol;
  bool table = false;
  const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> commands{
      {"validate", {{"in", "comb, network, tester or instrument document"}}},
      {"link", {{"a", "first operator or comb"}, {"b", "second operator or comb"}}},
      {"born", {{"comb", "measured comb or network"}, {"tester", "tester document"}}},
      {"dilate", {{"instrument", "instrument document"}}},
      {"decompose", {{"tester", "tester document"}, {"comb", "optional comb to evaluate both ways"}}},
      {"distance", {{"a", "first deterministic comb"}, {"b", "second deterministic comb"}}},
      {"twirl", {{"tester", "tester document"}, {"instrument", "instrument document"}, {"comb", "comb document"},
                 {"rep", "representation document"}, {"action", "outcome action (default: regular)"}}},
      {"check-covariance",
       {{"tester", "tester document"}, {"instrument", "instrument document"}, {"comb", "comb document"},
        {"rep", "representation document"}, {"action", "outcome action (default: regular)"}}},
      {"estimate", {{"family", "family document"}, {"cost", "cost document"}}},
      {"align", {{"rep", "single-space representation document (overrides --group)"}}},
  };
  for (const auto& [name, opts] : commands) {
    CLI::App* sub = app.add_subcommand(name);
    for (const auto& [opt, help] : opts) sub->add_option("--" + opt, cfg.inputs[opt], help);
    sub->add_option("--tol", tol, "tolerance (default COMBKIT_TOL or 1e-9)")->check(CLI::PositiveNumber);
    sub->add_flag("--json", "JSON report (default)");
    sub->add_flag("--table", table, "plain key/value report");
    sub->add_option("--threads", cfg.threads, "cap on worker threads")->check(CLI::NonNegativeNumber);
    if (name == "distance" || name == "estimate" || name == "align") {
      sub->add_option("--restarts", cfg.restarts, "random restarts")->check(CLI::NonNegativeNumber);
      sub->add_option("--seed", cfg.seed, "random seed");
    }
    if (name == "align") {
      sub->add_option("--group", cfg.group, "library group name (Z<d>, D<n>, S<n>)");
      sub->add_option("--nab", cfg.nab, "particles Alice to Bob per round")->check(CLI::NonNegativeNumber);
      sub->add_option("--nba", cfg.nba, "particles Bob to Alice per round")->check(CLI::NonNegativeNumber);
      sub->add_option("--rounds", cfg.rounds, "communication rounds")->check(CLI::PositiveNumber);
      sub->add_option("--classical-dim", cfg.classical_dim, "classical wire dimension")->check(CLI::PositiveNumber);
      sub->add_flag("--charge-conjugate", cfg.charge_conjugate, "send conjugate particles Bob to Alice");
      sub->add_option("--cost", cfg.cost, "delta or fidelity");
    }
    sub->callback([&cfg, name = name] { cfg.subcommand = name; });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }
  cfg.format = table ? Format::table : Format::json;

  try {
    cfg.tol = tol ? *tol : default_tolerance();
    return dispatch(cfg, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::SchemaError& e) {
    err << "schema error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "schema error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownSpaceError& e) {
    err << "schema error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "validation failed: " << e.what() << "\n";
    return kFail;
  }
}

}  // namespace combkit::cli
