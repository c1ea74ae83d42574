#pragma once

// JSON documents. Every document carries "version": 1 and a "type"; unknown
// fields are rejected with the JSON path of the offending member.
//
//   operator     {spaces: [{id, dim, role}], matrix: [[re, im], ...] row-major}
//   comb         operator fields + teeth + kind
//   network      {steps: [{in_dim, out_dim, memory_in, memory_out, kraus: [matrix]}]}
//   tester       {teeth, spaces, outcomes: [{label, matrix}]}   (same for instrument)
//   group        {name} or {table}
//   representation {group, spaces: [{id, matrices: [matrix]}]}
//   action       {group, table, base}
//   family       {representation, base} or {group, n_copy: {matrices, copies}}
//   cost         {kind: delta | fidelity | table, table}
//
// A dense matrix outside an operator is {rows, cols, data: [[re, im], ...]}.

#include "combkit/estimation.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace combkit::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& msg) : Error(path + ": " + msg), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Strict view of a JSON object: every member must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(const std::string& key) const { return path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw SchemaError(path_, "missing required field '" + key + "'");
    return j_.at(key);
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  int integer(const std::string& key) { return as_int(require(key), child(key)); }
  std::string string(const std::string& key) { return as_string(require(key), child(key)); }
  int optional_int(const std::string& key, int fallback) {
    const json* v = optional(key);
    return v ? as_int(*v, child(key)) : fallback;
  }

  /// Rejects members that were never requested.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw SchemaError(child(it.key()), "unknown field");
  }

  static int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
    return v.get<int>();
  }
  static double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    return v.get<double>();
  }
  static std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected a string");
    return v.get<std::string>();
  }
  static const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw SchemaError(path, "expected an array");
    return v;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

/// Checks version and type, returning the reader positioned on the document.
inline Reader open_document(const json& j, const std::string& type, const std::string& path = "$") {
  Reader r(j, path);
  const int v = r.integer("version");
  if (v != kSchemaVersion)
    throw SchemaError(r.child("version"), "unsupported version " + std::to_string(v) + ", expected " +
                                              std::to_string(kSchemaVersion));
  const std::string t = r.string("type");
  if (t != type) throw SchemaError(r.child("type"), "expected type '" + type + "', got '" + t + "'");
  return r;
}

inline std::string document_type(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw SchemaError("$", "document has no string field 'type'");
  return j.at("type").get<std::string>();
}

inline json header(const std::string& type) {
  json j;
  j["version"] = kSchemaVersion;
  j["type"] = type;
  return j;
}

// ---------------------------------------------------------------------------
// Scalars and matrices

inline Complex parse_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) throw SchemaError(path, "expected [re, im]");
  return {Reader::as_double(v[0], index_path(path, 0)), Reader::as_double(v[1], index_path(path, 1))};
}

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Matrix parse_entries(const json& data, Eigen::Index rows, Eigen::Index cols, const std::string& path) {
  Reader::as_array(data, path);
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw SchemaError(path, "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(data.size()));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto k = static_cast<std::size_t>(i * cols + j);
      m(i, j) = parse_complex(data[k], index_path(path, k));
    }
  return m;
}

inline json entries_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(complex_json(m(i, j)));
  return a;
}

inline Matrix parse_matrix(const json& j, const std::string& path) {
  Reader r(j, path);
  const int rows = r.integer("rows"), cols = r.integer("cols");
  if (rows < 1 || cols < 1) throw SchemaError(path, "matrix dimensions must be positive");
  Matrix m = parse_entries(r.require("data"), rows, cols, r.child("data"));
  r.finish();
  return m;
}

inline json matrix_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = entries_json(m);
  return j;
}

// ---------------------------------------------------------------------------
// Operators and combs

inline Role parse_role(const json& v, const std::string& path) {
  const std::string s = Reader::as_string(v, path);
  for (Role r : {Role::input, Role::output, Role::ancilla, Role::classical})
    if (s == role_name(r)) return r;
  throw SchemaError(path, "unknown role '" + s + "'");
}

inline std::vector<SpaceLabel> parse_spaces(const json& v, const std::string& path) {
  Reader::as_array(v, path);
  std::vector<SpaceLabel> spaces;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Reader s(v[i], index_path(path, i));
    SpaceLabel label;
    label.id = s.integer("id");
    label.dim = s.integer("dim");
    if (label.dim < 1) throw SchemaError(s.child("dim"), "dimension must be positive");
    label.role = parse_role(s.require("role"), s.child("role"));
    s.finish();
    spaces.push_back(label);
  }
  std::set<int> ids;
  for (std::size_t i = 0; i < spaces.size(); ++i)
    if (!ids.insert(spaces[i].id).second) throw SchemaError(index_path(path, i) + ".id", "duplicate space id");
  return spaces;
}

inline json spaces_json(std::span<const SpaceLabel> spaces) {
  json a = json::array();
  for (const auto& s : spaces) a.push_back({{"id", s.id}, {"dim", s.dim}, {"role", role_name(s.role)}});
  return a;
}

/// Reads the operator members (spaces, matrix) of an open object.
inline LabeledOperator read_operator_fields(Reader& r) {
  const auto spaces = parse_spaces(r.require("spaces"), r.child("spaces"));
  const Eigen::Index d = detail::total_dim(spaces);
  Matrix m = parse_entries(r.require("matrix"), d, d, r.child("matrix"));
  return {spaces, std::move(m)};
}

inline void write_operator_fields(json& j, const LabeledOperator& op) {
  j["spaces"] = spaces_json(op.spaces());
  j["matrix"] = entries_json(op.matrix());
}

inline LabeledOperator parse_operator(const json& j, const std::string& path = "$") {
  Reader r = open_document(j, "operator", path);
  LabeledOperator op = read_operator_fields(r);
  r.finish();
  return op;
}

inline json operator_json(const LabeledOperator& op) {
  json j = header("operator");
  write_operator_fields(j, op);
  return j;
}

inline CombKind parse_kind(const json& v, const std::string& path) {
  const std::string s = Reader::as_string(v, path);
  for (CombKind k : {CombKind::deterministic, CombKind::probabilistic, CombKind::unvalidated})
    if (s == kind_name(k)) return k;
  throw SchemaError(path, "unknown comb kind '" + s + "'");
}

inline Comb parse_comb(const json& j, const std::string& path = "$") {
  Reader r = open_document(j, "comb", path);
  const LabeledOperator op = read_operator_fields(r);
  CombKind kind = CombKind::unvalidated;
  if (const json* k = r.optional("kind")) kind = parse_kind(*k, r.child("kind"));
  std::optional<int> teeth;
  if (const json* t = r.optional("teeth")) teeth = Reader::as_int(*t, r.child("teeth"));
  r.finish();
  Comb c;
  try {
    c = make_comb(op, kind);
  } catch (const DimensionError& e) {
    throw SchemaError(r.child("spaces"), e.what());
  }
  if (teeth && *teeth != c.teeth)
    throw SchemaError(r.child("teeth"), "teeth " + std::to_string(*teeth) + " disagrees with " +
                                            std::to_string(c.op.spaces().size()) + " spaces");
  return c;
}

inline json comb_json(const Comb& c) {
  json j = header("comb");
  j["teeth"] = c.teeth;
  j["kind"] = kind_name(c.kind);
  write_operator_fields(j, c.op);
  return j;
}

// ---------------------------------------------------------------------------
// Networks

inline ChannelNetwork parse_network(const json& j, const std::string& path = "$") {
  Reader r = open_document(j, "network", path);
  const json& steps = Reader::as_array(r.require("steps"), r.child("steps"));
  r.finish();
  ChannelNetwork net;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string sp = index_path(r.child("steps"), i);
    Reader s(steps[i], sp);
    NetworkStep step;
    step.in_dim = s.integer("in_dim");
    step.out_dim = s.integer("out_dim");
    step.memory_in = s.optional_int("memory_in", 1);
    step.memory_out = s.optional_int("memory_out", 1);
    for (const auto& [name, v] : {std::pair{"in_dim", step.in_dim}, std::pair{"out_dim", step.out_dim},
                                  std::pair{"memory_in", step.memory_in}, std::pair{"memory_out", step.memory_out}})
      if (v < 1) throw SchemaError(s.child(name), "dimension must be positive");
    const json& kraus = Reader::as_array(s.require("kraus"), s.child("kraus"));
    for (std::size_t k = 0; k < kraus.size(); ++k) {
      const std::string kp = index_path(s.child("kraus"), k);
      Matrix m = parse_matrix(kraus[k], kp);
      if (m.rows() != static_cast<Eigen::Index>(step.out_dim) * step.memory_out ||
          m.cols() != static_cast<Eigen::Index>(step.memory_in) * step.in_dim)
        throw SchemaError(kp, "Kraus operator must be (out_dim*memory_out) x (memory_in*in_dim)");
      step.kraus.push_back(std::move(m));
    }
    if (step.kraus.empty()) throw SchemaError(s.child("kraus"), "at least one Kraus operator is required");
    s.finish();
    net.steps.push_back(std::move(step));
  }
  if (net.steps.empty()) throw SchemaError(r.child("steps"), "network has no steps");
  return net;
}

inline json network_json(const ChannelNetwork& net) {
  json j = header("network");
  json steps = json::array();
  for (const auto& s : net.steps) {
    json k = json::array();
    for (const auto& m : s.kraus) k.push_back(matrix_json(m));
    steps.push_back({{"in_dim", s.in_dim},
                     {"out_dim", s.out_dim},
                     {"memory_in", s.memory_in},
                     {"memory_out", s.memory_out},
                     {"kraus", k}});
  }
  j["steps"] = steps;
  return j;
}

// ---------------------------------------------------------------------------
// Testers and instruments

template <class Family>
Family parse_outcome_family(const json& j, const std::string& type, const std::string& path = "$") {
  Reader r = open_document(j, type, path);
  const int teeth = r.integer("teeth");
  const auto spaces = parse_spaces(r.require("spaces"), r.child("spaces"));
  const json& outcomes = Reader::as_array(r.require("outcomes"), r.child("outcomes"));
  r.finish();
  if (outcomes.empty()) throw SchemaError(r.child("outcomes"), "at least one outcome is required");
  const Eigen::Index d = detail::total_dim(spaces);
  std::vector<std::string> labels;
  std::vector<LabeledOperator> elements;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const std::string op = index_path(r.child("outcomes"), i);
    Reader o(outcomes[i], op);
    const std::string label = o.string("label");
    if (!seen.insert(label).second) throw SchemaError(o.child("label"), "duplicate outcome label");
    labels.push_back(label);
    elements.emplace_back(spaces, parse_entries(o.require("matrix"), d, d, o.child("matrix")));
    o.finish();
  }
  try {
    return make_family<Family>(std::move(elements), teeth, std::move(labels));
  } catch (const DimensionError& e) {
    throw SchemaError(r.child("spaces"), e.what());
  }
}

inline json outcome_family_json(const OutcomeFamily& f, const std::string& type) {
  json j = header(type);
  j["teeth"] = f.teeth;
  j["spaces"] = spaces_json(f.elements.at(0).spaces());
  json out = json::array();
  for (std::size_t i = 0; i < f.size(); ++i)
    out.push_back({{"label", f.outcomes[i]}, {"matrix", entries_json(f.elements[i].matrix())}});
  j["outcomes"] = out;
  return j;
}

inline Tester parse_tester(const json& j, const std::string& path = "$") {
  return parse_outcome_family<Tester>(j, "tester", path);
}
inline Instrument parse_instrument(const json& j, const std::string& path = "$") {
  return parse_outcome_family<Instrument>(j, "instrument", path);
}
inline json tester_json(const Tester& t) { return outcome_family_json(t, "tester"); }
inline json instrument_json(const Instrument& i) { return outcome_family_json(i, "instrument"); }

// ---------------------------------------------------------------------------
// Groups, representations, actions

/// A group given inline as {name} or {table}, or as a bare library name.
inline FiniteGroup parse_group(const json& j, const std::string& path) {
  try {
    if (j.is_string()) return group_by_name(j.get<std::string>());
    Reader r(j, path);
    if (const json* v = r.optional("version")) {
      if (Reader::as_int(*v, r.child("version")) != kSchemaVersion) throw SchemaError(r.child("version"), "unsupported version");
      if (const json* t = r.optional("type"); !t || !t->is_string() || t->get<std::string>() != "group")
        throw SchemaError(r.child("type"), "expected type 'group'");
    }
    const json* name = r.optional("name");
    const json* table = r.optional("table");
    r.finish();
    if (table) {
      Reader::as_array(*table, r.child("table"));
      std::vector<std::vector<int>> t;
      for (std::size_t i = 0; i < table->size(); ++i) {
        const std::string rp = index_path(r.child("table"), i);
        Reader::as_array((*table)[i], rp);
        std::vector<int> row;
        for (std::size_t k = 0; k < (*table)[i].size(); ++k)
          row.push_back(Reader::as_int((*table)[i][k], index_path(rp, k)));
        t.push_back(std::move(row));
      }
      return FiniteGroup(std::move(t), name ? Reader::as_string(*name, r.child("name")) : "");
    }
    if (name) return group_by_name(Reader::as_string(*name, r.child("name")));
    throw SchemaError(path, "group needs 'name' or 'table'");
  } catch (const GroupError& e) {
    throw SchemaError(path, e.what());
  }
}

inline json group_json(const FiniteGroup& g) {
  json j;
  if (!g.name().empty()) j["name"] = g.name();
  j["table"] = g.table();
  return j;
}

inline SingleRep parse_matrices(const json& v, const std::string& path) {
  Reader::as_array(v, path);
  SingleRep u;
  for (std::size_t i = 0; i < v.size(); ++i) u.push_back(parse_matrix(v[i], index_path(path, i)));
  return u;
}

inline json matrices_json(const SingleRep& u) {
  json a = json::array();
  for (const auto& m : u) a.push_back(matrix_json(m));
  return a;
}

inline Representation read_representation_fields(Reader& r) {
  const FiniteGroup g = parse_group(r.require("group"), r.child("group"));
  Representation rep(g);
  const json& spaces = Reader::as_array(r.require("spaces"), r.child("spaces"));
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const std::string sp = index_path(r.child("spaces"), i);
    Reader s(spaces[i], sp);
    const int id = s.integer("id");
    SingleRep u = parse_matrices(s.require("matrices"), s.child("matrices"));
    s.finish();
    if (static_cast<int>(u.size()) != g.order())
      throw SchemaError(s.child("matrices"), "expected " + std::to_string(g.order()) + " matrices, one per element");
    try {
      rep.set(id, std::move(u));
    } catch (const GroupError& e) {
      throw SchemaError(s.child("matrices"), e.what());
    }
  }
  return rep;
}

inline Representation parse_representation(const json& j, const std::string& path = "$") {
  Reader r = open_document(j, "representation", path);
  Representation rep = read_representation_fields(r);
  r.finish();
  return rep;
}

inline json representation_json(const Representation& rep) {
  json j = header("representation");
  j["group"] = group_json(rep.group());
  json spaces = json::array();
  for (const auto& [id, u] : rep.maps()) spaces.push_back({{"id", id}, {"matrices", matrices_json(u)}});
  j["spaces"] = spaces;
  return j;
}

/// An outcome action over the representation's group.
inline CovariantStructure parse_action(const json& j, const FiniteGroup& g, const std::string& path = "$") {
  Reader r = open_document(j, "action", path);
  const json& table = Reader::as_array(r.require("table"), r.child("table"));
  const int base = r.optional_int("base", 0);
  r.finish();
  std::vector<std::vector<int>> t;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string rp = index_path(r.child("table"), i);
    Reader::as_array(table[i], rp);
    std::vector<int> row;
    for (std::size_t k = 0; k < table[i].size(); ++k) row.push_back(Reader::as_int(table[i][k], index_path(rp, k)));
    t.push_back(std::move(row));
  }
  try {
    return CovariantStructure(g, std::move(t), base);
  } catch (const GroupError& e) {
    throw SchemaError(r.child("table"), e.what());
  }
}

inline json action_json(const CovariantStructure& st) {
  json j = header("action");
  j["table"] = st.action();
  j["base"] = st.base();
  return j;
}

// ---------------------------------------------------------------------------
// Families and costs

inline CombFamily parse_family(const json& j, const std::string& path = "$") {
  Reader r = open_document(j, "family", path);
  if (r.has("n_copy")) {
    const FiniteGroup g = parse_group(r.require("group"), r.child("group"));
    Reader n(r.require("n_copy"), r.child("n_copy"));
    r.finish();
    const int copies = n.integer("copies");
    if (copies < 1) throw SchemaError(n.child("copies"), "copies must be positive");
    SingleRep u = parse_matrices(n.require("matrices"), n.child("matrices"));
    n.finish();
    if (static_cast<int>(u.size()) != g.order())
      throw SchemaError(n.child("matrices"), "expected " + std::to_string(g.order()) + " matrices, one per element");
    try {
      return n_copy_family(g, u, copies);
    } catch (const GroupError& e) {
      throw SchemaError(n.child("matrices"), e.what());
    }
  }
  Reader rr(r.require("representation"), r.child("representation"));
  Representation rep = read_representation_fields(rr);
  rr.finish();
  const Comb base = parse_comb(r.require("base"), r.child("base"));
  r.finish();
  return generate_family(rep, base);
}

inline json family_json(const CombFamily& f) {
  json j = header("family");
  if (f.copies > 0) {
    j["group"] = group_json(f.group());
    j["n_copy"] = {{"copies", f.copies}, {"matrices", matrices_json(f.single)}};
    return j;
  }
  json rep = representation_json(f.rep);
  rep.erase("version");
  rep.erase("type");
  j["representation"] = rep;
  j["base"] = comb_json(f.base);
  return j;
}

/// Cost for a family; fidelity costs use the family's one-wire rep.
inline CostFunction parse_cost(const json& j, const CombFamily& f, const std::string& path = "$") {
  Reader r = open_document(j, "cost", path);
  const std::string kind = r.string("kind");
  const json* table = r.optional("table");
  r.finish();
  const FiniteGroup& g = f.group();
  if (kind == "delta") {
    if (table) throw SchemaError(r.child("table"), "delta cost takes no table");
    return delta_cost(g);
  }
  if (kind == "fidelity") {
    if (table) throw SchemaError(r.child("table"), "fidelity cost takes no table");
    if (f.copies < 1) throw SchemaError(r.child("kind"), "fidelity cost needs an n_copy family");
    return fidelity_cost(g, f.single);
  }
  if (kind != "table") throw SchemaError(r.child("kind"), "unknown cost kind '" + kind + "'");
  if (!table) throw SchemaError(r.path(), "missing required field 'table'");
  Reader::as_array(*table, r.child("table"));
  CostFunction c;
  for (std::size_t i = 0; i < table->size(); ++i) {
    const std::string rp = index_path(r.child("table"), i);
    Reader::as_array((*table)[i], rp);
    std::vector<double> row;
    for (std::size_t k = 0; k < (*table)[i].size(); ++k) row.push_back(Reader::as_double((*table)[i][k], index_path(rp, k)));
    c.table.push_back(std::move(row));
  }
  if (c.size() != g.order()) throw SchemaError(r.child("table"), "expected " + std::to_string(g.order()) + " rows");
  for (std::size_t i = 0; i < c.table.size(); ++i)
    if (static_cast<int>(c.table[i].size()) != g.order())
      throw SchemaError(index_path(r.child("table"), i), "expected " + std::to_string(g.order()) + " entries");
  return c;
}

inline json cost_json(const CostFunction& c) {
  json j = header("cost");
  j["kind"] = "table";
  j["table"] = c.table;
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(path, std::string("invalid JSON: ") + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2); }

}  // namespace combkit::io
