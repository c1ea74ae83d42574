#include "combkit/io.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace combkit;
using namespace combkit::testing;
using combkit::io::json;
using combkit::io::SchemaError;

namespace {

template <class F>
std::string schema_path(F&& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

Comb random_comb(Rng& rng) {
  const std::array<int, 4> dims{2, 3, 2, 2};
  const std::array<int, 1> mem{3};
  return comb_from_network(random_network(dims, mem, rng));
}

json reparse(const json& j) { return json::parse(j.dump()); }

}  // namespace

TEST(io_roundtrip, comb_is_bit_exact) {
  Rng rng(81);
  for (int i = 0; i < 5; ++i) {
    const Comb c = random_comb(rng);
    const json j = io::comb_json(c);
    const Comb back = io::parse_comb(reparse(j));
    EXPECT_EQ(back.teeth, c.teeth);
    EXPECT_EQ(back.kind, c.kind);
    ASSERT_EQ(back.op.spaces().size(), c.op.spaces().size());
    EXPECT_TRUE(back.op.matrix() == c.op.matrix());
    EXPECT_EQ(io::comb_json(back).dump(), j.dump());
  }
}

TEST(io_roundtrip, operator_network_tester_instrument) {
  Rng rng(82);
  const std::array<int, 2> dims{2, 2};
  const ChannelNetwork net = random_network(dims, {}, rng);
  const json nj = io::network_json(net);
  const ChannelNetwork nb = io::parse_network(reparse(nj));
  EXPECT_TRUE(nb.steps[0].kraus[0] == net.steps[0].kraus[0]);
  EXPECT_TRUE(comb_from_network(nb).op.matrix() == comb_from_network(net).op.matrix());

  const LabeledOperator op({{3, 2, Role::ancilla}, {1, 3, Role::classical}}, random_hermitian(6, rng));
  const LabeledOperator ob = io::parse_operator(reparse(io::operator_json(op)));
  EXPECT_EQ(ob.spaces()[0].id, 3);
  EXPECT_EQ(ob.spaces()[1].role, Role::classical);
  EXPECT_TRUE(ob.matrix() == op.matrix());

  // |0><0| preparation followed by a Z measurement, labels kept.
  std::vector<LabeledOperator> el;
  for (int b = 0; b < 2; ++b) el.emplace_back(comb_spaces(std::array<int, 2>{2, 2}), ket_bra(4, b, b));
  const Tester t = make_family<Tester>(el, 1, {"up", "down"});
  const Tester tb = io::parse_tester(reparse(io::tester_json(t)));
  EXPECT_EQ(tb.outcomes, t.outcomes);
  EXPECT_TRUE(tb.elements[1].matrix() == t.elements[1].matrix());
  EXPECT_TRUE(validate_tester(tb).pass);

  // Z dephasing split by outcome.
  std::vector<LabeledOperator> inst_el;
  for (int b = 0; b < 2; ++b) inst_el.emplace_back(comb_spaces(std::array<int, 2>{2, 2}), ket_bra(4, 3 * b, 3 * b));
  const Instrument inst = make_family<Instrument>(inst_el, 1);
  const Instrument ib = io::parse_instrument(reparse(io::instrument_json(inst)));
  EXPECT_TRUE(validate_instrument(ib).pass);
  EXPECT_THROW(io::parse_tester(io::instrument_json(inst)), SchemaError);
}

TEST(io_roundtrip, group_representation_family_cost) {
  const FiniteGroup d3 = dihedral_group(3);
  Representation rep(d3);
  rep.set(1, dihedral_rep(3));
  const Representation rb = io::parse_representation(reparse(io::representation_json(rep)));
  EXPECT_EQ(rb.group().table(), d3.table());
  EXPECT_TRUE(rb.maps().at(1)[4] == rep.maps().at(1)[4]);

  const CombFamily f = n_copy_family(cyclic_group(3), qubit_phase_rep(3), 2);
  const CombFamily fb = io::parse_family(reparse(io::family_json(f)));
  EXPECT_EQ(fb.copies, 2);
  EXPECT_TRUE(fb.members[2].op.matrix() == f.members[2].op.matrix());

  const CombFamily g = generate_family(rep, make_comb(LabeledOperator(comb_spaces(std::array<int, 2>{2, 2}),
                                                                      ket_bra(4, 0, 0) + ket_bra(4, 3, 3))));
  const CombFamily gb = io::parse_family(reparse(io::family_json(g)));
  EXPECT_EQ(gb.members.size(), 6u);
  EXPECT_TRUE(gb.members[5].op.matrix() == g.members[5].op.matrix());

  const CostFunction c = fidelity_cost(cyclic_group(3), qubit_phase_rep(3));
  const CostFunction cb = io::parse_cost(reparse(io::cost_json(c)), f);
  EXPECT_EQ(cb.table, c.table);
  const json fid = {{"version", 1}, {"type", "cost"}, {"kind", "fidelity"}};
  EXPECT_EQ(io::parse_cost(fid, f).table, c.table);

  const CovariantStructure st = CovariantStructure::regular(d3);
  const CovariantStructure sb = io::parse_action(reparse(io::action_json(st)), d3);
  EXPECT_EQ(sb.action(), st.action());
}

TEST(io_schema, errors_carry_json_paths) {
  Rng rng(83);
  const json good = io::comb_json(random_comb(rng));

  json j = good;
  j["spaces"][2]["dim"] = "two";
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.spaces[2].dim");

  j = good;
  j["spaces"][1]["role"] = "sideways";
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.spaces[1].role");

  j = good;
  j["colour"] = "blue";
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.colour");

  j = good;
  j["spaces"][0]["extra"] = 1;
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.spaces[0].extra");

  j = good;
  j["matrix"].erase(j["matrix"].size() - 1);
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.matrix");

  j = good;
  j["matrix"][5] = json::array({1.0});
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.matrix[5]");

  j = good;
  j.erase("version");
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$");

  j = good;
  j["version"] = 2;
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.version");

  j = good;
  j["type"] = "tester";
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.type");

  j = good;
  j["teeth"] = 3;
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.teeth");

  j = good;
  j["spaces"][3]["id"] = 0;
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.spaces[3].id");

  j = good;
  j["spaces"][3]["id"] = 7;
  EXPECT_EQ(schema_path([&] { io::parse_comb(j); }), "$.spaces");
}

TEST(io_schema, nested_documents) {
  Rng rng84(84);
  json net = io::network_json(random_network(std::array<int, 2>{2, 2}, {}, rng84));
  net["steps"][0]["kraus"][0]["cols"] = 3;
  EXPECT_EQ(schema_path([&] { io::parse_network(net); }), "$.steps[0].kraus[0].data");
  net["steps"][0]["kraus"] = json::array();
  EXPECT_EQ(schema_path([&] { io::parse_network(net); }), "$.steps[0].kraus");

  const json rep = {{"version", 1},
                    {"type", "representation"},
                    {"group", {{"name", "Z2"}}},
                    {"spaces", json::array({{{"id", 1}, {"matrices", io::matrices_json({pauli_z(), pauli_z()})}}})}};
  EXPECT_EQ(schema_path([&] { io::parse_representation(rep); }), "$.spaces[0].matrices");

  json grp = rep;
  grp["group"] = {{"table", json::array({json::array({0, 1}), json::array({1, 1})})}};
  EXPECT_EQ(schema_path([&] { io::parse_representation(grp); }), "$.group");

  const json cost = {{"version", 1}, {"type", "cost"}, {"kind", "table"}, {"table", json::array({json::array({0, 1})})}};
  EXPECT_EQ(schema_path([&] { io::parse_cost(cost, n_copy_family(cyclic_group(2), qubit_phase_rep(2), 1)); }),
            "$.table");
  EXPECT_EQ(schema_path([&] { io::parse_complex("3", "$.z"); }), "$.z");
  EXPECT_EQ(io::parse_complex(json(0.25), "$").real(), 0.25);
}
