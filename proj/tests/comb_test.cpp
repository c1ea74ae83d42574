#include "combkit/comb.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace combkit;
using namespace combkit::testing;

namespace {

Vector max_entangled(int d) {
  Vector v = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1;
  return v;
}

Comb identity_comb(int d) {
  const std::array<int, 2> dims{d, d};
  const Vector v = max_entangled(d);
  return make_comb(LabeledOperator(comb_spaces(dims), v * v.adjoint()));
}

LabeledOperator random_input(std::span<const int> wire_dims, Rng& rng) {
  std::vector<SpaceLabel> evens;
  for (std::size_t j = 0; j < wire_dims.size(); j += 2)
    evens.push_back({static_cast<int>(j), wire_dims[j], Role::input});
  const Eigen::Index d = detail::total_dim(evens);
  return {evens, random_density(d, d, rng)};
}

}  // namespace

TEST(comb, make_comb_requires_contiguous_labels) {
  const auto a = LabeledOperator::identity({{0, 2, Role::input}, {2, 2, Role::output}});
  EXPECT_THROW(make_comb(a), DimensionError);
  const auto b = LabeledOperator::identity({{0, 2, Role::input}});
  EXPECT_THROW(make_comb(b), DimensionError);
  const auto c = LabeledOperator::identity({{1, 3, Role::output}, {0, 2, Role::input}});
  const Comb comb = make_comb(c);
  EXPECT_EQ(comb.teeth, 1);
  EXPECT_EQ(comb.op.ids(), (std::vector<int>{0, 1}));
}

TEST(comb, identity_channel_is_deterministic) {
  for (int d : {1, 2, 3}) {
    const auto rep = validate_deterministic(identity_comb(d));
    EXPECT_TRUE(rep.pass) << d;
    EXPECT_LT(rep.max_residual, 1e-12);
  }
}

TEST(comb, perturbed_identity_residual) {
  // Tr_1 R = diag(1.1, 1); the extracted scalar is 2.1 / 2.
  Comb c = identity_comb(2);
  Matrix m = c.op.matrix();
  m(0, 0) += 0.1;
  c.op = LabeledOperator(c.op.spaces(), m);
  const auto rep = validate_deterministic(c);
  EXPECT_FALSE(rep.pass);
  ASSERT_EQ(rep.steps.size(), 1u);
  EXPECT_NEAR(rep.steps[0].residual, 0.05 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(rep.final_scalar, 1.05, 1e-12);
  EXPECT_NEAR(rep.max_residual, 0.05 * std::sqrt(2.0), 1e-12);
}

TEST(comb, negative_operator_rejected) {
  Comb c = identity_comb(2);
  c.op = LabeledOperator(c.op.spaces(), -c.op.matrix());
  EXPECT_THROW(validate_deterministic(c), NotPsdError);
}

TEST(network, choi_matches_tomography) {
  Rng rng(21);
  const std::vector<std::vector<int>> wires{{2, 2}, {2, 3}, {2, 2, 2, 2}, {1, 2, 2, 1}, {2, 1, 3, 2, 2, 2}};
  const std::vector<std::vector<int>> mems{{}, {}, {3}, {2}, {2, 3}};
  for (std::size_t t = 0; t < wires.size(); ++t) {
    const auto net = random_network(wires[t], mems[t], rng, 2);
    const auto choi = network_choi(net);
    EXPECT_LT(frobenius_distance(choi, tomography_choi(net)), 1e-11) << t;
  }
}

TEST(network, choi_is_link_of_step_chois) {
  Rng rng(22);
  const std::array<int, 4> wires{2, 2, 2, 3};
  const std::array<int, 1> mem{3};
  const auto net = random_network(wires, mem, rng, 2);
  LabeledOperator acc = step_choi(net, 0);
  acc = partial_trace(acc, {kMemoryIdBase - 1});
  acc = link_product(acc, step_choi(net, 1));
  acc = partial_trace(acc, {kMemoryIdBase + 1});
  EXPECT_LT(frobenius_distance(canonical(acc), network_choi(net)), 1e-11);
}

TEST(network, random_deterministic_combs_validate) {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + trial % 3;
    std::vector<int> wires, mems;
    for (int j = 0; j < 2 * n; ++j) wires.push_back(1 + static_cast<int>(rng() % 3));
    for (int j = 0; j + 1 < n; ++j) mems.push_back(1 + static_cast<int>(rng() % 3));
    const auto net = random_network(wires, mems, rng, 1 + static_cast<int>(rng() % 2));
    const Comb c = comb_from_network(net);
    EXPECT_EQ(c.kind, CombKind::deterministic);
    const auto rep = validate_deterministic(c);
    EXPECT_TRUE(rep.pass) << trial << " residual " << rep.max_residual;
    EXPECT_EQ(static_cast<int>(rep.steps.size()), n);
  }
}

TEST(network, comb_action_matches_simulation) {
  Rng rng(24);
  const std::array<int, 4> wires{2, 3, 2, 2};
  const std::array<int, 1> mem{2};
  const auto net = random_network(wires, mem, rng, 2);
  const Comb c = comb_from_network(net);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = random_input(wires, rng);
    EXPECT_LT(frobenius_distance(canonical(link_product(c.op, rho)), run_network(net, rho)), 1e-11);
  }
}

TEST(network, bad_networks_rejected) {
  Rng rng(25);
  const std::array<int, 2> wires{2, 2};
  auto net = random_network(wires, {}, rng);
  net.steps[0].kraus[0] *= 2.0;
  EXPECT_THROW(check_network(net), ValidationError);
  auto net2 = random_network(wires, {}, rng);
  net2.steps[0].kraus[0] = Matrix::Identity(3, 3);
  EXPECT_THROW(check_network(net2), DimensionError);
}

TEST(network, random_perturbations_rejected) {
  // Random PSD normalized to trace D_odd differs from any comb in the scalar.
  Rng rng(26);
  const std::array<int, 4> dims{2, 2, 2, 2};
  const auto spaces = comb_spaces(dims);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = random_psd(16, rng);
    m *= 4.0 / m.trace().real();
    const auto rep = validate_deterministic(make_comb(LabeledOperator(spaces, m)));
    EXPECT_FALSE(rep.pass);
    EXPECT_GT(rep.max_residual, 1e-6);
  }
}

TEST(probabilistic, closed_form_and_projection_agree_single_tooth) {
  Rng rng(27);
  const std::array<int, 2> wires{2, 2};
  for (int trial = 0; trial < 10; ++trial) {
    const double scale = trial < 5 ? 0.6 : 1.4;
    Comb c = comb_from_network(random_network(wires, {}, rng));
    c.op = scale * c.op;
    const auto closed = validate_probabilistic(c);
    const auto proj = probabilistic_by_projection(c);
    EXPECT_EQ(closed.member, trial < 5);
    EXPECT_EQ(proj.member, closed.member) << trial << " residual " << proj.residual;
    if (closed.member) {
      ASSERT_TRUE(closed.witness.has_value());
      const Comb s = make_comb(*closed.witness);
      EXPECT_TRUE(validate_deterministic(s).pass);
      EXPECT_GE(min_eigenvalue(closed.witness->matrix() - c.op.matrix()), -1e-9);
    }
  }
}

TEST(probabilistic, two_tooth_membership) {
  Rng rng(28);
  const std::array<int, 4> wires{2, 2, 2, 2};
  const std::array<int, 1> mem{2};
  const auto net = random_network(wires, mem, rng, 1, 0.7);
  const Comb c = comb_from_network(net);
  EXPECT_EQ(c.kind, CombKind::probabilistic);
  const auto rep = validate_probabilistic(c);
  EXPECT_TRUE(rep.member) << rep.residual;
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_LT(validate_deterministic(make_comb(*rep.witness), 1e-5).max_residual, 1e-5);
  EXPECT_GE(min_eigenvalue(rep.witness->matrix() - c.op.matrix()), -1e-6);

  Comb big = comb_from_network(random_network(wires, mem, rng));
  big.op = 1.3 * big.op;
  EXPECT_FALSE(validate_probabilistic(big).member);
}

TEST(stinespring, isometry_reproduces_comb_action) {
  Rng rng(29);
  const std::array<int, 4> wires{2, 2, 3, 2};
  const std::array<int, 1> mem{2};
  const auto net = random_network(wires, mem, rng, 2);
  const Comb c = comb_from_network(net);
  const Isometry iso = stinespring(c);
  const Eigen::Index din = iso.v.cols();
  EXPECT_LT((iso.v.adjoint() * iso.v - Matrix::Identity(din, din)).norm(), 1e-9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = random_input(wires, rng);
    EXPECT_LT(frobenius_distance(iso.apply(rho.matrix()), run_network(net, rho)), 1e-9);
  }
}

TEST(stinespring, identity_needs_no_ancilla) {
  const Isometry iso = stinespring(identity_comb(3));
  EXPECT_EQ(iso.ancilla_dim, 1);
  EXPECT_LT((iso.v * iso.v.adjoint() - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(stinespring, rejects_non_comb) {
  Comb c = identity_comb(2);
  c.op = 2.0 * c.op;
  EXPECT_THROW(stinespring(c), ValidationError);
}

TEST(network, memoryless_identities_give_product_comb) {
  ChannelNetwork net;
  for (int j = 0; j < 2; ++j) net.steps.push_back({2, 2, 1, 1, {Matrix::Identity(2, 2)}});
  const Comb c = comb_from_network(net);
  const Vector v = max_entangled(2);
  const Matrix one = v * v.adjoint();
  EXPECT_LT((c.op.matrix() - kron(one, one)).norm(), 1e-14);
  EXPECT_TRUE(validate_deterministic(c).pass);
}

TEST(link, composition_of_channels) {
  Rng rng(61);
  for (int trial = 0; trial < 5; ++trial) {
    const auto k1 = random_kraus(2, 2, 2, rng), k2 = random_kraus(2, 2, 3, rng);
    const auto c1 = channel_choi(k1, {{0, 2, Role::input}}, {{1, 2, Role::output}});
    const auto c2 = channel_choi(k2, {{1, 2, Role::input}}, {{2, 2, Role::output}});
    std::vector<Matrix> composed;
    for (const auto& b : k2)
      for (const auto& a : k1) composed.push_back(b * a);
    const auto direct = channel_choi(composed, {{0, 2, Role::input}}, {{2, 2, Role::output}});
    EXPECT_LT(frobenius_distance(canonical(link_product(c2, c1)), canonical(direct)), 1e-12);
  }
}

TEST(link, comb_applied_to_state) {
  Rng rng(62);
  for (int trial = 0; trial < 5; ++trial) {
    const auto k = random_kraus(3, 2, 2, rng);
    const auto choi = channel_choi(k, {{0, 3, Role::input}}, {{1, 2, Role::output}});
    const Matrix rho = random_density(3, 3, rng);
    Matrix out = Matrix::Zero(2, 2);
    for (const auto& m : k) out += m * rho * m.adjoint();
    const LabeledOperator got = link_product(choi, LabeledOperator({{0, 3, Role::input}}, rho));
    EXPECT_LT((got.matrix() - out).norm(), 1e-12);
  }
}

TEST(probabilistic, scaled_identity_comb) {
  EXPECT_TRUE(validate_probabilistic(identity_comb(2)).member);
  Comb half = identity_comb(2);
  half.op = 0.5 * half.op;
  EXPECT_TRUE(validate_probabilistic(half).member);
  Comb twice = identity_comb(2);
  twice.op = 2.0 * twice.op;
  const auto rep = validate_probabilistic(twice);
  EXPECT_FALSE(rep.member);
  EXPECT_NEAR(rep.residual, 1.0, 1e-12);
}

TEST(stinespring, depolarizing_needs_full_ancilla) {
  const std::array<int, 2> dims{2, 2};
  const Comb dep = make_comb(LabeledOperator(comb_spaces(dims), Matrix::Identity(4, 4) / 2.0));
  const Isometry iso = stinespring(dep);
  EXPECT_EQ(iso.ancilla_dim, 4);
  EXPECT_LT((iso.v.adjoint() * iso.v - Matrix::Identity(2, 2)).norm(), 1e-12);
  Rng rng(63);
  const Matrix rho = random_density(2, 2, rng);
  EXPECT_LT((iso.apply(rho).matrix() - Matrix::Identity(2, 2) / 2.0).norm(), 1e-12);
}
