#pragma once

// Shared fixtures and brute-force oracles for the test suites. Oracles here
// simulate networks directly with density matrices and never go through the
// Choi/link-product machinery they are used to check.

#include "combkit/comb.hpp"
#include "combkit/tester.hpp"
#include "combkit/random.hpp"

#include <vector>

namespace combkit::testing {

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix ket_bra(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Matrix m = Matrix::Zero(d, d);
  m(i, j) = 1;
  return m;
}

/// Random network with the given wire dims (size 2N) and memory dims (size
/// N-1 between operations; the last operation has memory_out = last_memory).
inline ChannelNetwork random_network(std::span<const int> wire_dims, std::span<const int> memory,
                                     Rng& rng, int last_memory = 1, double scale = 1.0) {
  ChannelNetwork net;
  const int n = static_cast<int>(wire_dims.size()) / 2;
  std::uniform_int_distribution<int> count_dist(1, 3);
  for (int j = 0; j < n; ++j) {
    NetworkStep s;
    s.in_dim = wire_dims[2 * j];
    s.out_dim = wire_dims[2 * j + 1];
    s.memory_in = j == 0 ? 1 : memory[j - 1];
    s.memory_out = j == n - 1 ? last_memory : memory[j];
    const int rows = s.out_dim * s.memory_out, cols = s.memory_in * s.in_dim;
    int count = count_dist(rng);
    while (rows * count < cols) ++count;
    s.kraus = random_kraus(cols, rows, count, rng);
    for (auto& k : s.kraus) k *= std::sqrt(scale);
    net.steps.push_back(std::move(s));
  }
  return net;
}

/// Applies Kraus operators acting on the factors `in_ids` of x, replacing them
/// by `out` factors placed at the front.
inline LabeledOperator apply_kraus(const LabeledOperator& x, std::span<const Matrix> kraus,
                                   std::span<const int> in_ids, std::vector<SpaceLabel> out) {
  std::vector<int> order(in_ids.begin(), in_ids.end());
  std::vector<SpaceLabel> rest;
  for (const auto& s : x.spaces())
    if (std::find(in_ids.begin(), in_ids.end(), s.id) == in_ids.end()) {
      order.push_back(s.id);
      rest.push_back(s);
    }
  const LabeledOperator xp = permute(x, order);
  const Eigen::Index d_rest = detail::total_dim(rest);
  const Matrix id_rest = Matrix::Identity(d_rest, d_rest);
  const Eigen::Index d_out = detail::total_dim(out);
  Matrix acc = Matrix::Zero(d_out * d_rest, d_out * d_rest);
  for (const auto& k : kraus) {
    const Matrix big = kron(k, id_rest);
    acc += big * xp.matrix() * big.adjoint();
  }
  std::vector<SpaceLabel> spaces = std::move(out);
  spaces.insert(spaces.end(), rest.begin(), rest.end());
  return {std::move(spaces), std::move(acc)};
}

/// Density-matrix simulation of a network on an input operator over the even
/// spaces (ids 0, 2, ..); returns the operator on the odd spaces.
inline LabeledOperator run_network(const ChannelNetwork& net, const LabeledOperator& input) {
  LabeledOperator x = tensor(LabeledOperator::identity({{kMemoryIdBase - 1, 1, Role::ancilla}}), input);
  const int n = static_cast<int>(net.steps.size());
  for (int j = 0; j < n; ++j) {
    const auto& s = net.steps[j];
    const std::array<int, 2> in{kMemoryIdBase + j - 1, 2 * j};
    x = apply_kraus(x, s.kraus, in,
                    {{2 * j + 1, s.out_dim, Role::output},
                     {kMemoryIdBase + j, s.memory_out, Role::ancilla}});
  }
  const std::array<int, 1> mem{kMemoryIdBase + n - 1};
  return canonical(partial_trace(x, mem));
}

/// Process tomography of a network: sum_ij C(|i><j|) ⊗ |i><j| over a basis of
/// the even spaces.
inline LabeledOperator tomography_choi(const ChannelNetwork& net) {
  std::vector<SpaceLabel> evens;
  for (std::size_t j = 0; j < net.steps.size(); ++j)
    evens.push_back({2 * static_cast<int>(j), net.steps[j].in_dim, Role::input});
  const Eigen::Index d = detail::total_dim(evens);
  LabeledOperator acc;
  bool first = true;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const LabeledOperator e(evens, ket_bra(d, i, j));
      const LabeledOperator term = tensor(run_network(net, e), e);
      acc = first ? term : acc + term;
      first = false;
    }
  return canonical(acc);
}

inline Matrix random_psd(Eigen::Index d, Rng& rng) {
  const Matrix g = random_gaussian(d, d, rng);
  return g * g.adjoint();
}

// ---------------------------------------------------------------------------
// Measuring networks

inline constexpr int kA = 50, kB = 51;

inline std::vector<Matrix> random_povm(Eigen::Index d, int outcomes, Rng& rng) {
  const auto ks = random_kraus(d, d, outcomes, rng);
  std::vector<Matrix> p;
  for (const auto& k : ks) p.push_back(k.adjoint() * k);
  return p;
}

/// Interleaved two-tooth measuring network: a state on (0, A), a channel
/// (1, A) -> (2, B) and a POVM on (3, B).
struct TesterNetwork {
  std::array<int, 4> dims{};
  int a = 1, b = 1;
  Matrix rho;
  std::vector<Matrix> channel;
  std::vector<Matrix> povm;
};

inline TesterNetwork random_tester_network(std::array<int, 4> dims, int a, int b, int outcomes, Rng& rng) {
  TesterNetwork t;
  t.dims = dims;
  t.a = a;
  t.b = b;
  t.rho = random_density(dims[0] * a, 2, rng);
  const int in = dims[1] * a, out = dims[2] * b;
  t.channel = random_kraus(in, out, std::max(2, (in + out - 1) / out), rng);
  t.povm = random_povm(dims[3] * b, outcomes, rng);
  return t;
}

inline Tester tester_of(const TesterNetwork& n) {
  const LabeledOperator rho({{0, n.dims[0], Role::input}, {kA, n.a, Role::ancilla}}, n.rho);
  const auto c = channel_choi(n.channel, {{1, n.dims[1], Role::output}, {kA, n.a, Role::ancilla}},
                              {{2, n.dims[2], Role::input}, {kB, n.b, Role::ancilla}});
  const LabeledOperator stage = link_product(rho, c);
  std::vector<LabeledOperator> elements;
  for (const auto& p : n.povm) {
    const LabeledOperator eff({{3, n.dims[3], Role::output}, {kB, n.b, Role::ancilla}}, p.transpose());
    elements.push_back(link_product(stage, eff));
  }
  return make_family<Tester>(std::move(elements), 2);
}

/// Outcome probabilities of the tester network plugged into the comb network.
inline std::vector<double> simulate(const TesterNetwork& t, const ChannelNetwork& comb) {
  LabeledOperator x = tensor(LabeledOperator::identity({{kMemoryIdBase - 1, 1, Role::ancilla}}),
                             LabeledOperator({{0, t.dims[0], Role::input}, {kA, t.a, Role::ancilla}}, t.rho));
  const auto& s0 = comb.steps[0];
  const auto& s1 = comb.steps[1];
  x = apply_kraus(x, s0.kraus, std::array<int, 2>{kMemoryIdBase - 1, 0},
                  {{1, s0.out_dim, Role::output}, {kMemoryIdBase, s0.memory_out, Role::ancilla}});
  x = apply_kraus(x, t.channel, std::array<int, 2>{1, kA},
                  {{2, t.dims[2], Role::input}, {kB, t.b, Role::ancilla}});
  x = apply_kraus(x, s1.kraus, std::array<int, 2>{kMemoryIdBase, 2},
                  {{3, s1.out_dim, Role::output}, {kMemoryIdBase + 1, s1.memory_out, Role::ancilla}});
  const LabeledOperator red = partial_trace(x, {kMemoryIdBase + 1});
  const std::array<int, 2> order{3, kB};
  const LabeledOperator final = permute(red, order);
  std::vector<double> p;
  for (const auto& e : t.povm) p.push_back((e * final.matrix()).trace().real());
  return p;
}

}  // namespace combkit::testing
