#pragma once

// Quantum combs: Choi operators of sequential networks with memory.
//
// An N-comb lives on spaces 0..2N-1 stored in ascending id order; tooth k
// takes input space 2k to output space 2k+1. A channel C from space `in` to
// space `out` has Choi operator sum_ij C(|i><j|) ⊗ |i><j| with the output
// factor listed first.

#include "combkit/normalization.hpp"

#include <array>
#include <optional>

namespace combkit {

class ValidationError : public Error {
 public:
  using Error::Error;
};

enum class CombKind { deterministic, probabilistic, unvalidated };

inline const char* kind_name(CombKind k) {
  switch (k) {
    case CombKind::deterministic: return "deterministic";
    case CombKind::probabilistic: return "probabilistic";
    case CombKind::unvalidated: return "unvalidated";
  }
  return "unvalidated";
}

struct Comb {
  LabeledOperator op;
  int teeth = 0;
  CombKind kind = CombKind::unvalidated;
};

/// Standard labels for a comb with the given wire dimensions (size 2N).
inline std::vector<SpaceLabel> comb_spaces(std::span<const int> dims) {
  std::vector<SpaceLabel> spaces;
  for (std::size_t j = 0; j < dims.size(); ++j)
    spaces.push_back({static_cast<int>(j), dims[j], j % 2 == 0 ? Role::input : Role::output});
  return spaces;
}

/// Wraps an operator on spaces {0..2N-1} (any order) as an N-comb.
inline Comb make_comb(const LabeledOperator& op, CombKind kind = CombKind::unvalidated) {
  LabeledOperator c = canonical(op);
  const int n = static_cast<int>(c.spaces().size());
  if (n % 2 != 0) throw DimensionError("comb needs an even number of spaces");
  for (int j = 0; j < n; ++j)
    if (c.spaces()[j].id != j)
      throw DimensionError("comb spaces must be labeled 0.." + std::to_string(n - 1));
  return {std::move(c), n / 2, kind};
}

inline std::vector<int> comb_dims(const LabeledOperator& op) {
  std::vector<int> dims;
  for (const auto& s : op.spaces()) dims.push_back(s.dim);
  return dims;
}

// ---------------------------------------------------------------------------
// Networks

/// One operation of a sequential network. Kraus operators map
/// (memory_in ⊗ H_{2j}) to (H_{2j+1} ⊗ memory_out).
struct NetworkStep {
  int in_dim = 1;
  int out_dim = 1;
  int memory_in = 1;
  int memory_out = 1;
  std::vector<Matrix> kraus;
};

struct ChannelNetwork {
  std::vector<NetworkStep> steps;
};

struct NetworkCheck {
  bool trace_preserving = true;
  double max_excess = 0.0;  // largest eigenvalue of sum K^dag K - I
};

inline NetworkCheck check_network(const ChannelNetwork& net, double tol = kPsdTol) {
  if (net.steps.empty()) throw DimensionError("network has no operations");
  if (net.steps.front().memory_in != 1)
    throw DimensionError("first operation must not take memory input");
  NetworkCheck check;
  for (std::size_t j = 0; j < net.steps.size(); ++j) {
    const auto& s = net.steps[j];
    if (j + 1 < net.steps.size() && s.memory_out != net.steps[j + 1].memory_in)
      throw DimensionError("memory dimension mismatch between operations " +
                           std::to_string(j) + " and " + std::to_string(j + 1));
    if (s.kraus.empty()) throw DimensionError("operation " + std::to_string(j) + " has no Kraus operators");
    const Eigen::Index rows = static_cast<Eigen::Index>(s.out_dim) * s.memory_out;
    const Eigen::Index cols = static_cast<Eigen::Index>(s.memory_in) * s.in_dim;
    Matrix sum = Matrix::Zero(cols, cols);
    for (const auto& k : s.kraus) {
      if (k.rows() != rows || k.cols() != cols)
        throw DimensionError("operation " + std::to_string(j) + ": Kraus operator is " +
                             std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
                             ", expected " + std::to_string(rows) + "x" +
                             std::to_string(cols));
      sum += k.adjoint() * k;
    }
    const auto es = eigh(sum - Matrix::Identity(cols, cols));
    const double excess = es.values.maxCoeff();
    const double deficit = -es.values.minCoeff();
    check.max_excess = std::max(check.max_excess, excess);
    if (excess > tol)
      throw ValidationError("operation " + std::to_string(j) +
                            " violates Kraus normalization by " + std::to_string(excess));
    if (deficit > tol) check.trace_preserving = false;
  }
  return check;
}

/// Choi operator of the whole network on spaces 0..2N-1, built from the
/// network's composite Kraus operators (the last memory is discarded).
inline LabeledOperator network_choi(const ChannelNetwork& net) {
  check_network(net, 1e-6);
  // Each branch is a composite Kraus operator from the evens seen so far to
  // (odds seen so far ⊗ current memory).
  std::vector<Matrix> branches{Matrix::Ones(1, 1)};
  Eigen::Index d_odd = 1;
  for (const auto& s : net.steps) {
    std::vector<Matrix> next;
    next.reserve(branches.size() * s.kraus.size());
    const Matrix id_in = Matrix::Identity(s.in_dim, s.in_dim);
    const Matrix id_odd = Matrix::Identity(d_odd, d_odd);
    for (const auto& b : branches) {
      const Matrix widened = kron(b, id_in);
      for (const auto& k : s.kraus) next.push_back(kron(id_odd, k) * widened);
    }
    branches = std::move(next);
    d_odd *= s.out_dim;
  }
  const int mem = net.steps.back().memory_out;
  const Eigen::Index d_even = branches.front().cols();
  const Eigen::Index d = d_odd * d_even;
  Matrix choi = Matrix::Zero(d, d);
  Vector v(d);
  for (const auto& b : branches)
    for (int m = 0; m < mem; ++m) {
      for (Eigen::Index o = 0; o < d_odd; ++o)
        for (Eigen::Index e = 0; e < d_even; ++e) v(o * d_even + e) = b(o * mem + m, e);
      choi.noalias() += v * v.adjoint();
    }
  std::vector<SpaceLabel> spaces;
  const int n = static_cast<int>(net.steps.size());
  for (int j = 0; j < n; ++j) spaces.push_back({2 * j + 1, net.steps[j].out_dim, Role::output});
  for (int j = 0; j < n; ++j) spaces.push_back({2 * j, net.steps[j].in_dim, Role::input});
  return canonical(LabeledOperator(std::move(spaces), std::move(choi)));
}

inline ValidationReport validate_deterministic(const Comb& c, double tol = kEqualityTol);

/// Comb of a network; deterministic when every operation is trace preserving.
inline Comb comb_from_network(const ChannelNetwork& net, double tol = kPsdTol) {
  const NetworkCheck check = check_network(net, tol);
  Comb c = make_comb(network_choi(net));
  c.kind = check.trace_preserving ? CombKind::deterministic : CombKind::probabilistic;
  return c;
}

/// Choi operator of a channel between multi-factor spaces. Kraus operators
/// map the `in` factors (in order) to the `out` factors; the result lists the
/// output factors first.
inline LabeledOperator channel_choi(std::span<const Matrix> kraus, std::vector<SpaceLabel> in,
                                    std::vector<SpaceLabel> out) {
  const Eigen::Index din = detail::total_dim(in), dout = detail::total_dim(out);
  const Eigen::Index d = din * dout;
  Matrix choi = Matrix::Zero(d, d);
  Vector v(d);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw DimensionError("channel_choi: Kraus operator shape mismatch");
    for (Eigen::Index o = 0; o < dout; ++o)
      for (Eigen::Index i = 0; i < din; ++i) v(o * din + i) = k(o, i);
    choi.noalias() += v * v.adjoint();
  }
  std::vector<SpaceLabel> spaces = std::move(out);
  spaces.insert(spaces.end(), in.begin(), in.end());
  return {std::move(spaces), std::move(choi)};
}

inline constexpr int kMemoryIdBase = 1000;

/// Choi operator of operation j of a network, with memory wire j-1 -> j
/// labeled kMemoryIdBase + j.
inline LabeledOperator step_choi(const ChannelNetwork& net, std::size_t j) {
  const auto& s = net.steps.at(j);
  const int jj = static_cast<int>(j);
  std::vector<SpaceLabel> in{{kMemoryIdBase + jj - 1, s.memory_in, Role::ancilla},
                             {2 * jj, s.in_dim, Role::input}};
  std::vector<SpaceLabel> out{{2 * jj + 1, s.out_dim, Role::output},
                              {kMemoryIdBase + jj, s.memory_out, Role::ancilla}};
  return channel_choi(s.kraus, std::move(in), std::move(out));
}

// ---------------------------------------------------------------------------
// Validation

inline ValidationReport validate_deterministic(const Comb& c, double tol) {
  require_psd(c.op.matrix(), std::max(tol, kPsdTol));
  const auto teeth = comb_teeth(c.teeth);
  return check_chain(c.op, teeth, tol);
}

struct ProbabilisticReport {
  bool member = false;
  std::optional<LabeledOperator> witness;  // deterministic S with S >= R
  double residual = 0.0;                   // distance between the two sets at exit
  int iterations = 0;
};

/// Dykstra alternating projections between {S : S >= R} and the affine set
/// of the deterministic normalization chain.
inline ProbabilisticReport probabilistic_by_projection(const Comb& c, int iterations = 500,
                                                       double threshold = 1e-6) {
  const ChainAffineSet affine(c.op.spaces(), comb_teeth(c.teeth));
  const Matrix& r = c.op.matrix();
  Matrix x = r, p = Matrix::Zero(r.rows(), r.cols()), q = p, y = r;
  ProbabilisticReport rep;
  for (int it = 1; it <= iterations; ++it) {
    y = affine.project(x + p);
    p = x + p - y;
    x = r + psd_part(y + q - r);
    q = y + q - x;
    rep.iterations = it;
    rep.residual = (x - y).norm();
    if (rep.residual < 1e-13) break;
  }
  rep.member = rep.residual <= threshold;
  if (rep.member) rep.witness = LabeledOperator(c.op.spaces(), x);
  return rep;
}

/// Membership in the set of probabilistic combs.
inline ProbabilisticReport validate_probabilistic(const Comb& c, double tol = kPsdTol) {
  require_psd(c.op.matrix(), tol);
  if (c.teeth != 1) return probabilistic_by_projection(c);
  // Closed form: Tr_1[R] <= I_0, witnessed by S = R + (I_0 - Tr_1 R) ⊗ I_1 / d_1.
  const LabeledOperator marginal = partial_trace(c.op, {1});
  const Eigen::Index d0 = marginal.dim();
  const Matrix gap = Matrix::Identity(d0, d0) - marginal.matrix();
  ProbabilisticReport rep;
  const double lmin = min_eigenvalue(gap);
  rep.residual = std::max(0.0, -lmin);
  rep.member = lmin >= -tol;
  if (rep.member) {
    const SpaceLabel s1 = c.op.space(1);
    const LabeledOperator fill =
        tensor(LabeledOperator(marginal.spaces(), gap / static_cast<double>(s1.dim)),
               LabeledOperator::identity({s1}));
    rep.witness = c.op + fill;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Stinespring dilation

/// Isometry from the even spaces to (odd spaces ⊗ ancilla).
struct Isometry {
  Matrix v;
  std::vector<SpaceLabel> input;   // even spaces, ascending
  std::vector<SpaceLabel> output;  // odd spaces ascending, then the ancilla
  int ancilla_dim = 1;

  /// Tr_A[V rho V^dagger] on the odd spaces.
  LabeledOperator apply(const Matrix& rho) const {
    const Matrix full = v * rho * v.adjoint();
    const LabeledOperator out(output, full);
    const std::array<int, 1> anc{output.back().id};
    return partial_trace(out, anc);
  }
};

inline Isometry stinespring(const Comb& c, double tol = kEqualityTol) {
  const auto report = validate_deterministic(c, tol);
  if (!report.pass)
    throw ValidationError("stinespring: comb is not deterministic (residual " +
                          std::to_string(report.max_residual) + ")");
  std::vector<int> order;
  Isometry iso;
  std::vector<SpaceLabel> odd;
  for (const auto& s : c.op.spaces()) {
    if (s.id % 2 == 1) {
      order.push_back(s.id);
      odd.push_back(s);
    }
  }
  for (const auto& s : c.op.spaces())
    if (s.id % 2 == 0) {
      order.push_back(s.id);
      iso.input.push_back(s);
    }
  const LabeledOperator r = permute(c.op, order);
  const Matrix rt = r.matrix().transpose();
  const Matrix root = psd_sqrt(rt, std::max(tol, kPsdTol));
  const Support supp = compress_to_support(rt);
  const Matrix coords = supp.basis.adjoint() * root;  // r x (D_odd * D_even)
  const Eigen::Index d_odd = detail::total_dim(odd);
  const Eigen::Index d_even = detail::total_dim(iso.input);
  const Eigen::Index ra = supp.rank();
  iso.v = Matrix::Zero(d_odd * ra, d_even);
  for (Eigen::Index o = 0; o < d_odd; ++o)
    for (Eigen::Index e = 0; e < d_even; ++e)
      iso.v.block(o * ra, e, ra, 1) = coords.col(o * d_even + e);
  iso.ancilla_dim = static_cast<int>(ra);
  iso.output = odd;
  iso.output.push_back({2 * c.teeth, static_cast<int>(ra), Role::ancilla});
  return iso;
}

}  // namespace combkit
