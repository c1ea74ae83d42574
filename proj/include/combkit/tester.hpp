#pragma once

// Instruments and testers on combs: normalization, the generalized Born
// rule p(B|R) = Tr[T_B^τ R], the dilation of instruments, the decomposition
// of testers into a supermap followed by an ancilla POVM, and the
// operational distance between combs.

#include "combkit/comb.hpp"
#include "combkit/random.hpp"
#include "combkit/sdp.hpp"

#include <set>

namespace combkit {

/// Outcome-indexed family of operators on spaces 0..2N-1.
struct OutcomeFamily {
  std::vector<std::string> outcomes;
  std::vector<LabeledOperator> elements;
  int teeth = 0;

  std::size_t size() const { return elements.size(); }

  std::size_t index_of(const std::string& outcome) const {
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      if (outcomes[i] == outcome) return i;
    throw Error("unknown outcome '" + outcome + "'");
  }

  /// Sum of the elements over an event (all outcomes when empty).
  LabeledOperator total(std::span<const std::size_t> event = {}) const {
    if (elements.empty()) throw Error("empty outcome family");
    Matrix sum = Matrix::Zero(elements[0].dim(), elements[0].dim());
    if (event.empty()) {
      for (const auto& e : elements) sum += aligned_to(e, elements[0]).matrix();
    } else {
      for (std::size_t i : event) sum += aligned_to(elements.at(i), elements[0]).matrix();
    }
    return {elements[0].spaces(), std::move(sum)};
  }
};

/// Outcome family whose total is a deterministic comb.
struct Instrument : OutcomeFamily {};

/// Measuring network: outcome family whose total obeys the tester chain.
struct Tester : OutcomeFamily {};

inline std::vector<std::string> numbered_outcomes(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

template <class Family>
Family make_family(std::vector<LabeledOperator> elements, int teeth,
                   std::vector<std::string> outcomes = {}) {
  Family f;
  if (outcomes.empty()) outcomes = numbered_outcomes(elements.size());
  if (outcomes.size() != elements.size())
    throw DimensionError("outcome labels and elements differ in number");
  for (auto& e : elements) {
    e = canonical(e);
    if (static_cast<int>(e.spaces().size()) != 2 * teeth)
      throw DimensionError("element does not act on 2N spaces");
    for (int j = 0; j < 2 * teeth; ++j)
      if (e.spaces()[j].id != j) throw DimensionError("element spaces must be 0..2N-1");
  }
  for (std::size_t i = 1; i < elements.size(); ++i)
    require_same_spaces(elements[0], elements[i], "outcome family");
  f.outcomes = std::move(outcomes);
  f.elements = std::move(elements);
  f.teeth = teeth;
  return f;
}

inline ValidationReport validate_tester(const Tester& t, double tol = kEqualityTol) {
  for (const auto& e : t.elements) require_psd(e.matrix(), std::max(tol, kPsdTol));
  const auto teeth = tester_teeth(t.teeth);
  return check_chain(t.total(), teeth, tol);
}

inline ValidationReport validate_instrument(const Instrument& inst, double tol = kEqualityTol) {
  for (const auto& e : inst.elements) require_psd(e.matrix(), std::max(tol, kPsdTol));
  return validate_deterministic(make_comb(inst.total()), tol);
}

/// Tr[T^τ R] for operators on the same spaces.
inline double pairing(const LabeledOperator& t, const LabeledOperator& r) {
  const Matrix& tm = t.matrix();
  const Matrix rm = aligned_to(r, t).matrix();
  return (tm.array() * rm.array()).sum().real();
}

/// Generalized Born rule for an event (a set of outcome indices).
inline double born(const Tester& t, std::span<const std::size_t> event, const Comb& c) {
  require_same_spaces(t.elements.at(0), c.op, "born");
  double p = 0.0;
  for (std::size_t b : event) p += pairing(t.elements.at(b), c.op);
  return p;
}

/// Probabilities of every outcome.
inline std::vector<double> born_all(const Tester& t, const Comb& c) {
  require_same_spaces(t.elements.at(0), c.op, "born");
  std::vector<double> p;
  for (const auto& e : t.elements) p.push_back(pairing(e, c.op));
  return p;
}

// ---------------------------------------------------------------------------
// Dilation of instruments

struct InstrumentDilation {
  Comb comb;                 // last space is H_{2N-1} ⊗ H_A merged
  int ancilla_dim = 1;
  int last_dim = 1;          // dimension of H_{2N-1} before merging
  std::vector<Matrix> povm;  // on H_A

  /// Tr_A[S (I ⊗ P_B^τ)] for outcome b.
  LabeledOperator reconstruct(std::size_t b) const {
    const int last = 2 * comb.teeth - 1;
    std::vector<SpaceLabel> spaces = comb.op.spaces();
    spaces.back() = {last, last_dim, Role::output};
    spaces.push_back({last + 1, ancilla_dim, Role::ancilla});
    const LabeledOperator s(spaces, comb.op.matrix());
    const LabeledOperator p(std::vector<SpaceLabel>{spaces.back()}, povm.at(b).transpose());
    const LabeledOperator prod(spaces, s.matrix() * lift(p, spaces).matrix());
    const std::array<int, 1> anc{last + 1};
    return partial_trace(prod, anc);
  }
};

inline InstrumentDilation dilate_instrument(const Instrument& inst, double tol = kEqualityTol) {
  const auto report = validate_instrument(inst, tol);
  if (!report.pass)
    throw ValidationError("dilate_instrument: total is not a deterministic comb (residual " +
                          std::to_string(report.max_residual) + ")");
  const LabeledOperator total = inst.total();
  const auto es = eigh(total.matrix());
  const double lmax = es.values.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = es.values.size(); i-- > 0;)
    if (es.values(i) > kSupportTol * lmax) keep.push_back(i);
  const auto r = static_cast<Eigen::Index>(keep.size());
  const Eigen::Index d = total.dim();

  // |R^{1/2}>> = sum_i sqrt(lambda_i) |phi_i> ⊗ |i>_A
  Vector purif = Vector::Zero(d * r);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double s = std::sqrt(es.values(keep[i]));
    for (Eigen::Index n = 0; n < d; ++n) purif(n * r + i) = s * es.vectors(n, keep[i]);
  }
  InstrumentDilation out;
  out.ancilla_dim = static_cast<int>(r);
  out.last_dim = total.spaces().back().dim;
  std::vector<SpaceLabel> spaces = total.spaces();
  spaces.back().dim *= static_cast<int>(r);
  out.comb = make_comb(LabeledOperator(spaces, purif * purif.adjoint()), CombKind::deterministic);

  for (const auto& e : inst.elements) {
    const Matrix rb = aligned_to(e, total).matrix();
    Matrix p(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        p(i, j) = es.vectors.col(keep[i]).dot(rb * es.vectors.col(keep[j])) /
                  std::sqrt(es.values(keep[i]) * es.values(keep[j]));
    out.povm.push_back(hermitian_part(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition of testers

struct TesterDecomposition {
  std::vector<SpaceLabel> spaces;  // canonical comb spaces
  Matrix sandwich;                 // A = W^dag [T_Ω^τ]^{1/2}, r x D
  Matrix support;                  // W, D x r basis of Supp(T_Ω^τ)
  std::vector<Matrix> povm;        // r x r

  Eigen::Index ancilla_dim() const { return sandwich.rows(); }

  /// S(R) = A R A^dag, a state on H_A when R is deterministic.
  Matrix apply(const LabeledOperator& r) const {
    const LabeledOperator probe(spaces, Matrix::Identity(sandwich.cols(), sandwich.cols()));
    const Matrix rm = aligned_to(r, probe).matrix();
    return sandwich * rm * sandwich.adjoint();
  }

  double probability(std::size_t b, const LabeledOperator& r) const {
    return (povm.at(b).transpose() * apply(r)).trace().real();
  }
};

inline TesterDecomposition decompose_tester(const Tester& t, double tol = kEqualityTol) {
  const auto report = validate_tester(t, tol);
  if (!report.pass)
    throw ValidationError("decompose_tester: invalid tester (residual " +
                          std::to_string(report.max_residual) + ")");
  const LabeledOperator total = t.total();
  const Matrix x = total.matrix().transpose();
  const Support supp = compress_to_support(x);
  const Matrix root = psd_sqrt(x, std::max(tol, kPsdTol));
  const Matrix inv_root = pinv_sqrt(x);
  TesterDecomposition d;
  d.spaces = total.spaces();
  d.support = supp.basis;
  d.sandwich = supp.basis.adjoint() * root;
  for (const auto& e : t.elements) {
    const Matrix tb = aligned_to(e, total).matrix().transpose();
    const Matrix pt = supp.basis.adjoint() * inv_root * tb * inv_root * supp.basis;
    d.povm.push_back(hermitian_part(pt).transpose());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Operational distance

struct DistanceOptions {
  int restarts = 20;
  int max_rounds = 200;
  double improvement_tol = 1e-8;
  double perturbation = 0.5;
  std::uint64_t seed = 7;
  SdpOptions sdp{};
};

struct DistanceResult {
  double value = 0.0;
  LabeledOperator witness;  // tester normalization T_Ω achieving the value
  std::vector<double> per_restart;
  int rounds = 0;  // total see-saw rounds over all restarts
};

/// ‖[T_Ω^τ]^{1/2} Δ [T_Ω^τ]^{1/2}‖_1 for a tester normalization T_Ω.
inline double sandwiched_trace_norm(const Matrix& t_omega, const Matrix& delta) {
  const Matrix root = psd_sqrt(t_omega.transpose(), 1e-7);
  return trace_norm(hermitian_part(root * delta * root));
}

namespace detail {

// Helstrom split of a tester normalization into the two-outcome tester that
// is optimal for discriminating with difference delta.
inline Blocks helstrom_split(const Matrix& t_omega, const Matrix& delta) {
  const Matrix x = t_omega.transpose();
  const Matrix root = psd_sqrt(x, 1e-7);
  const auto es = eigh(root * delta * root);
  Matrix plus = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) > 0) plus += es.vectors.col(i) * es.vectors.col(i).adjoint();
  const Matrix minus = Matrix::Identity(x.rows(), x.cols()) - plus;
  return {(root * plus * root).transpose(), (root * minus * root).transpose()};
}

}  // namespace detail

/// See-saw ascent of the operational distance. Each round (i) splits the
/// current T_Ω by the Helstrom measurement and (ii) improves the resulting
/// two-outcome tester on the linear objective Tr[(T_+ - T_-)^τ Δ] over the
/// tester set; the value reported is evaluated exactly on a feasible T_Ω and
/// is a lower bound on the maximum.
inline DistanceResult operational_distance(const Comb& a, const Comb& b,
                                           const DistanceOptions& opts = {}) {
  for (const Comb* c : {&a, &b}) {
    const auto rep = validate_deterministic(*c, 1e-7);
    if (!rep.pass)
      throw ValidationError("operational_distance: input comb is not deterministic (residual " +
                            std::to_string(rep.max_residual) + ")");
  }
  require_same_spaces(a.op, b.op, "operational_distance");
  const Matrix delta = (a.op - b.op).matrix();
  const ChainAffineSet set(a.op.spaces(), tester_teeth(a.teeth));
  const Eigen::Index d = set.dim();

  SdpProblem problem;
  problem.cost = {-delta.transpose(), delta.transpose()};
  problem.project_affine = [&set](Blocks& x) {
    const Matrix sum = x[0] + x[1];
    const Matrix corr = 0.5 * (set.project(sum) - sum);
    x[0] += corr;
    x[1] += corr;
  };

  DistanceResult result;
  result.witness = LabeledOperator(a.op.spaces(), set.uniform());
  result.value = sandwiched_trace_norm(set.uniform(), delta);
  Rng rng(opts.seed);
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Matrix t_omega = set.uniform();
    if (restart > 0) {
      const Matrix h = random_hermitian(d, rng);
      t_omega = mix_to_psd(set.project(t_omega + opts.perturbation * set.uniform()(0, 0) * h), set);
    }
    double value = sandwiched_trace_norm(t_omega, delta);
    for (int round = 0; round < opts.max_rounds; ++round) {
      ++result.rounds;
      Blocks warm = detail::helstrom_split(t_omega, delta);
      const SdpResult sol = solve_sdp(problem, opts.sdp, std::move(warm));
      const Matrix candidate = mix_to_psd(set.project(sol.x[0] + sol.x[1]), set);
      const double v = sandwiched_trace_norm(candidate, delta);
      const double gain = v - value;
      if (gain > 0) {
        t_omega = candidate;
        value = v;
      }
      if (gain < opts.improvement_tol) break;
    }
    result.per_restart.push_back(value);
    if (value > result.value) {
      result.value = value;
      result.witness = LabeledOperator(a.op.spaces(), t_omega);
    }
  }
  return result;
}

}  // namespace combkit
