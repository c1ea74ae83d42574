#pragma once

// Covariant estimation of group-parametrized networks with outcome set
// Ω = G and uniform prior.
//
// For a covariant tester T_ĝ = V_ĝ D₀ V_ĝ^dag / |G| and a family
// R_g = W_g R₀ W_g^dag, a left-invariant cost averages to Tr[D₀^τ Q] with
// Q = (1/|G|) Σ_k c(k, e) W_k^dag R₀ W_k, so the optimal tester solves a
// linear problem over the seed.

#include "combkit/covariant.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace combkit {

// ---------------------------------------------------------------------------
// Costs

/// Table c(ĝ, g) indexed [ĝ][g].
struct CostFunction {
  std::vector<std::vector<double>> table;
  std::string name = "custom";

  double operator()(int ghat, int g) const { return table[ghat][g]; }
  int size() const { return static_cast<int>(table.size()); }
};

inline CostFunction delta_cost(const FiniteGroup& g) {
  CostFunction c{std::vector<std::vector<double>>(g.order(), std::vector<double>(g.order(), 1.0)), "delta"};
  for (int a = 0; a < g.order(); ++a) c.table[a][a] = 0.0;
  return c;
}

/// c(ĝ, g) = 1 - |χ(ĝ⁻¹g)|² / χ(e)².
inline CostFunction fidelity_cost(const FiniteGroup& g, const SingleRep& u) {
  const auto chi = character(u);
  const double d = chi[g.identity()].real();
  CostFunction c{std::vector<std::vector<double>>(g.order(), std::vector<double>(g.order())), "fidelity"};
  for (int a = 0; a < g.order(); ++a)
    for (int b = 0; b < g.order(); ++b)
      c.table[a][b] = 1.0 - std::norm(chi[g.mul(g.inverse(a), b)]) / (d * d);
  return c;
}

inline CostFunction constant_cost(const FiniteGroup& g, double v) {
  return {std::vector<std::vector<double>>(g.order(), std::vector<double>(g.order(), v)), "constant"};
}

/// max |c(hĝ, hg) - c(ĝ, g)| over all h, ĝ, g; throws on malformed tables.
inline double left_invariance_residual(const CostFunction& c, const FiniteGroup& g) {
  const int n = g.order();
  if (c.size() != n) throw DimensionError("cost table has " + std::to_string(c.size()) + " rows for a group of order " +
                                          std::to_string(n));
  for (const auto& row : c.table) {
    if (static_cast<int>(row.size()) != n) throw DimensionError("cost table is not square");
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v)) throw Error("cost table entries must be finite and non-negative");
  }
  double r = 0.0;
  for (int h = 0; h < n; ++h)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) r = std::max(r, std::abs(c(g.mul(h, a), g.mul(h, b)) - c(a, b)));
  return r;
}

inline void require_left_invariant(const CostFunction& c, const FiniteGroup& g, double tol = 1e-12) {
  const double r = left_invariance_residual(c, g);
  if (r > tol)
    throw ValidationError("cost is not left-invariant (residual " + std::to_string(r) +
                          "); the covariant reduction does not apply");
}

// ---------------------------------------------------------------------------
// Families

struct CombFamily {
  Representation rep;
  Comb base;                  // R₀
  std::vector<Comb> members;  // R_g = W_g R₀ W_g^dag
  int copies = 0;             // N for tensor-power families, 0 otherwise
  SingleRep single;           // the one-wire rep of a tensor-power family

  const FiniteGroup& group() const { return rep.group(); }
};

inline CombFamily generate_family(const Representation& rep, const Comb& base) {
  CombFamily f;
  f.rep = rep;
  f.base = base;
  for (const auto& w : network_actions(rep, base.op.spaces(), ActionKind::comb))
    f.members.push_back({LabeledOperator(base.op.spaces(), w * base.op.matrix() * w.adjoint()), base.teeth, base.kind});
  return f;
}

/// max_g ‖R_g - W_g R₀ W_g^dag‖.
inline double family_residual(const CombFamily& f) {
  const auto ws = network_actions(f.rep, f.base.op.spaces(), ActionKind::comb);
  if (ws.size() != f.members.size()) throw DimensionError("family size differs from the group order");
  double r = 0.0;
  for (std::size_t g = 0; g < ws.size(); ++g)
    r = std::max(r, (aligned_to(f.members[g].op, f.base.op).matrix() - ws[g] * f.base.op.matrix() * ws[g].adjoint()).norm());
  return r;
}

/// R_g = (|U_g>><<U_g|)^{⊗N}: U acts on the output of every tooth.
inline CombFamily n_copy_family(const FiniteGroup& group, const SingleRep& u, int copies) {
  if (copies < 1) throw DimensionError("n_copy_family needs at least one copy");
  const RepCheck chk = check_rep(group, u);
  if (!chk.ok(1e-9)) throw GroupError("n_copy_family: invalid representation");
  const int d = static_cast<int>(u.front().rows());
  Representation rep(group);
  std::vector<int> dims(2 * copies, d);
  for (int k = 0; k < copies; ++k) rep.set(2 * k + 1, u);
  Vector v = Vector::Zero(d * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1;
  const Matrix one = v * v.adjoint();
  Matrix acc = Matrix::Ones(1, 1);
  for (int k = 0; k < copies; ++k) acc = kron(acc, one);
  const Comb base{LabeledOperator(comb_spaces(dims), acc), copies, CombKind::deterministic};
  CombFamily f = generate_family(rep, base);
  f.copies = copies;
  f.single = u;
  return f;
}

// ---------------------------------------------------------------------------
// Costs of testers

/// p(ĝ | g) for every g (rows) and ĝ (columns).
inline std::vector<std::vector<double>> outcome_probabilities(const Tester& t, const CombFamily& f) {
  if (static_cast<int>(t.size()) != f.group().order())
    throw DimensionError("tester has " + std::to_string(t.size()) + " outcomes, expected one per group element");
  std::vector<std::vector<double>> p;
  for (const auto& r : f.members) p.push_back(born_all(t, r));
  return p;
}

inline double average_cost(const Tester& t, const CombFamily& f, const CostFunction& c) {
  const auto p = outcome_probabilities(t, f);
  const int n = f.group().order();
  double acc = 0.0;
  for (int g = 0; g < n; ++g)
    for (int gh = 0; gh < n; ++gh) acc += c(gh, g) * p[g][gh];
  return acc / n;
}

inline double worst_case_cost(const Tester& t, const CombFamily& f, const CostFunction& c) {
  const auto p = outcome_probabilities(t, f);
  const int n = f.group().order();
  double worst = 0.0;
  for (int g = 0; g < n; ++g) {
    double acc = 0.0;
    for (int gh = 0; gh < n; ++gh) acc += c(gh, g) * p[g][gh];
    worst = std::max(worst, acc);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Optimal covariant testers

struct EstimationOptions {
  int restarts = 50;
  std::uint64_t seed = 7;
  SdpOptions sdp{};
};

struct EstimationResult {
  Tester tester;
  LabeledOperator seed;  // D₀
  double cost = 0.0;     // exact average cost of the returned tester
  std::vector<double> per_restart;
  int iterations = 0;    // total solver iterations
  bool converged = false;
};

namespace detail {

/// Group average of V_g X V_g^dag.
inline Matrix twirl_matrix(const Matrix& x, std::span<const Matrix> vs) {
  Matrix acc = Matrix::Zero(x.rows(), x.cols());
  for (const auto& v : vs) acc += v * x * v.adjoint();
  return acc / static_cast<double>(vs.size());
}

// Seeds whose twirl lies in the tester affine set. The twirl commutes with
// the chain projections, so D + P_A(Tw D) - Tw D is the Frobenius projection.
struct SeedSet {
  const ChainAffineSet* affine;
  std::vector<Matrix> vs;

  Matrix project(const Matrix& d) const {
    const Matrix tw = twirl_matrix(d, vs);
    return d + affine->project(tw) - tw;
  }

  /// Feasible and PSD: project, then mix with the uniform member.
  Matrix finalize(const Matrix& d) const {
    const Matrix x = hermitian_part(project(psd_part(d)));
    const double lmin = min_eigenvalue(x);
    if (lmin >= 0.0) return x;
    const double u = affine->trace_target() / static_cast<double>(affine->dim());
    const double t = -lmin / (u - lmin);
    return (1.0 - t) * x + t * affine->uniform();
  }
};

inline Tester tester_from_seed_matrix(const Matrix& d0, std::span<const SpaceLabel> spaces,
                                      std::span<const Matrix> vs, int teeth) {
  std::vector<LabeledOperator> el;
  const std::vector<SpaceLabel> sp(spaces.begin(), spaces.end());
  for (const auto& v : vs) el.emplace_back(sp, v * d0 * v.adjoint() / static_cast<double>(vs.size()));
  return make_family<Tester>(std::move(el), teeth);
}

}  // namespace detail

/// Optimal covariant tester for a family generated by conjugation, over
/// seeds D₀ >= 0 whose twirl obeys the tester normalization.
inline EstimationResult optimize_covariant_tester(const CombFamily& f, const CostFunction& c,
                                                  const EstimationOptions& opts = {}) {
  const FiniteGroup& g = f.group();
  require_left_invariant(c, g);
  const auto& spaces = f.base.op.spaces();
  const auto ws = network_actions(f.rep, spaces, ActionKind::comb);
  const auto vs = network_actions(f.rep, spaces, ActionKind::tester);
  const Eigen::Index d = f.base.op.dim();
  Matrix q = Matrix::Zero(d, d);
  for (int k = 0; k < g.order(); ++k) q += c(k, g.identity()) * ws[k].adjoint() * f.base.op.matrix() * ws[k];
  q = hermitian_part(q / static_cast<double>(g.order()));

  const ChainAffineSet affine(spaces, tester_teeth(f.base.teeth));
  const detail::SeedSet seeds{&affine, vs};
  SdpProblem problem;
  problem.cost = {q.transpose()};
  problem.project_affine = [&seeds](Blocks& x) { x[0] = seeds.project(x[0]); };

  EstimationResult best;
  best.cost = std::numeric_limits<double>::infinity();
  Rng rng(opts.seed);
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Blocks warm;
    if (r > 0) {
      const Matrix h = random_hermitian(d, rng);
      warm.push_back(psd_part(seeds.project(affine.uniform() + 0.5 * affine.uniform()(0, 0) * h)));
    }
    const SdpResult sol = solve_sdp(problem, opts.sdp, std::move(warm));
    best.iterations += sol.iterations;
    const Matrix d0 = seeds.finalize(sol.x[0]);
    Tester t = detail::tester_from_seed_matrix(d0, spaces, vs, f.base.teeth);
    const double cost = average_cost(t, f, c);
    best.per_restart.push_back(cost);
    if (cost < best.cost) {
      best.cost = cost;
      best.tester = std::move(t);
      best.seed = LabeledOperator(spaces, d0);
      best.converged = sol.converged;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Parallel estimation on states (U_g ⊗ I_ref)|Ψ>

struct StateEstimationResult {
  double cost = 0.0;
  Vector probe;                // |Ψ> on (system ⊗ reference)
  Matrix povm_seed;            // Ξ with P_ĝ = Ṽ_ĝ Ξ Ṽ_ĝ^dag / |G|
  std::vector<double> per_restart;
  int rounds = 0;
};

struct StateEstimationOptions {
  int restarts = 10;
  int max_rounds = 200;
  double improvement_tol = 1e-10;
  std::uint64_t seed = 7;
  SdpOptions sdp{};
};

/// Covariant POVM estimation for the orbit of a probe under u ⊗ I_ref, with
/// alternating optimization of the POVM seed and the probe.
inline StateEstimationResult optimize_state_estimation(const FiniteGroup& g, const SingleRep& u,
                                                       const CostFunction& c,
                                                       const StateEstimationOptions& opts = {}) {
  require_left_invariant(c, g);
  const Eigen::Index ds = u.front().rows();
  const Eigen::Index dim = ds * ds;  // reference as large as the system
  std::vector<Matrix> vt;
  for (const auto& m : u) vt.push_back(kron(m, Matrix::Identity(ds, ds)));
  const int n = g.order();
  const Matrix id = Matrix::Identity(dim, dim);

  auto cost_of = [&](const Vector& psi, const Matrix& xi) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vector w = vt[k].adjoint() * psi;
      acc += c(k, g.identity()) * w.dot(xi * w).real();
    }
    return acc / n;
  };
  SdpProblem problem;
  problem.project_affine = [&](Blocks& x) { x[0] += id - detail::twirl_matrix(x[0], vt); };

  StateEstimationResult best;
  best.cost = std::numeric_limits<double>::infinity();
  Rng rng(opts.seed);
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    Vector psi = random_pure(dim, rng);
    Matrix xi = id;
    double value = cost_of(psi, xi);
    for (int round = 0; round < opts.max_rounds; ++round) {
      ++best.rounds;
      // POVM step: min Tr[Ξ M'] with M' = (1/|G|) Σ_k c(k,e) Ṽ_k^dag |Ψ><Ψ| Ṽ_k.
      Matrix m = Matrix::Zero(dim, dim);
      for (int k = 0; k < n; ++k) {
        const Vector w = vt[k].adjoint() * psi;
        m += c(k, g.identity()) * w * w.adjoint();
      }
      problem.cost = {m / static_cast<double>(n)};
      Blocks warm{xi};
      const SdpResult sol = solve_sdp(problem, opts.sdp, std::move(warm));
      Matrix cand = hermitian_part(sol.x[0]);
      cand += id - detail::twirl_matrix(cand, vt);
      const double lmin = min_eigenvalue(cand);
      if (lmin < 0) cand = (cand - lmin * id) / (1.0 - lmin);
      // Probe step: bottom eigenvector of (1/|G|) Σ_k c(k,e) Ṽ_k Ξ Ṽ_k^dag.
      Matrix mp = Matrix::Zero(dim, dim);
      for (int k = 0; k < n; ++k) mp += c(k, g.identity()) * vt[k] * cand * vt[k].adjoint();
      const auto es = eigh(hermitian_part(mp / static_cast<double>(n)));
      const Vector next = es.vectors.col(0);
      const double v = std::min(cost_of(psi, cand), cost_of(next, cand));
      const double gain = value - v;
      if (gain > 0) {
        xi = cand;
        if (cost_of(next, cand) <= cost_of(psi, cand)) psi = next;
        value = v;
      }
      if (gain < opts.improvement_tol) break;
    }
    best.per_restart.push_back(value);
    if (value < best.cost) {
      best.cost = value;
      best.probe = psi;
      best.povm_seed = xi;
    }
  }
  return best;
}

struct ParallelReport {
  double sequential = 0.0;
  double parallel = 0.0;
  double difference = 0.0;  // parallel - sequential, >= -tol
  EstimationResult sequential_result;
  StateEstimationResult parallel_result;
};

/// Sequential (tester) optimum against the parallel probe-state optimum for
/// a tensor-power family.
inline ParallelReport parallel_reduction_check(const CombFamily& f, const CostFunction& c,
                                               const EstimationOptions& seq_opts = {},
                                               const StateEstimationOptions& par_opts = {}) {
  if (f.copies < 1) throw Error("parallel_reduction_check needs a tensor-power family");
  ParallelReport rep;
  rep.sequential_result = optimize_covariant_tester(f, c, seq_opts);
  rep.parallel_result = optimize_state_estimation(f.group(), tensor_power(f.single, f.copies), c, par_opts);
  rep.sequential = rep.sequential_result.cost;
  rep.parallel = rep.parallel_result.cost;
  rep.difference = rep.parallel - rep.sequential;
  return rep;
}

// ---------------------------------------------------------------------------
// Reference frame alignment

/// A one-dimensional character λ with conj(χ(g)) = λ(g) χ(g) for all g, if
/// one exists; this makes U* equivalent to λ ⊗ U. Values of λ are |G|-th
/// roots of unity fixed on a generating set; where χ(g) != 0 the ratio
/// conj(χ)/χ forces them.
inline std::optional<std::vector<Complex>> conjugate_equivalence(const FiniteGroup& g, const SingleRep& u,
                                                                 double tol = 1e-9) {
  const auto chi = character(u);
  const int n = g.order();
  std::vector<std::optional<Complex>> forced(n);
  for (int a = 0; a < n; ++a)
    if (std::abs(chi[a]) > tol) forced[a] = std::conj(chi[a]) / chi[a];

  // Greedy generating set.
  std::vector<int> gens;
  std::vector<char> reached(n, 0);
  reached[g.identity()] = 1;
  auto close = [&](std::vector<char>& set) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (set[a] && set[b] && !set[g.mul(a, b)]) {
            set[g.mul(a, b)] = 1;
            changed = true;
          }
    }
  };
  for (int a = 0; a < n; ++a)
    if (!reached[a]) {
      gens.push_back(a);
      reached[a] = 1;
      close(reached);
    }

  // Extends generator values to a homomorphism, or fails.
  auto extend = [&](const std::vector<Complex>& vals) -> std::optional<std::vector<Complex>> {
    std::vector<std::optional<Complex>> lam(n);
    lam[g.identity()] = Complex(1.0);
    std::vector<int> frontier{g.identity()};
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int x : frontier)
        for (std::size_t i = 0; i < gens.size(); ++i) {
          const int y = g.mul(x, gens[i]);
          const Complex v = *lam[x] * vals[i];
          if (!lam[y]) {
            lam[y] = v;
            next.push_back(y);
          } else if (std::abs(*lam[y] - v) > 1e-9) {
            return std::nullopt;
          }
        }
      frontier = std::move(next);
    }
    std::vector<Complex> out;
    for (int a = 0; a < n; ++a) {
      if (forced[a] && std::abs(*forced[a] - *lam[a]) > tol) return std::nullopt;
      out.push_back(*lam[a]);
    }
    return out;
  };

  std::vector<Complex> roots;
  for (int k = 0; k < n; ++k) roots.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / n));
  std::vector<Complex> vals(gens.size());
  std::function<std::optional<std::vector<Complex>>(std::size_t)> search =
      [&](std::size_t i) -> std::optional<std::vector<Complex>> {
    if (i == gens.size()) return extend(vals);
    if (forced[gens[i]]) {
      vals[i] = *forced[gens[i]];
      return search(i + 1);
    }
    for (const Complex& r : roots) {
      vals[i] = r;
      if (auto res = search(i + 1)) return res;
    }
    return std::nullopt;
  };
  return search(0);
}

struct AlignmentOptions {
  int classical_dim = 2;
  bool charge_conjugate = false;
  int restarts = 3;              // random starting combs for Alice
  int max_rounds = 100;
  double improvement_tol = 1e-8;
  double tolerance = 1e-4;       // for the equality claim
  std::uint64_t seed = 7;
  SdpOptions sdp{};
};

struct AlignmentReport {
  double multi_round = 0.0;
  double single_round = 0.0;
  double gap = 0.0;  // multi - single
  bool consistent = false;  // multi >= single - tolerance
  bool equal = false;       // |gap| <= tolerance
  int rounds = 0;           // see-saw rounds over all restarts
  int iterations = 0;       // solver iterations
  Comb alice;
  LabeledOperator seed;     // Bob's covariant seed
  double tolerance = 0.0;
};

/// Alice's r-comb: tooth k takes (B→A particles ⊗ C) to (A→B particles ⊗ C).
/// Bob sees it conjugated by U^{⊗n_ab} ⊗ I_C on outputs and U*^{⊗n_ba} ⊗ I_C
/// on inputs.
inline Representation alignment_rep(const FiniteGroup& g, const SingleRep& u, int n_ab, int n_ba, int rounds,
                                    int classical_dim) {
  Representation rep(g);
  const SingleRep c = trivial_rep(g, classical_dim);
  for (int k = 0; k < rounds; ++k) {
    rep.set(2 * k, tensor_reps(tensor_power(u, n_ba), c));
    rep.set(2 * k + 1, tensor_reps(tensor_power(u, n_ab), c));
  }
  return rep;
}

inline AlignmentReport frame_alignment_compare(const FiniteGroup& g, const SingleRep& u, int n_ab, int n_ba,
                                               int rounds, const CostFunction& c,
                                               const AlignmentOptions& opts = {}) {
  if (n_ab < 0 || n_ba < 0 || rounds < 1 || n_ab + n_ba == 0)
    throw DimensionError("alignment needs rounds >= 1 and at least one particle");
  if (opts.classical_dim < 1) throw DimensionError("classical dimension must be positive");
  if (!opts.charge_conjugate && n_ba > 0 && !conjugate_equivalence(g, u))
    throw ValidationError(
        "representation is not equivalent to its conjugate: particles sent from Bob to Alice cannot be "
        "replaced by particles sent from Alice to Bob; enable charge-conjugate wires to compare against "
        "sending charge-conjugate particles");
  require_left_invariant(c, g);

  AlignmentReport rep;
  rep.tolerance = opts.tolerance;

  // Single round: all particles sent at once from Alice to Bob.
  const int total_ab = rounds * n_ab, total_ba = rounds * n_ba;
  const SingleRep single = opts.charge_conjugate
                               ? tensor_reps(tensor_power(u, total_ab), tensor_power(conjugate_rep(u), total_ba))
                               : tensor_power(u, total_ab + total_ba);
  StateEstimationOptions sopts;
  sopts.seed = opts.seed;
  sopts.restarts = std::max(1, opts.restarts);
  sopts.sdp = opts.sdp;
  rep.single_round = optimize_state_estimation(g, single, c, sopts).cost;

  // Multi round: see-saw between Alice's comb and Bob's covariant tester.
  const Representation arep = alignment_rep(g, u, n_ab, n_ba, rounds, opts.classical_dim);
  const int d = static_cast<int>(u.front().rows());
  int dn_ab = opts.classical_dim, dn_ba = opts.classical_dim;
  for (int i = 0; i < n_ab; ++i) dn_ab *= d;
  for (int i = 0; i < n_ba; ++i) dn_ba *= d;
  std::vector<int> dims;
  for (int k = 0; k < rounds; ++k) {
    dims.push_back(dn_ba);
    dims.push_back(dn_ab);
  }
  const auto spaces = comb_spaces(dims);
  const ChainAffineSet comb_set(spaces, comb_teeth(rounds));
  const auto ws = network_actions(arep, spaces, ActionKind::comb);
  const int n = g.order();
  EstimationOptions eopts;
  eopts.restarts = 1;
  eopts.sdp = opts.sdp;

  SdpProblem alice;
  alice.project_affine = [&comb_set](Blocks& x) { x[0] = comb_set.project(x[0]); };

  rep.multi_round = std::numeric_limits<double>::infinity();
  Rng rng(opts.seed);
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    const Matrix start = random_density(comb_set.dim(), comb_set.dim(), rng) * comb_set.trace_target();
    Comb a{LabeledOperator(spaces, mix_to_psd(comb_set.project(start), comb_set)), rounds, CombKind::deterministic};
    double value = std::numeric_limits<double>::infinity();
    EstimationResult bob;
    for (int round = 0; round < opts.max_rounds; ++round) {
      ++rep.rounds;
      const CombFamily fam = generate_family(arep, a);
      EstimationResult next_bob = optimize_covariant_tester(fam, c, eopts);
      rep.iterations += next_bob.iterations;
      // Alice: min Tr[R F], F = (1/|G|) Σ_{g,ĝ} c(ĝ,g) W_g^dag T_ĝ^τ W_g.
      Matrix f = Matrix::Zero(comb_set.dim(), comb_set.dim());
      for (int gg = 0; gg < n; ++gg) {
        Matrix acc = Matrix::Zero(comb_set.dim(), comb_set.dim());
        for (int gh = 0; gh < n; ++gh) acc += c(gh, gg) * next_bob.tester.elements[gh].matrix().transpose();
        f += ws[gg].adjoint() * acc * ws[gg];
      }
      alice.cost = {hermitian_part(f / static_cast<double>(n))};
      Blocks warm{a.op.matrix()};
      const SdpResult sol = solve_sdp(alice, opts.sdp, std::move(warm));
      rep.iterations += sol.iterations;
      const Comb cand{LabeledOperator(spaces, mix_to_psd(comb_set.project(hermitian_part(sol.x[0])), comb_set)),
                      rounds, CombKind::deterministic};
      const double v_bob = next_bob.cost;
      const double v_alice = average_cost(next_bob.tester, generate_family(arep, cand), c);
      const double v = std::min(v_bob, v_alice);
      const double gain = value - v;
      if (v < value) {
        value = v;
        bob = std::move(next_bob);
        if (v_alice <= v_bob) a = cand;
      }
      if (gain < opts.improvement_tol) break;
    }
    if (value < rep.multi_round) {
      rep.multi_round = value;
      rep.alice = a;
      rep.seed = bob.seed;
    }
  }
  rep.gap = rep.multi_round - rep.single_round;
  rep.consistent = rep.multi_round >= rep.single_round - opts.tolerance;
  rep.equal = std::abs(rep.gap) <= opts.tolerance;
  return rep;
}

}  // namespace combkit
