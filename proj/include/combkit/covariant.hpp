#pragma once

// Group actions on combs, instruments and testers.
//
// On a comb, g acts by W_g = ⊗_k (U_{g,2k+1} ⊗ U*_{g,2k}) (odd ids get U,
// even ids get U*). Testers transform with the conjugate V_g = W_g^*, so that
// p(gB | W_g R W_g^dag) = p(B | R) for covariant testers.

#include "combkit/group.hpp"
#include "combkit/tester.hpp"

namespace combkit {

enum class ActionKind { comb, tester };

/// The unitary W_g (comb) or V_g (tester) on the given spaces, in their order.
inline Matrix network_action(const Representation& rep, std::span<const SpaceLabel> spaces, int g,
                             ActionKind kind) {
  Matrix acc = Matrix::Ones(1, 1);
  for (const auto& s : spaces) {
    Matrix u = rep.unitary(g, s.id, s.dim);
    const bool odd = s.id % 2 != 0;
    const bool conj = (kind == ActionKind::comb) != odd;
    acc = kron(acc, conj ? Matrix(u.conjugate()) : u);
  }
  return acc;
}

inline std::vector<Matrix> network_actions(const Representation& rep, std::span<const SpaceLabel> spaces,
                                           ActionKind kind) {
  std::vector<Matrix> out;
  for (int g = 0; g < rep.group().order(); ++g) out.push_back(network_action(rep, spaces, g, kind));
  return out;
}

/// max_g ‖[R, W_g]‖_F.
inline double check_covariant_comb(const Comb& c, const Representation& rep) {
  double r = 0.0;
  for (const auto& w : network_actions(rep, c.op.spaces(), ActionKind::comb))
    r = std::max(r, (c.op.matrix() * w - w * c.op.matrix()).norm());
  return r;
}

inline Comb twirl_comb(const Comb& c, const Representation& rep) {
  const auto ws = network_actions(rep, c.op.spaces(), ActionKind::comb);
  Matrix acc = Matrix::Zero(c.op.dim(), c.op.dim());
  for (const auto& w : ws) acc += w * c.op.matrix() * w.adjoint();
  acc /= static_cast<double>(ws.size());
  return {LabeledOperator(c.op.spaces(), hermitian_part(acc)), c.teeth, c.kind};
}

// ---------------------------------------------------------------------------
// Outcome spaces

/// Transitive action of a group on a finite outcome set, with a base point,
/// a section σ (σ_ω ω₀ = ω) and the stabilizer of the base point.
class CovariantStructure {
 public:
  /// action[g][ω] = g·ω. The section picks the smallest g with g·ω₀ = ω.
  CovariantStructure(const FiniteGroup& group, std::vector<std::vector<int>> action, int base = 0)
      : action_(std::move(action)), base_(base) {
    const int n = group.order();
    if (static_cast<int>(action_.size()) != n)
      throw GroupError("outcome action has " + std::to_string(action_.size()) + " rows for a group of order " +
                       std::to_string(n));
    const int m = static_cast<int>(action_.front().size());
    if (m == 0) throw GroupError("outcome set is empty");
    if (base < 0 || base >= m) throw GroupError("base point out of range");
    for (int g = 0; g < n; ++g) {
      if (static_cast<int>(action_[g].size()) != m) throw GroupError("outcome action rows differ in length");
      for (int w : action_[g])
        if (w < 0 || w >= m) throw GroupError("outcome action entry out of range");
    }
    for (int w = 0; w < m; ++w) {
      if (action_[group.identity()][w] != w) throw GroupError("identity does not fix outcome " + std::to_string(w));
      for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
          if (action_[group.mul(g, h)][w] != action_[g][action_[h][w]])
            throw GroupError("outcome table is not a group action");
    }
    section_.assign(m, -1);
    for (int g = 0; g < n; ++g) {
      const int w = action_[g][base_];
      if (section_[w] < 0) section_[w] = g;
      if (w == base_) stabilizer_.push_back(g);
    }
    for (int w = 0; w < m; ++w)
      if (section_[w] < 0) throw GroupError("outcome action is not transitive (outcome " + std::to_string(w) + ")");
  }

  /// Ω = G with left multiplication.
  static CovariantStructure regular(const FiniteGroup& group) {
    return CovariantStructure(group, group.table(), group.identity());
  }

  int size() const { return static_cast<int>(action_.front().size()); }
  int act(int g, int w) const { return action_[g][w]; }
  int base() const { return base_; }
  const std::vector<std::vector<int>>& action() const { return action_; }
  const std::vector<int>& section() const { return section_; }
  const std::vector<int>& stabilizer() const { return stabilizer_; }

 private:
  std::vector<std::vector<int>> action_;
  int base_ = 0;
  std::vector<int> section_;
  std::vector<int> stabilizer_;
};

namespace detail {

template <class Family>
Family twirl_family(const Family& f, const Representation& rep, const CovariantStructure& st,
                    ActionKind kind) {
  const FiniteGroup& g = rep.group();
  if (static_cast<int>(f.size()) != st.size())
    throw DimensionError("family has " + std::to_string(f.size()) + " outcomes but the action has " +
                         std::to_string(st.size()));
  const auto& spaces = f.elements.at(0).spaces();
  const auto vs = network_actions(rep, spaces, kind);
  std::vector<LabeledOperator> out;
  for (int b = 0; b < st.size(); ++b) {
    Matrix acc = Matrix::Zero(f.elements[0].dim(), f.elements[0].dim());
    for (int h = 0; h < g.order(); ++h) {
      const int src = st.act(g.inverse(h), b);
      acc += vs[h] * f.elements[src].matrix() * vs[h].adjoint();
    }
    acc /= static_cast<double>(g.order());
    out.emplace_back(spaces, hermitian_part(acc));
  }
  Family res = f;
  res.elements = std::move(out);
  return res;
}

template <class Family>
double family_covariance(const Family& f, const Representation& rep, const CovariantStructure& st,
                         ActionKind kind) {
  if (static_cast<int>(f.size()) != st.size())
    throw DimensionError("family has " + std::to_string(f.size()) + " outcomes but the action has " +
                         std::to_string(st.size()));
  const auto vs = network_actions(rep, f.elements.at(0).spaces(), kind);
  double r = 0.0;
  for (int g = 0; g < rep.group().order(); ++g)
    for (int b = 0; b < st.size(); ++b) {
      const Matrix moved = vs[g] * f.elements[b].matrix() * vs[g].adjoint();
      r = std::max(r, (moved - f.elements[st.act(g, b)].matrix()).norm());
    }
  return r;
}

}  // namespace detail

/// T̄_b = (1/|G|) Σ_h V_h T_{h⁻¹b} V_h^dag.
inline Tester twirl_tester(const Tester& t, const Representation& rep, const CovariantStructure& st) {
  return detail::twirl_family(t, rep, st, ActionKind::tester);
}

inline Instrument twirl_instrument(const Instrument& inst, const Representation& rep,
                                   const CovariantStructure& st) {
  return detail::twirl_family(inst, rep, st, ActionKind::comb);
}

/// max_{g,b} ‖V_g T_b V_g^dag - T_{gb}‖_F.
inline double check_covariant_tester(const Tester& t, const Representation& rep, const CovariantStructure& st) {
  return detail::family_covariance(t, rep, st, ActionKind::tester);
}

/// max_{g,b} ‖W_g R_b W_g^dag - R_{gb}‖_F.
inline double check_covariant_instrument(const Instrument& inst, const Representation& rep,
                                         const CovariantStructure& st) {
  return detail::family_covariance(inst, rep, st, ActionKind::comb);
}

// ---------------------------------------------------------------------------
// Seeds

/// Average of V_{g₀} D V_{g₀}^dag over the stabilizer: the projection onto
/// operators commuting with the stabilizer action.
inline LabeledOperator stabilizer_average(const LabeledOperator& d, const Representation& rep,
                                          const CovariantStructure& st) {
  Matrix acc = Matrix::Zero(d.dim(), d.dim());
  for (int g0 : st.stabilizer()) {
    const Matrix v = network_action(rep, d.spaces(), g0, ActionKind::tester);
    acc += v * d.matrix() * v.adjoint();
  }
  return {d.spaces(), acc / static_cast<double>(st.stabilizer().size())};
}

/// T_ω = V_{σω} D₀ V_{σω}^dag / |Ω|.
inline Tester covariant_tester_from_seed(const LabeledOperator& seed, const Representation& rep,
                                         const CovariantStructure& st, double tol = kEqualityTol) {
  const LabeledOperator d0 = canonical(seed);
  const int teeth = static_cast<int>(d0.spaces().size()) / 2;
  require_psd(d0.matrix(), std::max(tol, kPsdTol));
  for (int g0 : st.stabilizer()) {
    const Matrix v = network_action(rep, d0.spaces(), g0, ActionKind::tester);
    const double r = (v * d0.matrix() - d0.matrix() * v).norm();
    if (r > std::max(tol, 1e-9))
      throw ValidationError("seed does not commute with stabilizer element " + std::to_string(g0) +
                            " (residual " + std::to_string(r) + ")");
  }
  std::vector<LabeledOperator> el;
  for (int w = 0; w < st.size(); ++w) {
    const Matrix v = network_action(rep, d0.spaces(), st.section()[w], ActionKind::tester);
    el.emplace_back(d0.spaces(), v * d0.matrix() * v.adjoint() / static_cast<double>(st.size()));
  }
  Tester t = make_family<Tester>(std::move(el), teeth);
  const auto rep_chain = validate_tester(t, std::max(tol, 1e-9));
  if (!rep_chain.pass) {
    // Steps are listed last tooth first.
    std::size_t worst = 0;
    for (std::size_t i = 1; i < rep_chain.steps.size(); ++i)
      if (rep_chain.steps[i].residual > rep_chain.steps[worst].residual) worst = i;
    const double worst_r = rep_chain.steps.empty() ? 0.0 : rep_chain.steps[worst].residual;
    std::string msg = "seed gives an invalid tester: ";
    if (worst_r >= rep_chain.scalar_residual())
      msg += "normalization of tooth " + std::to_string(rep_chain.steps.size() - 1 - worst) +
             " has residual " + std::to_string(worst_r);
    else
      msg += "total scalar is " + std::to_string(rep_chain.final_scalar) + ", expected 1";
    throw ValidationError(msg);
  }
  return t;
}

/// D₀ = |Ω| T_{ω₀}.
inline LabeledOperator extract_seed(const Tester& t, const CovariantStructure& st) {
  return static_cast<double>(st.size()) * t.elements.at(st.base());
}

// ---------------------------------------------------------------------------
// Covariant supermaps

struct SupermapCheck {
  double residual = 0.0;          // max over g and basis inputs E of ‖S(W_g E W_g^dag) - U_A S(E) U_A^dag‖
  double support_residual = 0.0;  // max_g ‖[W_g, Π]‖ for the projector Π onto Supp(T_Ω^τ)
  double unitarity = 0.0;         // max_g ‖U_A^dag U_A - I‖
  std::vector<Matrix> ancilla_unitaries;  // U_{g,A} = W^dag W_g W
};

/// Checks that the supermap S(R) = A R A^dag of a tester's decomposition
/// intertwines W_g on combs with U_{g,A} on the ancilla.
inline SupermapCheck check_covariant_supermap(const Tester& t, const Representation& rep,
                                              double tol = kEqualityTol) {
  const TesterDecomposition dec = decompose_tester(t, tol);
  const auto ws = network_actions(rep, dec.spaces, ActionKind::comb);
  const Matrix proj = dec.support * dec.support.adjoint();
  const Eigen::Index d = dec.sandwich.cols();
  const Eigen::Index r = dec.ancilla_dim();
  SupermapCheck out;
  for (const auto& w : ws) {
    out.support_residual = std::max(out.support_residual, (w * proj - proj * w).norm());
    const Matrix ua = dec.support.adjoint() * w * dec.support;
    out.unitarity = std::max(out.unitarity, (ua.adjoint() * ua - Matrix::Identity(r, r)).norm());
    // Basis inputs E_ij: S(W E_ij W^dag) = (A W)_{:,i} (A W)_{:,j}^dag.
    const Matrix aw = dec.sandwich * w;
    const Matrix ua_a = ua * dec.sandwich;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const Matrix lhs = aw.col(i) * aw.col(j).adjoint();
        const Matrix rhs = ua_a.col(i) * ua_a.col(j).adjoint();
        out.residual = std::max(out.residual, (lhs - rhs).norm());
      }
    out.ancilla_unitaries.push_back(ua);
  }
  return out;
}

}  // namespace combkit
