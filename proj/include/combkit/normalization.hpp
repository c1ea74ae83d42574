#pragma once

// Recursive partial-trace normalization chains shared by combs and testers.
//
// A chain is described by an ordered list of teeth, each with input and
// output space ids (either may be empty, which stands for a one-dimensional
// wire). An operator X satisfies the chain when, peeling teeth from the
// last one,
//
//     Tr_{out_k}[X_k] = I_{in_k} ⊗ X_{k-1},    X_0 = 1,
//
// with X_{k-1} = Tr_{in_k, out_k}[X_k] / d_{in_k}.

#include "combkit/tensor.hpp"

#include <memory>

namespace combkit {

struct Tooth {
  std::vector<int> in;
  std::vector<int> out;
};

/// Teeth of an N-comb on spaces 0..2N-1: tooth k maps 2k to 2k+1.
inline std::vector<Tooth> comb_teeth(int n) {
  std::vector<Tooth> teeth;
  for (int k = 0; k < n; ++k) teeth.push_back({{2 * k}, {2 * k + 1}});
  return teeth;
}

/// Teeth of an N-tester on spaces 0..2N-1: state preparation on 0, channels
/// 2k-1 -> 2k, and a final measurement on 2N-1.
inline std::vector<Tooth> tester_teeth(int n) {
  std::vector<Tooth> teeth;
  teeth.push_back({{}, {0}});
  for (int k = 1; k < n; ++k) teeth.push_back({{2 * k - 1}, {2 * k}});
  teeth.push_back({{2 * n - 1}, {}});
  return teeth;
}

struct ChainStep {
  int tooth = 0;               // 1-based index of the tooth being peeled
  LabeledOperator extracted;   // X_{k-1}
  double residual = 0.0;       // Frobenius norm of the violation at this step
};

struct ValidationReport {
  bool pass = false;
  std::vector<ChainStep> steps;  // ordered from the last tooth to the first
  double final_scalar = 0.0;     // X_0
  double max_residual = 0.0;     // max over step residuals and |X_0 - 1|

  /// Deviation of the final scalar from one.
  double scalar_residual() const { return std::abs(final_scalar - 1.0); }
};

inline int dim_of(const LabeledOperator& a, std::span<const int> ids) {
  int d = 1;
  for (int id : ids) d *= a.space(id).dim;
  return d;
}

inline ValidationReport check_chain(const LabeledOperator& op, std::span<const Tooth> teeth,
                                    double tol) {
  ValidationReport report;
  LabeledOperator current = op;
  for (std::size_t k = teeth.size(); k-- > 0;) {
    const Tooth& t = teeth[k];
    LabeledOperator traced = partial_trace(current, t.out);
    const int d_in = dim_of(traced, t.in);
    LabeledOperator next = (1.0 / d_in) * partial_trace(traced, t.in);
    std::vector<SpaceLabel> in_spaces;
    for (int id : t.in) in_spaces.push_back(traced.space(id));
    const LabeledOperator expected = tensor(next, LabeledOperator::identity(in_spaces));
    const double residual = frobenius_distance(traced, expected);
    report.steps.push_back({static_cast<int>(k) + 1, next, residual});
    report.max_residual = std::max(report.max_residual, residual);
    current = std::move(next);
  }
  if (current.dim() != 1)
    throw DimensionError("normalization chain does not cover every space of the operator");
  report.final_scalar = current.matrix()(0, 0).real();
  report.max_residual = std::max(report.max_residual, report.scalar_residual());
  report.pass = report.max_residual <= tol;
  return report;
}

/// Trace-and-replace: Tr_S[X] ⊗ I_S / d_S laid out in X's factor order.
inline LabeledOperator trace_replace(const LabeledOperator& x, std::span<const int> ids) {
  if (ids.empty()) return x;
  std::vector<SpaceLabel> traced;
  for (int id : ids) traced.push_back(x.space(id));
  const double d = static_cast<double>(detail::total_dim(traced));
  return (1.0 / d) * lift(partial_trace(x, ids), x.spaces());
}

/// The affine set of Hermitian operators obeying a normalization chain, with
/// its orthogonal (Frobenius) projection.
///
/// The homogeneous constraints are kernels of differences of commuting
/// trace-and-replace projectors, so the projection onto their intersection
/// is the product of the individual projections; the trace is then fixed
/// along the identity, which lies in the homogeneous subspace.
class ChainAffineSet {
 public:
  ChainAffineSet(std::vector<SpaceLabel> spaces, std::vector<Tooth> teeth)
      : spaces_(std::move(spaces)), teeth_(std::move(teeth)) {
    dim_ = detail::total_dim(spaces_);
    trace_target_ = 1.0;
    const LabeledOperator probe = LabeledOperator::identity(spaces_);
    for (const auto& t : teeth_) trace_target_ *= dim_of(probe, t.in);
    for (std::size_t k = 0; k < teeth_.size(); ++k) {
      std::vector<int> later;
      for (std::size_t j = k + 1; j < teeth_.size(); ++j) {
        later.insert(later.end(), teeth_[j].in.begin(), teeth_[j].in.end());
        later.insert(later.end(), teeth_[j].out.begin(), teeth_[j].out.end());
      }
      std::vector<int> a = teeth_[k].out;
      a.insert(a.end(), later.begin(), later.end());
      std::vector<int> b = teeth_[k].in;
      b.insert(b.end(), a.begin(), a.end());
      if (!teeth_[k].in.empty()) pairs_.push_back({std::move(a), std::move(b)});
    }
    if (dim_ <= kDenseLimit) build_dense();
  }

  const std::vector<SpaceLabel>& spaces() const { return spaces_; }
  const std::vector<Tooth>& teeth() const { return teeth_; }
  Eigen::Index dim() const { return dim_; }
  double trace_target() const { return trace_target_; }

  /// The maximally mixed member c/D * I.
  Matrix uniform() const {
    return (trace_target_ / static_cast<double>(dim_)) * Matrix::Identity(dim_, dim_);
  }

  /// Projection onto the homogeneous subspace.
  Matrix project_linear(const Matrix& x) const {
    if (dense_) {
      Eigen::Map<const Vector> v(x.data(), x.size());
      Matrix out(dim_, dim_);
      Eigen::Map<Vector>(out.data(), out.size()) = (*dense_) * v;
      return out;
    }
    LabeledOperator cur(spaces_, x);
    for (const auto& [a, b] : pairs_) cur = cur - trace_replace(cur, a) + trace_replace(cur, b);
    return cur.matrix();
  }

  Matrix project(const Matrix& x) const {
    Matrix out = project_linear(x);
    const Complex tr = out.trace();
    out.diagonal().array() += (trace_target_ - tr) / static_cast<double>(dim_);
    return out;
  }

  /// Frobenius distance from x to the affine set.
  double distance(const Matrix& x) const { return (project(x) - x).norm(); }

 private:
  static constexpr Eigen::Index kDenseLimit = 16;

  void build_dense() {
    const Eigen::Index n = dim_ * dim_;
    auto dense = std::make_shared<Matrix>(n, n);
    for (Eigen::Index col = 0; col < n; ++col) {
      Matrix e = Matrix::Zero(dim_, dim_);
      e.data()[col] = 1.0;
      LabeledOperator cur(spaces_, e);
      for (const auto& [a, b] : pairs_)
        cur = cur - trace_replace(cur, a) + trace_replace(cur, b);
      dense->col(col) = Eigen::Map<const Vector>(cur.matrix().data(), n);
    }
    dense_ = std::move(dense);
  }

  std::vector<SpaceLabel> spaces_;
  std::vector<Tooth> teeth_;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs_;
  Eigen::Index dim_ = 1;
  double trace_target_ = 1.0;
  std::shared_ptr<const Matrix> dense_;
};

/// Restores positivity of an affine-feasible operator by mixing with the
/// uniform member of the set. Leaves PSD inputs unchanged.
inline Matrix mix_to_psd(const Matrix& x, const ChainAffineSet& set) {
  const double lmin = min_eigenvalue(x);
  if (lmin >= 0.0) return x;
  const double u = set.trace_target() / static_cast<double>(set.dim());
  const double t = -lmin / (u - lmin);
  return (1.0 - t) * x + t * set.uniform();
}

}  // namespace combkit
