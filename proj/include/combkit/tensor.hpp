#pragma once

// Labeled tensor-product linear algebra.
//
// Every operator lives on an ordered list of labeled Hilbert-space factors.
// The first listed factor varies slowest in the row/column index, so the
// operator on spaces {a, b} has entries M[(i_a, i_b), (j_a, j_b)] stored at
// row i_a * d_b + i_b and column j_a * d_b + j_b.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace combkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPsdTol = 1e-9;
inline constexpr double kSupportTol = 1e-9;
inline constexpr double kEqualityTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnknownSpaceError : public Error {
 public:
  explicit UnknownSpaceError(int id)
      : Error("unknown space id " + std::to_string(id)), id_(id) {}
  int id() const { return id_; }

 private:
  int id_;
};

class NotPsdError : public Error {
 public:
  explicit NotPsdError(double eigenvalue)
      : Error("operator is not positive semidefinite: eigenvalue " +
              std::to_string(eigenvalue)),
        eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

class NotHermitianError : public Error {
 public:
  explicit NotHermitianError(double deviation)
      : Error("operator is not Hermitian: deviation " + std::to_string(deviation)) {}
};

enum class Role { input, output, ancilla, classical };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::input: return "input";
    case Role::output: return "output";
    case Role::ancilla: return "ancilla";
    case Role::classical: return "classical";
  }
  return "input";
}

struct SpaceLabel {
  int id = 0;
  int dim = 1;
  Role role = Role::input;

  friend bool operator==(const SpaceLabel&, const SpaceLabel&) = default;
};

namespace detail {

inline std::vector<std::size_t> strides_of(std::span<const SpaceLabel> spaces) {
  std::vector<std::size_t> strides(spaces.size(), 1);
  for (std::size_t i = spaces.size(); i-- > 1;)
    strides[i - 1] = strides[i] * static_cast<std::size_t>(spaces[i].dim);
  return strides;
}

// Linear offsets, in the full index space, of every multi-index over the
// factors at `positions` (enumerated with positions[0] slowest).
inline std::vector<Eigen::Index> subset_offsets(std::span<const SpaceLabel> spaces,
                                                std::span<const std::size_t> positions) {
  const auto strides = strides_of(spaces);
  std::vector<Eigen::Index> offsets{0};
  for (std::size_t p : positions) {
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * static_cast<std::size_t>(spaces[p].dim));
    for (Eigen::Index base : offsets)
      for (int k = 0; k < spaces[p].dim; ++k)
        next.push_back(base + static_cast<Eigen::Index>(k * strides[p]));
    offsets = std::move(next);
  }
  return offsets;
}

inline Eigen::Index total_dim(std::span<const SpaceLabel> spaces) {
  Eigen::Index d = 1;
  for (const auto& s : spaces) d *= s.dim;
  return d;
}

}  // namespace detail

/// Complex square matrix over an ordered list of labeled factors.
class LabeledOperator {
 public:
  LabeledOperator() : matrix_(Matrix::Ones(1, 1)) {}

  LabeledOperator(std::vector<SpaceLabel> spaces, Matrix matrix)
      : spaces_(std::move(spaces)), matrix_(std::move(matrix)) {
    for (std::size_t i = 0; i < spaces_.size(); ++i) {
      if (spaces_[i].dim < 1)
        throw DimensionError("space " + std::to_string(spaces_[i].id) +
                             " has non-positive dimension");
      for (std::size_t j = 0; j < i; ++j)
        if (spaces_[j].id == spaces_[i].id)
          throw DimensionError("duplicate space id " + std::to_string(spaces_[i].id));
    }
    const Eigen::Index d = detail::total_dim(spaces_);
    if (matrix_.rows() != d || matrix_.cols() != d)
      throw DimensionError("matrix is " + std::to_string(matrix_.rows()) + "x" +
                           std::to_string(matrix_.cols()) + ", spaces require " +
                           std::to_string(d));
  }

  static LabeledOperator identity(std::vector<SpaceLabel> spaces) {
    const Eigen::Index d = detail::total_dim(spaces);
    return {std::move(spaces), Matrix::Identity(d, d)};
  }

  static LabeledOperator scalar(Complex c) {
    Matrix m(1, 1);
    m(0, 0) = c;
    return {{}, std::move(m)};
  }

  const std::vector<SpaceLabel>& spaces() const { return spaces_; }
  const Matrix& matrix() const { return matrix_; }
  Eigen::Index dim() const { return matrix_.rows(); }

  std::vector<int> ids() const {
    std::vector<int> out;
    out.reserve(spaces_.size());
    for (const auto& s : spaces_) out.push_back(s.id);
    return out;
  }

  bool has(int id) const {
    return std::any_of(spaces_.begin(), spaces_.end(), [id](auto& s) { return s.id == id; });
  }

  std::size_t position(int id) const {
    for (std::size_t i = 0; i < spaces_.size(); ++i)
      if (spaces_[i].id == id) return i;
    throw UnknownSpaceError(id);
  }

  const SpaceLabel& space(int id) const { return spaces_[position(id)]; }

  Complex trace() const { return matrix_.trace(); }

 private:
  std::vector<SpaceLabel> spaces_;
  Matrix matrix_;
};

inline LabeledOperator operator+(const LabeledOperator& a, const LabeledOperator& b);
inline LabeledOperator operator-(const LabeledOperator& a, const LabeledOperator& b);
inline LabeledOperator operator*(Complex s, const LabeledOperator& a) {
  return {a.spaces(), s * a.matrix()};
}
inline LabeledOperator operator*(double s, const LabeledOperator& a) {
  return {a.spaces(), s * a.matrix()};
}

inline LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  for (const auto& s : b.spaces())
    if (a.has(s.id))
      throw DimensionError("tensor: overlapping space id " + std::to_string(s.id));
  std::vector<SpaceLabel> spaces = a.spaces();
  spaces.insert(spaces.end(), b.spaces().begin(), b.spaces().end());
  const Matrix& A = a.matrix();
  const Matrix& B = b.matrix();
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return {std::move(spaces), std::move(out)};
}

inline Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

/// Reorders the factors to `order` (a permutation of a's ids).
inline LabeledOperator permute(const LabeledOperator& a, std::span<const int> order) {
  if (order.size() != a.spaces().size())
    throw DimensionError("permute: order must list every space exactly once");
  std::vector<std::size_t> positions;
  std::vector<SpaceLabel> spaces;
  for (int id : order) {
    positions.push_back(a.position(id));
    spaces.push_back(a.space(id));
  }
  for (std::size_t i = 0; i < positions.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (positions[i] == positions[j])
        throw DimensionError("permute: repeated id " + std::to_string(order[i]));
  const auto off = detail::subset_offsets(a.spaces(), positions);
  const Matrix& m = a.matrix();
  const auto d = static_cast<Eigen::Index>(off.size());
  Matrix out(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) out(i, j) = m(off[i], off[j]);
  return {std::move(spaces), std::move(out)};
}

/// Factors sorted by ascending id.
inline LabeledOperator canonical(const LabeledOperator& a) {
  std::vector<int> ids = a.ids();
  std::sort(ids.begin(), ids.end());
  if (ids == a.ids()) return a;
  return permute(a, ids);
}

inline void require_same_spaces(const LabeledOperator& a, const LabeledOperator& b,
                                const char* what) {
  auto x = a.spaces(), y = b.spaces();
  auto by_id = [](const SpaceLabel& s, const SpaceLabel& t) { return s.id < t.id; };
  std::sort(x.begin(), x.end(), by_id);
  std::sort(y.begin(), y.end(), by_id);
  if (x.size() != y.size())
    throw DimensionError(std::string(what) + ": operators act on different spaces");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i].id != y[i].id || x[i].dim != y[i].dim)
      throw DimensionError(std::string(what) + ": operators act on different spaces");
}

/// b reordered to a's factor order.
inline LabeledOperator aligned_to(const LabeledOperator& b, const LabeledOperator& a) {
  require_same_spaces(a, b, "align");
  if (a.ids() == b.ids()) return b;
  const auto ids = a.ids();
  return permute(b, ids);
}

inline LabeledOperator operator+(const LabeledOperator& a, const LabeledOperator& b) {
  return {a.spaces(), a.matrix() + aligned_to(b, a).matrix()};
}

inline LabeledOperator operator-(const LabeledOperator& a, const LabeledOperator& b) {
  return {a.spaces(), a.matrix() - aligned_to(b, a).matrix()};
}

/// Frobenius distance after aligning factor orders.
inline double frobenius_distance(const LabeledOperator& a, const LabeledOperator& b) {
  return (a.matrix() - aligned_to(b, a).matrix()).norm();
}

inline LabeledOperator partial_trace(const LabeledOperator& a, std::span<const int> traced) {
  std::vector<std::size_t> kept_pos, traced_pos;
  for (int id : traced) traced_pos.push_back(a.position(id));
  std::vector<SpaceLabel> kept;
  for (std::size_t i = 0; i < a.spaces().size(); ++i) {
    if (std::find(traced_pos.begin(), traced_pos.end(), i) == traced_pos.end()) {
      kept_pos.push_back(i);
      kept.push_back(a.spaces()[i]);
    }
  }
  const auto ok = detail::subset_offsets(a.spaces(), kept_pos);
  const auto ot = detail::subset_offsets(a.spaces(), traced_pos);
  const Matrix& m = a.matrix();
  const auto dk = static_cast<Eigen::Index>(ok.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index c = 0; c < dk; ++c)
    for (Eigen::Index r = 0; r < dk; ++r) {
      Complex acc = 0;
      for (Eigen::Index t : ot) acc += m(ok[r] + t, ok[c] + t);
      out(r, c) = acc;
    }
  return {std::move(kept), std::move(out)};
}

inline LabeledOperator partial_trace(const LabeledOperator& a, std::initializer_list<int> ids) {
  return partial_trace(a, std::span<const int>(ids.begin(), ids.size()));
}

/// Transposition on the listed factors in the computational basis.
inline LabeledOperator partial_transpose(const LabeledOperator& a, std::span<const int> ids) {
  std::vector<std::size_t> tp, other;
  for (int id : ids) tp.push_back(a.position(id));
  for (std::size_t i = 0; i < a.spaces().size(); ++i)
    if (std::find(tp.begin(), tp.end(), i) == tp.end()) other.push_back(i);
  const auto os = detail::subset_offsets(a.spaces(), tp);
  const auto oo = detail::subset_offsets(a.spaces(), other);
  const Matrix& m = a.matrix();
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index rs : os)
    for (Eigen::Index cs : os)
      for (Eigen::Index ro : oo)
        for (Eigen::Index co : oo) out(cs + ro, rs + co) = m(rs + ro, cs + co);
  return {a.spaces(), std::move(out)};
}

inline LabeledOperator partial_transpose(const LabeledOperator& a,
                                         std::initializer_list<int> ids) {
  return partial_transpose(a, std::span<const int>(ids.begin(), ids.size()));
}

inline LabeledOperator transpose(const LabeledOperator& a) {
  return {a.spaces(), a.matrix().transpose()};
}

/// `a` tensored with identities on the spaces of `target` it lacks, laid out
/// in target's factor order.
inline LabeledOperator lift(const LabeledOperator& a, std::span<const SpaceLabel> target) {
  std::vector<SpaceLabel> extra;
  for (const auto& s : target) {
    if (a.has(s.id)) {
      if (a.space(s.id).dim != s.dim)
        throw DimensionError("lift: dimension mismatch on space " + std::to_string(s.id));
    } else {
      extra.push_back(s);
    }
  }
  if (target.size() != a.spaces().size() + extra.size())
    throw DimensionError("lift: operator has spaces outside the target");
  LabeledOperator full = extra.empty() ? a : tensor(a, LabeledOperator::identity(extra));
  std::vector<int> order;
  for (const auto& s : target) order.push_back(s.id);
  return full.ids() == order ? full : permute(full, order);
}

/// Link product: Tr_shared[(a ⊗ I)(I ⊗ b^{τ_shared})]. Result factors are a's
/// unshared spaces followed by b's unshared spaces.
inline LabeledOperator link_product(const LabeledOperator& a, const LabeledOperator& b) {
  std::vector<int> a_only, shared, b_only;
  std::vector<SpaceLabel> out_spaces;
  for (const auto& s : a.spaces()) {
    if (b.has(s.id)) {
      if (b.space(s.id).dim != s.dim)
        throw DimensionError("link_product: dimension mismatch on shared space " +
                             std::to_string(s.id));
      shared.push_back(s.id);
    } else {
      a_only.push_back(s.id);
      out_spaces.push_back(s);
    }
  }
  for (const auto& s : b.spaces())
    if (!a.has(s.id)) {
      b_only.push_back(s.id);
      out_spaces.push_back(s);
    }

  std::vector<int> a_order = a_only, b_order = shared;
  a_order.insert(a_order.end(), shared.begin(), shared.end());
  b_order.insert(b_order.end(), b_only.begin(), b_only.end());
  const LabeledOperator ap = a.ids() == a_order ? a : permute(a, a_order);
  const LabeledOperator bp = b.ids() == b_order ? b : permute(b, b_order);

  Eigen::Index dx = 1, ds = 1, dy = 1;
  for (int id : a_only) dx *= a.space(id).dim;
  for (int id : shared) ds *= a.space(id).dim;
  for (int id : b_only) dy *= b.space(id).dim;

  // out[x y, x' y'] = sum_{s, s'} a[x s, x' s'] b[s y, s' y']
  Matrix A(dx * dx, ds * ds), B(ds * ds, dy * dy);
  const Matrix& am = ap.matrix();
  const Matrix& bm = bp.matrix();
  for (Eigen::Index x = 0; x < dx; ++x)
    for (Eigen::Index xp = 0; xp < dx; ++xp)
      for (Eigen::Index s = 0; s < ds; ++s)
        for (Eigen::Index sp = 0; sp < ds; ++sp)
          A(x * dx + xp, s * ds + sp) = am(x * ds + s, xp * ds + sp);
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index sp = 0; sp < ds; ++sp)
      for (Eigen::Index y = 0; y < dy; ++y)
        for (Eigen::Index yp = 0; yp < dy; ++yp)
          B(s * ds + sp, y * dy + yp) = bm(s * dy + y, sp * dy + yp);
  const Matrix C = A * B;
  Matrix out(dx * dy, dx * dy);
  for (Eigen::Index x = 0; x < dx; ++x)
    for (Eigen::Index xp = 0; xp < dx; ++xp)
      for (Eigen::Index y = 0; y < dy; ++y)
        for (Eigen::Index yp = 0; yp < dy; ++yp)
          out(x * dy + y, xp * dy + yp) = C(x * dx + xp, y * dy + yp);
  return {std::move(out_spaces), std::move(out)};
}

// ---------------------------------------------------------------------------
// Spectral helpers on bare matrices.

inline double hermitian_deviation(const Matrix& m) {
  const double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() / scale;
}

inline Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

struct Eigensystem {
  Eigen::VectorXd values;  // ascending
  Matrix vectors;
};

inline Eigensystem eigh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return eigh(m).values(0);
}

/// PSD square root; eigenvalues in [-tol, 0) are clamped to zero.
inline Matrix psd_sqrt(const Matrix& m, double tol = kPsdTol) {
  if (hermitian_deviation(m) > 1e-8) throw NotHermitianError(hermitian_deviation(m));
  const auto es = eigh(m);
  if (es.values.size() > 0 && es.values(0) < -tol) throw NotPsdError(es.values(0));
  Eigen::VectorXd s = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * s.asDiagonal() * es.vectors.adjoint();
}

/// Inverse square root on the support; eigenvalues <= support_tol * lambda_max
/// are treated as kernel.
inline Matrix pinv_sqrt(const Matrix& m, double support_tol = kSupportTol) {
  if (hermitian_deviation(m) > 1e-8) throw NotHermitianError(hermitian_deviation(m));
  const auto es = eigh(m);
  if (es.values.size() == 0) return m;
  const double lmax = std::max(es.values.maxCoeff(), 0.0);
  const double cut = support_tol * lmax;
  if (es.values(0) < -std::max(cut, kPsdTol)) throw NotPsdError(es.values(0));
  Eigen::VectorXd s(es.values.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    s(i) = es.values(i) > cut && es.values(i) > 0 ? 1.0 / std::sqrt(es.values(i)) : 0.0;
  return es.vectors * s.asDiagonal() * es.vectors.adjoint();
}

inline double trace_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

/// Orthonormal basis of the support of a Hermitian matrix (columns).
struct Support {
  Matrix basis;       // D x r isometry embedding the support
  Matrix compressed;  // r x r, basis^dagger * m * basis
  Matrix projector;   // D x D
  Eigen::Index rank() const { return basis.cols(); }
};

inline Support compress_to_support(const Matrix& m, double support_tol = kSupportTol) {
  if (hermitian_deviation(m) > 1e-8) throw NotHermitianError(hermitian_deviation(m));
  const auto es = eigh(m);
  const double lmax = es.values.size() ? es.values.cwiseAbs().maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = es.values.size(); i-- > 0;)
    if (std::abs(es.values(i)) > support_tol * lmax && lmax > 0) keep.push_back(i);
  Matrix basis(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    basis.col(static_cast<Eigen::Index>(k)) = es.vectors.col(keep[k]);
  Matrix compressed = basis.adjoint() * m * basis;
  Matrix projector = basis * basis.adjoint();
  return {std::move(basis), std::move(compressed), std::move(projector)};
}

// LabeledOperator overloads.

inline LabeledOperator psd_sqrt(const LabeledOperator& a, double tol = kPsdTol) {
  return {a.spaces(), psd_sqrt(a.matrix(), tol)};
}

inline LabeledOperator pinv_sqrt(const LabeledOperator& a, double support_tol = kSupportTol) {
  return {a.spaces(), pinv_sqrt(a.matrix(), support_tol)};
}

inline double trace_norm(const LabeledOperator& a) { return trace_norm(a.matrix()); }

inline Support compress_to_support(const LabeledOperator& a,
                                   double support_tol = kSupportTol) {
  return compress_to_support(a.matrix(), support_tol);
}

inline bool is_psd(const Matrix& m, double tol = kPsdTol) {
  return hermitian_deviation(m) <= 1e-8 && min_eigenvalue(m) >= -tol;
}

inline void require_psd(const Matrix& m, double tol = kPsdTol) {
  if (hermitian_deviation(m) > 1e-8) throw NotHermitianError(hermitian_deviation(m));
  const double lmin = min_eigenvalue(m);
  if (lmin < -tol) throw NotPsdError(lmin);
}

/// Projection onto the PSD cone in Frobenius norm.
inline Matrix psd_part(const Matrix& m) {
  const auto es = eigh(m);
  Eigen::VectorXd s = es.values.cwiseMax(0.0);
  return es.vectors * s.asDiagonal() * es.vectors.adjoint();
}

}  // namespace combkit
