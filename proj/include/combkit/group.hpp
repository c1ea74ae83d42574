#pragma once

// Finite groups given by multiplication tables, unitary representations
// assigned per network space, and a small library of groups and reps.

#include "combkit/tensor.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <numeric>

namespace combkit {

class GroupError : public Error {
 public:
  using Error::Error;
};

class FiniteGroup {
 public:
  FiniteGroup() : FiniteGroup(std::vector<std::vector<int>>{{0}}, "trivial") {}

  /// Validates the table exhaustively: closure, identity, inverses and
  /// associativity.
  explicit FiniteGroup(std::vector<std::vector<int>> table, std::string name = "")
      : table_(std::move(table)), name_(std::move(name)) {
    const int n = order();
    if (n == 0) throw GroupError("group table is empty");
    for (int a = 0; a < n; ++a) {
      if (static_cast<int>(table_[a].size()) != n)
        throw GroupError("group table row " + std::to_string(a) + " has " +
                         std::to_string(table_[a].size()) + " entries, expected " + std::to_string(n));
      for (int b = 0; b < n; ++b)
        if (table_[a][b] < 0 || table_[a][b] >= n)
          throw GroupError("group table entry (" + std::to_string(a) + "," + std::to_string(b) +
                           ") out of range");
    }
    identity_ = -1;
    for (int e = 0; e < n && identity_ < 0; ++e) {
      bool ok = true;
      for (int a = 0; a < n && ok; ++a) ok = table_[e][a] == a && table_[a][e] == a;
      if (ok) identity_ = e;
    }
    if (identity_ < 0) throw GroupError("group table has no identity element");
    inverse_.assign(n, -1);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b)
        if (table_[a][b] == identity_ && table_[b][a] == identity_) inverse_[a] = b;
      if (inverse_[a] < 0) throw GroupError("element " + std::to_string(a) + " has no inverse");
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (table_[table_[a][b]][c] != table_[a][table_[b][c]])
            throw GroupError("group table is not associative at (" + std::to_string(a) + "," +
                             std::to_string(b) + "," + std::to_string(c) + ")");
  }

  int order() const { return static_cast<int>(table_.size()); }
  int identity() const { return identity_; }
  int mul(int a, int b) const { return table_[a][b]; }
  int inverse(int a) const { return inverse_[a]; }
  const std::vector<std::vector<int>>& table() const { return table_; }
  const std::string& name() const { return name_; }

 private:
  std::vector<std::vector<int>> table_;
  std::vector<int> inverse_;
  int identity_ = 0;
  std::string name_;
};

/// Unitary matrices U_g for every group element, indexed by element.
using SingleRep = std::vector<Matrix>;

/// Representation residuals: max ‖U_g^dag U_g - I‖ and max ‖U_gh - U_g U_h‖.
struct RepCheck {
  double unitarity = 0.0;
  double homomorphism = 0.0;
  bool ok(double tol) const { return unitarity <= tol && homomorphism <= tol; }
};

inline RepCheck check_rep(const FiniteGroup& g, const SingleRep& u) {
  if (static_cast<int>(u.size()) != g.order())
    throw GroupError("representation has " + std::to_string(u.size()) + " matrices for a group of order " +
                     std::to_string(g.order()));
  RepCheck r;
  const Eigen::Index d = u.front().rows();
  for (const auto& m : u)
    if (m.rows() != d || m.cols() != d) throw GroupError("representation matrices differ in shape");
  for (const auto& m : u) r.unitarity = std::max(r.unitarity, (m.adjoint() * m - Matrix::Identity(d, d)).norm());
  for (int a = 0; a < g.order(); ++a)
    for (int b = 0; b < g.order(); ++b)
      r.homomorphism = std::max(r.homomorphism, (u[g.mul(a, b)] - u[a] * u[b]).norm());
  return r;
}

/// A group with unitary reps attached to network spaces by id. Spaces
/// without an entry carry the trivial representation.
class Representation {
 public:
  Representation() = default;
  explicit Representation(FiniteGroup group) : group_(std::move(group)) {}

  const FiniteGroup& group() const { return group_; }

  /// Attaches a rep to a space; validates unitarity and the homomorphism law.
  Representation& set(int space_id, SingleRep u, double tol = 1e-9) {
    const RepCheck c = check_rep(group_, u);
    if (c.unitarity > tol)
      throw GroupError("space " + std::to_string(space_id) + ": matrix not unitary (residual " +
                       std::to_string(c.unitarity) + ")");
    if (c.homomorphism > tol)
      throw GroupError("space " + std::to_string(space_id) + ": not a homomorphism (residual " +
                       std::to_string(c.homomorphism) + "); projective representations are not supported");
    maps_[space_id] = std::move(u);
    return *this;
  }

  bool has(int space_id) const { return maps_.count(space_id) > 0; }
  const std::map<int, SingleRep>& maps() const { return maps_; }

  /// U_{g,j}, or the identity of dimension `dim` for spaces without an entry.
  Matrix unitary(int g, int space_id, Eigen::Index dim) const {
    const auto it = maps_.find(space_id);
    if (it == maps_.end()) return Matrix::Identity(dim, dim);
    if (it->second[g].rows() != dim)
      throw DimensionError("space " + std::to_string(space_id) + " has dimension " + std::to_string(dim) +
                           " but its representation has dimension " +
                           std::to_string(it->second[g].rows()));
    return it->second[g];
  }

 private:
  FiniteGroup group_;
  std::map<int, SingleRep> maps_;
};

// ---------------------------------------------------------------------------
// Group library

inline FiniteGroup cyclic_group(int d) {
  if (d < 1) throw GroupError("cyclic group order must be positive");
  std::vector<std::vector<int>> t(d, std::vector<int>(d));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) t[a][b] = (a + b) % d;
  return FiniteGroup(std::move(t), "Z" + std::to_string(d));
}

/// Dihedral group of order 2n; element f*n + k stands for r^k s^f.
inline FiniteGroup dihedral_group(int n) {
  if (n < 1) throw GroupError("dihedral group needs n >= 1");
  const int m = 2 * n;
  std::vector<std::vector<int>> t(m, std::vector<int>(m));
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y) {
      const int a = x % n, f = x / n, b = y % n, g = y / n;
      const int k = ((f == 0 ? a + b : a - b) % n + n) % n;
      t[x][y] = ((f + g) % 2) * n + k;
    }
  return FiniteGroup(std::move(t), "D" + std::to_string(n));
}

/// All permutations of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> permutations(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

/// Symmetric group on n letters; (p q)(i) = p(q(i)).
inline FiniteGroup symmetric_group(int n) {
  const auto perms = permutations(n);
  const int m = static_cast<int>(perms.size());
  std::vector<std::vector<int>> t(m, std::vector<int>(m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      std::vector<int> c(n);
      for (int i = 0; i < n; ++i) c[i] = perms[a][perms[b][i]];
      t[a][b] = static_cast<int>(std::find(perms.begin(), perms.end(), c) - perms.begin());
    }
  return FiniteGroup(std::move(t), "S" + std::to_string(n));
}

/// Z2 x Z2 with element 2a + b.
inline FiniteGroup klein_group() {
  std::vector<std::vector<int>> t(4, std::vector<int>(4));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) t[x][y] = x ^ y;
  return FiniteGroup(std::move(t), "Z2xZ2");
}

/// Looks up a library group by name: Z<d>, D<n>, S3, Klein (or Z2xZ2).
inline FiniteGroup group_by_name(const std::string& name) {
  auto number = [&](std::size_t from) {
    const std::string digits = name.substr(from);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw GroupError("unknown group '" + name + "'");
    return std::stoi(digits);
  };
  if (name == "Klein" || name == "Z2xZ2") return klein_group();
  if (name == "trivial") return FiniteGroup();
  if (name.size() > 1 && name[0] == 'Z') return cyclic_group(number(1));
  if (name.size() > 1 && name[0] == 'D') return dihedral_group(number(1));
  if (name.size() > 1 && name[0] == 'S') {
    const int n = number(1);
    if (n > 5) throw GroupError("symmetric groups above S5 are not supported");
    return symmetric_group(n);
  }
  throw GroupError("unknown group '" + name + "'");
}

// ---------------------------------------------------------------------------
// Representation library

/// Z_d rep diag(ω^{q_0 g}, ..., ω^{q_{m-1} g}) with ω = exp(2πi/d).
inline SingleRep character_rep(int d, std::span<const int> charges) {
  SingleRep u;
  for (int g = 0; g < d; ++g) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(charges.size()), static_cast<Eigen::Index>(charges.size()));
    for (std::size_t j = 0; j < charges.size(); ++j)
      m(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * charges[j] * g / d);
    u.push_back(std::move(m));
  }
  return u;
}

/// Qubit phase rep diag(1, ω^g) of Z_d.
inline SingleRep qubit_phase_rep(int d) {
  const std::array<int, 2> q{0, 1};
  return character_rep(d, q);
}

/// Left regular rep U_g|h> = |gh>.
inline SingleRep regular_rep(const FiniteGroup& g) {
  const int n = g.order();
  SingleRep u;
  for (int a = 0; a < n; ++a) {
    Matrix m = Matrix::Zero(n, n);
    for (int h = 0; h < n; ++h) m(g.mul(a, h), h) = 1;
    u.push_back(std::move(m));
  }
  return u;
}

/// Two-dimensional rep of the dihedral group: r rotates by 2π/n, s reflects.
inline SingleRep dihedral_rep(int n) {
  SingleRep u;
  Matrix s(2, 2);
  s << 1, 0, 0, -1;
  for (int f = 0; f < 2; ++f)
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * k / n;
      Matrix r(2, 2);
      r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      u.push_back(f == 0 ? r : Matrix(r * s));
    }
  return u;
}

/// Permutation rep of S_n on C^n: U_p|i> = |p(i)>.
inline SingleRep permutation_rep(int n) {
  SingleRep u;
  for (const auto& p : permutations(n)) {
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(p[i], i) = 1;
    u.push_back(std::move(m));
  }
  return u;
}

/// Pauli conjugation action of Z2 x Z2 on C^2 ⊗ C^2: σ_g ⊗ σ_g^*, with
/// σ_{2a+b} = X^a Z^b. The Paulis alone are projective; the pair is not.
inline SingleRep pauli_conjugation_rep() {
  Matrix x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  const Matrix id = Matrix::Identity(2, 2);
  SingleRep u;
  for (int g = 0; g < 4; ++g) {
    const Matrix s = (g & 2 ? x : id) * (g & 1 ? z : id);
    u.push_back(kron(s, s.conjugate()));
  }
  return u;
}

/// Tensor power U_g^{⊗n} (n = 0 gives the 1-dim trivial rep).
inline SingleRep tensor_power(const SingleRep& u, int n) {
  SingleRep out;
  for (const auto& m : u) {
    Matrix acc = Matrix::Ones(1, 1);
    for (int k = 0; k < n; ++k) acc = kron(acc, m);
    out.push_back(std::move(acc));
  }
  return out;
}

inline SingleRep conjugate_rep(const SingleRep& u) {
  SingleRep out;
  for (const auto& m : u) out.push_back(m.conjugate());
  return out;
}

inline SingleRep tensor_reps(const SingleRep& a, const SingleRep& b) {
  SingleRep out;
  for (std::size_t g = 0; g < a.size(); ++g) out.push_back(kron(a[g], b[g]));
  return out;
}

inline SingleRep trivial_rep(const FiniteGroup& g, Eigen::Index dim) {
  return SingleRep(g.order(), Matrix::Identity(dim, dim));
}

inline std::vector<Complex> character(const SingleRep& u) {
  std::vector<Complex> chi;
  for (const auto& m : u) chi.push_back(m.trace());
  return chi;
}

}  // namespace combkit
