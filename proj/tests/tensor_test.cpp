#include "combkit/tensor.hpp"

#include <gtest/gtest.h>

#include "combkit/random.hpp"
#include "test_util.hpp"

using namespace combkit;
using combkit::testing::random_psd;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

LabeledOperator on(std::vector<SpaceLabel> spaces, Matrix m) { return {std::move(spaces), std::move(m)}; }

// Entry (row multi-index, col multi-index) for factors in the stored order.
Complex entry(const LabeledOperator& a, std::span<const int> row, std::span<const int> col) {
  Eigen::Index r = 0, c = 0;
  for (std::size_t i = 0; i < a.spaces().size(); ++i) {
    r = r * a.spaces()[i].dim + row[i];
    c = c * a.spaces()[i].dim + col[i];
  }
  return a.matrix()(r, c);
}

}  // namespace

TEST(tensor, rejects_bad_dimensions) {
  EXPECT_THROW(LabeledOperator({{0, 2, Role::input}}, Matrix::Identity(3, 3)), DimensionError);
  EXPECT_THROW(LabeledOperator({{0, 0, Role::input}}, Matrix::Identity(0, 0)), DimensionError);
  EXPECT_THROW(LabeledOperator({{0, 2, Role::input}, {0, 1, Role::input}}, Matrix::Identity(2, 2)),
               DimensionError);
}

TEST(tensor, kronecker_identity_and_diagonal) {
  const auto a = LabeledOperator::identity({{0, 2, Role::input}});
  const auto b = LabeledOperator::identity({{1, 3, Role::output}});
  EXPECT_LT((tensor(a, b).matrix() - Matrix::Identity(6, 6)).norm(), 1e-15);

  const auto d1 = on({{0, 2, Role::input}}, diag({1, 2}));
  const auto d2 = on({{1, 2, Role::output}}, diag({1, 0}));
  EXPECT_LT((tensor(d1, d2).matrix() - diag({1, 0, 2, 0})).norm(), 1e-15);
}

TEST(tensor, kronecker_entry_oracle) {
  Rng rng(1);
  const auto a = on({{0, 2, Role::input}}, random_gaussian(2, 2, rng));
  const auto b = on({{1, 2, Role::output}}, random_gaussian(2, 2, rng));
  const auto ab = tensor(a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const std::array<int, 2> row{i, k}, col{j, l};
          EXPECT_LT(std::abs(entry(ab, row, col) - a.matrix()(i, j) * b.matrix()(k, l)), 1e-14);
        }
}

TEST(tensor, overlapping_ids_rejected) {
  const auto a = LabeledOperator::identity({{0, 2, Role::input}});
  EXPECT_THROW(tensor(a, a), DimensionError);
}

TEST(partial_trace, maximally_entangled_marginal) {
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const auto op = on({{0, 2, Role::input}, {1, 2, Role::output}}, phi * phi.adjoint());
  const auto m = partial_trace(op, {1});
  EXPECT_EQ(m.ids(), std::vector<int>{0});
  EXPECT_LT((m.matrix() - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(partial_trace, full_trace_is_scalar) {
  Rng rng(2);
  const auto op = on({{0, 2, Role::input}, {1, 3, Role::output}}, random_gaussian(6, 6, rng));
  const auto s = partial_trace(op, {0, 1});
  EXPECT_EQ(s.dim(), 1);
  EXPECT_LT(std::abs(s.matrix()(0, 0) - op.trace()), 1e-13);
}

TEST(partial_trace, middle_factor_index_sum_oracle) {
  Rng rng(3);
  const std::vector<SpaceLabel> spaces{{0, 2, Role::input}, {1, 3, Role::output}, {2, 2, Role::input}};
  const auto op = on(spaces, random_psd(12, rng));
  const auto red = partial_trace(op, {1});
  ASSERT_EQ(red.ids(), (std::vector<int>{0, 2}));
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) {
          Complex acc = 0;
          for (int m = 0; m < 3; ++m) {
            const std::array<int, 3> row{i, m, k}, col{j, m, l};
            acc += entry(op, row, col);
          }
          EXPECT_LT(std::abs(red.matrix()(i * 2 + k, j * 2 + l) - acc), 1e-12);
        }
  EXPECT_LT(std::abs(red.trace() - op.trace()), 1e-12);
}

TEST(partial_trace, unknown_id_rejected) {
  const auto a = LabeledOperator::identity({{0, 2, Role::input}});
  EXPECT_THROW(partial_trace(a, {5}), UnknownSpaceError);
  EXPECT_THROW(partial_transpose(a, {5}), UnknownSpaceError);
}

TEST(partial_transpose, full_transpose_of_hermitian_is_conjugate) {
  Rng rng(4);
  const auto h = on({{0, 2, Role::input}, {1, 2, Role::output}}, random_hermitian(4, rng));
  const auto t = partial_transpose(h, {0, 1});
  EXPECT_LT((t.matrix() - h.matrix().conjugate()).norm(), 1e-14);
}

TEST(partial_transpose, involution_and_trace) {
  Rng rng(5);
  const auto h = on({{0, 2, Role::input}, {1, 3, Role::output}, {2, 2, Role::input}},
                    random_hermitian(12, rng));
  const auto t = partial_transpose(h, {1});
  EXPECT_LT((partial_transpose(t, {1}).matrix() - h.matrix()).norm(), 1e-14);
  EXPECT_LT(hermitian_deviation(t.matrix()), 1e-14);
  EXPECT_LT(std::abs(t.trace() - h.trace()), 1e-13);
}

TEST(partial_transpose, maximally_entangled_gives_swap) {
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1.0;
  const auto op = on({{0, 2, Role::input}, {1, 2, Role::output}}, phi * phi.adjoint());
  const auto t = partial_transpose(op, {1});
  // SWAP |ab> = |ba>, by index enumeration.
  Matrix swap = Matrix::Zero(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) swap(b * 2 + a, a * 2 + b) = 1;
  EXPECT_LT((t.matrix() - swap).norm(), 1e-15);
}

TEST(permute, similarity_invariants) {
  Rng rng(6);
  const auto h = on({{0, 2, Role::input}, {1, 3, Role::output}, {2, 2, Role::input}},
                    random_hermitian(12, rng));
  const std::array<int, 3> order{2, 0, 1};
  const auto p = permute(h, order);
  EXPECT_EQ(p.ids(), (std::vector<int>{2, 0, 1}));
  EXPECT_LT(std::abs(p.trace() - h.trace()), 1e-13);
  EXPECT_NEAR(trace_norm(p), trace_norm(h), 1e-10);
  EXPECT_LT((eigh(p.matrix()).values - eigh(h.matrix()).values).norm(), 1e-10);
  EXPECT_LT(frobenius_distance(canonical(p), h), 1e-14);
}

TEST(partial_trace, of_tensor_product_property) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int da = 1 + trial % 3, db = 1 + (trial / 3) % 3;
    const auto a = on({{0, da, Role::input}, {3, 2, Role::output}}, random_gaussian(2 * da, 2 * da, rng));
    const auto b = on({{1, db, Role::input}}, random_gaussian(db, db, rng));
    const std::array<int, 1> ids{1};
    const auto red = partial_trace(tensor(a, b), ids);
    EXPECT_LT((red.matrix() - b.trace() * a.matrix()).norm(), 1e-12 * (1 + a.matrix().norm()));
  }
}

TEST(psd_sqrt, known_values) {
  const auto one = on({{0, 2, Role::input}}, Matrix::Identity(2, 2));
  EXPECT_LT((psd_sqrt(one).matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LT((psd_sqrt(diag({4, 9})) - diag({2, 3})).norm(), 1e-14);
}

TEST(psd_sqrt, squares_back_on_random_psd) {
  Rng rng(8);
  for (int d : {2, 5, 16}) {
    const Matrix a = random_psd(d, rng);
    const Matrix s = psd_sqrt(a);
    EXPECT_LT((s * s - a).norm() / a.norm(), 1e-10);
    EXPECT_GE(min_eigenvalue(s), -1e-12);
  }
}

TEST(psd_sqrt, negative_eigenvalue_reported) {
  try {
    psd_sqrt(diag({1, -0.5}));
    FAIL() << "expected NotPsdError";
  } catch (const NotPsdError& e) {
    EXPECT_NEAR(e.eigenvalue(), -0.5, 1e-14);
  }
  // Tiny negative eigenvalues within tolerance are clamped.
  EXPECT_LT((psd_sqrt(diag({1, -1e-12})) - diag({1, 0})).norm(), 1e-14);
}

TEST(pinv_sqrt, known_values_and_support_identity) {
  EXPECT_LT((pinv_sqrt(diag({4, 0})) - diag({0.5, 0})).norm(), 1e-15);
  EXPECT_LT((pinv_sqrt(Matrix(Matrix::Identity(3, 3))) - Matrix::Identity(3, 3)).norm(), 1e-15);
  Rng rng(9);
  const Matrix g = random_gaussian(6, 3, rng);
  const Matrix a = g * g.adjoint();
  const Matrix p = pinv_sqrt(a);
  const Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(6, 3);
  EXPECT_LT((p * a * p - q * q.adjoint()).norm(), 1e-9);
}

TEST(trace_norm, known_values_and_svd_cross_check) {
  EXPECT_NEAR(trace_norm(diag({1, -1})), 2.0, 1e-15);
  Rng rng(10);
  const Matrix a = random_psd(4, rng);
  EXPECT_NEAR(trace_norm(a), a.trace().real(), 1e-10);
  const Matrix h = random_hermitian(5, rng);
  EXPECT_NEAR(trace_norm(h), eigh(h).values.cwiseAbs().sum(), 1e-10);
}

TEST(compress_to_support, basic_cases) {
  const Support s = compress_to_support(diag({1, 0}));
  ASSERT_EQ(s.rank(), 1);
  EXPECT_NEAR(std::abs(s.basis(0, 0)), 1.0, 1e-15);
  const Support full = compress_to_support(diag({1, 2, 3}));
  EXPECT_LT((full.projector - Matrix::Identity(3, 3)).norm(), 1e-14);
  Rng rng(11);
  const Matrix g = random_gaussian(4, 2, rng);
  const Matrix a = g * g.adjoint();
  const Support r = compress_to_support(a);
  ASSERT_EQ(r.rank(), 2);
  EXPECT_LT((r.basis * r.compressed * r.basis.adjoint() - a).norm(), 1e-12);
  EXPECT_LT((r.basis.adjoint() * r.basis - Matrix::Identity(2, 2)).norm(), 1e-13);
  EXPECT_THROW(compress_to_support(random_gaussian(3, 3, rng)), NotHermitianError);
}

TEST(link_product, no_shared_spaces_is_tensor) {
  Rng rng(12);
  const auto a = on({{0, 2, Role::input}}, random_gaussian(2, 2, rng));
  const auto b = on({{1, 3, Role::output}}, random_gaussian(3, 3, rng));
  EXPECT_LT(frobenius_distance(link_product(a, b), tensor(a, b)), 1e-14);
}

TEST(link_product, shared_dimension_mismatch_rejected) {
  const auto a = LabeledOperator::identity({{0, 2, Role::input}});
  const auto b = LabeledOperator::identity({{0, 3, Role::input}});
  EXPECT_THROW(link_product(a, b), DimensionError);
}

TEST(link_product, definition_oracle) {
  // Tr_shared[(a ⊗ I)(I ⊗ b^τ_shared)] computed literally with lift.
  Rng rng(13);
  const auto a = on({{0, 2, Role::input}, {5, 3, Role::ancilla}}, random_gaussian(6, 6, rng));
  const auto b = on({{5, 3, Role::ancilla}, {1, 2, Role::output}}, random_gaussian(6, 6, rng));
  const std::vector<SpaceLabel> all{{0, 2, Role::input}, {5, 3, Role::ancilla}, {1, 2, Role::output}};
  const std::array<int, 1> shared{5};
  const Matrix prod = lift(a, all).matrix() * lift(partial_transpose(b, shared), all).matrix();
  const auto expect = partial_trace(LabeledOperator(all, prod), shared);
  EXPECT_LT(frobenius_distance(link_product(a, b), expect), 1e-12);
}
