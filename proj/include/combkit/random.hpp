#pragma once

// Seeded random states, channels and operators.

#include "combkit/tensor.hpp"

#include <random>

namespace combkit {

using Rng = std::mt19937_64;

inline Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = Complex(re, im);
    }
  return m;
}

/// Haar-random isometry with `rows` >= `cols` (QR with phase fix).
inline Matrix random_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const Matrix g = random_gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

inline Matrix random_unitary(Eigen::Index d, Rng& rng) { return random_isometry(d, d, rng); }

inline Matrix random_hermitian(Eigen::Index d, Rng& rng) {
  const Matrix g = random_gaussian(d, d, rng);
  return 0.5 * (g + g.adjoint());
}

/// Random PSD matrix of the given rank with unit trace.
inline Matrix random_density(Eigen::Index d, Eigen::Index rank, Rng& rng) {
  const Matrix g = random_gaussian(d, std::max<Eigen::Index>(rank, 1), rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Vector random_pure(Eigen::Index d, Rng& rng) {
  Vector v = random_gaussian(d, 1, rng).col(0);
  return v / v.norm();
}

/// Kraus operators (each out x in) of a random channel with `count` operators.
inline std::vector<Matrix> random_kraus(Eigen::Index in, Eigen::Index out, int count, Rng& rng) {
  const Matrix v = random_isometry(out * count, in, rng);
  std::vector<Matrix> kraus;
  for (int k = 0; k < count; ++k) kraus.push_back(v.block(k * out, 0, out, in));
  return kraus;
}

}  // namespace combkit
