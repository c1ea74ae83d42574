#pragma once

// First-order solver for linear problems over PSD blocks intersected with an
// affine set:
//
//     minimize  sum_i Re Tr[C_i X_i]   s.t.  X_i >= 0,  (X_1, ..., X_m) in A.
//
// The solver alternates the Frobenius projections onto the affine set and the
// PSD cone (ADMM / Douglas-Rachford splitting). Only the two projections are
// needed, so every constraint family in the library plugs in the same way.

#include "combkit/tensor.hpp"

#include <functional>

namespace combkit {

using Blocks = std::vector<Matrix>;

struct SdpProblem {
  Blocks cost;
  /// Frobenius projection onto the affine set, in place.
  std::function<void(Blocks&)> project_affine;
};

struct SdpOptions {
  double rho = 1.0;
  int max_iterations = 50000;
  double tolerance = 1e-10;  // on primal and dual residuals, per unit block size
};

struct SdpResult {
  Blocks x;  // PSD iterate
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

inline double blocks_inner(const Blocks& c, const Blocks& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += (c[i].adjoint() * x[i]).trace().real();
  return acc;
}

inline SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& opts = {},
                           Blocks warm_start = {}) {
  const std::size_t m = problem.cost.size();
  Blocks y = warm_start.empty() ? Blocks{} : std::move(warm_start);
  if (y.empty())
    for (const auto& c : problem.cost) y.push_back(Matrix::Zero(c.rows(), c.cols()));
  Blocks u, x(m), y_old(m);
  for (const auto& c : problem.cost) u.push_back(Matrix::Zero(c.rows(), c.cols()));

  double scale_c = 0.0;
  Eigen::Index total = 0;
  for (const auto& c : problem.cost) {
    scale_c = std::max(scale_c, c.norm());
    total += c.rows();
  }
  double rho = opts.rho * std::max(scale_c, 1e-3);
  const double eps = opts.tolerance * std::sqrt(static_cast<double>(total));

  SdpResult result;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    for (std::size_t i = 0; i < m; ++i)
      x[i] = hermitian_part(y[i] - u[i] - problem.cost[i] / rho);
    problem.project_affine(x);
    double r2 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      y_old[i] = y[i];
      y[i] = psd_part(x[i] + u[i]);
      u[i] += x[i] - y[i];
      r2 += (x[i] - y[i]).squaredNorm();
      s2 += (y[i] - y_old[i]).squaredNorm();
    }
    const double r = std::sqrt(r2), s = rho * std::sqrt(s2);
    result.iterations = it;
    result.primal_residual = r;
    result.dual_residual = s;
    if (r < eps && s < eps) {
      result.converged = true;
      break;
    }
    if (it % 10 == 0) {
      if (r > 10.0 * s) {
        rho *= 2.0;
        for (auto& ui : u) ui /= 2.0;
      } else if (s > 10.0 * r) {
        rho /= 2.0;
        for (auto& ui : u) ui *= 2.0;
      }
    }
  }
  result.x = std::move(y);
  result.objective = blocks_inner(problem.cost, result.x);
  return result;
}

}  // namespace combkit
