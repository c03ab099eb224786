// Gaussian-random-field scoring for a single category: minimize
// (f - y)' Sigma (f - y) + f' L f, i.e. solve (Sigma + L) f = Sigma y with
// conjugate gradients. The system matrix is applied matrix-free as
// (sigma + degree) .* x - W x.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hierprop/error.hpp"
#include "hierprop/network.hpp"

namespace hierprop {

struct SolverSettings {
  double tolerance = 1e-8;  // relative residual bound
  int max_iterations = 0;   // 0 -> 10 * n
  Eigen::VectorXd sigma;    // per-gene precisions; empty -> all ones
};

struct DiscriminantVector {
  std::vector<std::string> gene_ids;
  Eigen::VectorXd scores;
};

struct DiscriminantMatrix {
  std::vector<std::string> gene_ids;
  std::vector<std::string> category_ids;
  Eigen::MatrixXd scores;  // n x d
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0;
};

/// Conjugate gradients on a symmetric positive definite operator.
/// Stops when ||b - A x|| / ||b|| <= tolerance (verified against the true
/// residual, not just the CG recurrence). A zero right-hand side returns
/// the zero vector.
template <typename ApplyA>
CgResult cg_solve(ApplyA&& apply_a, const Eigen::VectorXd& b,
                  const SolverSettings& settings,
                  const Eigen::VectorXd& warm_start = {}) {
  if (settings.tolerance <= 0) {
    throw InvalidInputError("cg_solve: tolerance must be positive");
  }
  const int n = static_cast<int>(b.size());
  const int max_iterations =
      settings.max_iterations > 0 ? settings.max_iterations : 10 * n;
  if (max_iterations < 1) {
    throw InvalidInputError("cg_solve: max_iterations must be >= 1");
  }

  const double b_norm = b.norm();
  if (b_norm == 0) {
    return {Eigen::VectorXd::Zero(n), 0, 0.0};
  }

  Eigen::VectorXd x = warm_start.size() == n
                          ? warm_start
                          : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b - apply_a(x);
  double residual = r.norm() / b_norm;
  if (residual <= settings.tolerance) {
    return {std::move(x), 0, residual};
  }

  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd ap = apply_a(p);
    const double p_ap = p.dot(ap);
    if (!(p_ap > 0)) {
      throw InvalidInputError("cg_solve: operator is not positive definite");
    }
    const double alpha = rs / p_ap;
    x += alpha * p;
    r -= alpha * ap;
    const double rs_next = r.squaredNorm();
    residual = std::sqrt(rs_next) / b_norm;
    if (residual <= settings.tolerance) {
      // the recurrence residual drifts from the true one; confirm before
      // declaring convergence
      const double true_residual = (b - apply_a(x)).norm() / b_norm;
      if (true_residual <= settings.tolerance) {
        return {std::move(x), it, true_residual};
      }
      r = b - apply_a(x);
      rs = r.squaredNorm();
      p = r;
      residual = true_residual;
      continue;
    }
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  throw ConvergenceError(
      "cg_solve: no convergence within " + std::to_string(max_iterations) +
          " iterations (relative residual " + std::to_string(residual) + ")",
      residual);
}

namespace detail {

inline Eigen::VectorXd resolve_sigma(const SolverSettings& settings, int n) {
  if (settings.sigma.size() == 0) return Eigen::VectorXd::Ones(n);
  if (settings.sigma.size() != n) {
    throw InvalidInputError("sigma length does not match gene count");
  }
  if ((settings.sigma.array() <= 0).any()) {
    throw InvalidInputError("sigma entries must be positive");
  }
  return settings.sigma;
}

}  // namespace detail

/// Scores for one category: solves (Sigma + L + shift I) f = rhs.
/// `diagonal` must hold sigma + degree + shift entrywise.
inline Eigen::VectorXd solve_shifted_grf(const SparseNetwork& net,
                                         const Eigen::VectorXd& diagonal,
                                         const Eigen::VectorXd& rhs,
                                         const SolverSettings& settings,
                                         const Eigen::VectorXd& warm_start = {},
                                         int* iterations = nullptr) {
  const auto& w = net.weights();
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return diagonal.cwiseProduct(x) - w * x;
  };
  CgResult res = cg_solve(apply, rhs, settings, warm_start);
  if (iterations) *iterations = res.iterations;
  return std::move(res.x);
}

/// Index-level GRF solve, returning raw scores.
inline Eigen::VectorXd solve_grf_scores(const SparseNetwork& net,
                                        const Eigen::VectorXd& bias,
                                        const SolverSettings& settings = {}) {
  const int n = net.size();
  if (bias.size() != n) {
    throw InvalidInputError("solve_grf: bias length does not match network");
  }
  if (!bias.allFinite()) {
    throw InvalidInputError("solve_grf: bias contains non-finite values");
  }
  const Eigen::VectorXd sigma = detail::resolve_sigma(settings, n);
  const Eigen::VectorXd diagonal = sigma + net.degrees();
  return solve_shifted_grf(net, diagonal, sigma.cwiseProduct(bias), settings);
}

inline DiscriminantVector solve_grf(const SparseNetwork& net,
                                    const Eigen::VectorXd& bias,
                                    const SolverSettings& settings = {}) {
  return {net.gene_ids(), solve_grf_scores(net, bias, settings)};
}

/// Quadratic objective (f - y)' Sigma (f - y) + f' L f.
inline double grf_objective(const SparseNetwork& net,
                            const Eigen::VectorXd& bias,
                            const Eigen::VectorXd& scores,
                            const Eigen::VectorXd& sigma = {}) {
  const int n = net.size();
  const Eigen::VectorXd s =
      sigma.size() == 0 ? Eigen::VectorXd::Ones(n) : sigma;
  const Eigen::VectorXd diff = scores - bias;
  const double fidelity = diff.cwiseProduct(s.cwiseProduct(diff)).sum();
  const Eigen::VectorXd lf =
      net.degrees().cwiseProduct(scores) - net.weights() * scores;
  return fidelity + scores.dot(lf);
}

}  // namespace hierprop
