// Joint multilabel scoring: all categories solved simultaneously with an
// extra penalty lambda * sum_edges ||f_m - f_c||^2 tying scores of linked
// categories. Solved by block Gauss-Seidel sweeps, one CG solve per
// category block:
//   (Sigma + L + lambda v_mm I) f_m = Sigma y_m + lambda sum_c h_mc f_c
// A dense Kronecker-assembled system backs the oracle path.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hierprop/bias.hpp"
#include "hierprop/error.hpp"
#include "hierprop/grf.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"

namespace hierprop {

struct HLPropSettings {
  double lambda = 1.0;
  double sweep_tolerance = 1e-6;  // max elementwise change over a full sweep
  int max_sweeps = 100;
  SolverSettings inner;
};

struct HLPropResult {
  DiscriminantMatrix scores;
  int sweeps = 0;                          // full sweeps executed
  std::vector<double> objective_per_sweep; // objective after each sweep
  double last_max_change = 0;
};

/// Objective of the joint problem (with the constant Y'Y term included):
/// (F-Y)' Sigma (F-Y) + trace(F' L F) + lambda * trace(F G F').
inline double hlprop_objective(const SparseNetwork& net,
                               const Eigen::MatrixXd& bias,
                               const Hierarchy& h, double lambda,
                               const Eigen::MatrixXd& scores,
                               const Eigen::VectorXd& sigma = {}) {
  const int n = net.size();
  const Eigen::VectorXd s =
      sigma.size() == 0 ? Eigen::VectorXd::Ones(n) : sigma;
  double obj = 0;
  const Eigen::VectorXd degrees = net.degrees();
  for (int c = 0; c < scores.cols(); ++c) {
    const Eigen::VectorXd diff = scores.col(c) - bias.col(c);
    obj += diff.cwiseProduct(s.cwiseProduct(diff)).sum();
    const Eigen::VectorXd lf =
        degrees.cwiseProduct(scores.col(c)) - net.weights() * scores.col(c);
    obj += scores.col(c).dot(lf);
  }
  for (const auto& [m, c] : h.edges()) {
    obj += lambda * (scores.col(m) - scores.col(c)).squaredNorm();
  }
  return obj;
}

namespace detail {

inline void check_hlprop_inputs(const SparseNetwork& net,
                                const LabelBiasMatrix& bias,
                                const Hierarchy& h) {
  if (bias.gene_ids != net.gene_ids()) {
    throw InvalidInputError("hlprop: bias gene list does not match network");
  }
  if (bias.category_ids != h.category_ids()) {
    throw InvalidInputError(
        "hlprop: bias category list does not match hierarchy");
  }
  if (bias.values.rows() != net.size() ||
      bias.values.cols() != h.size()) {
    throw InvalidInputError("hlprop: bias matrix has inconsistent dimensions");
  }
  if (!bias.values.allFinite()) {
    throw InvalidInputError("hlprop: bias contains non-finite values");
  }
}

// Connected components of the undirected hierarchy; components converge
// independently and stop sweeping once done.
inline std::vector<int> hierarchy_components(const Hierarchy& h) {
  std::vector<int> comp(h.size(), -1);
  int next = 0;
  for (int seed = 0; seed < h.size(); ++seed) {
    if (comp[seed] != -1) continue;
    std::vector<int> stack{seed};
    comp[seed] = next;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      auto visit = [&](int other) {
        if (comp[other] == -1) {
          comp[other] = next;
          stack.push_back(other);
        }
      };
      for (int m : h.parents(c)) visit(m);
      for (int m : h.children(c)) visit(m);
    }
    ++next;
  }
  return comp;
}

}  // namespace detail

/// Block Gauss-Seidel solve of the joint problem. Categories are swept in
/// their (deterministic) index order; each block update is immediately
/// visible to later blocks in the same sweep. Inner CG solves warm-start
/// from the previous sweep's value.
inline HLPropResult solve_hlprop(const SparseNetwork& net,
                                 const LabelBiasMatrix& bias,
                                 const Hierarchy& h,
                                 const HLPropSettings& settings = {}) {
  detail::check_hlprop_inputs(net, bias, h);
  if (settings.lambda < 0) {
    throw InvalidInputError("hlprop: lambda must be >= 0");
  }
  if (settings.sweep_tolerance <= 0) {
    throw InvalidInputError("hlprop: sweep_tolerance must be positive");
  }
  const int n = net.size();
  const int d = h.size();
  const Eigen::VectorXd sigma = detail::resolve_sigma(settings.inner, n);
  const Eigen::VectorXd degrees = net.degrees();
  const Eigen::VectorXd v = h.undirected_degrees();

  const std::vector<int> comp = detail::hierarchy_components(h);
  const int n_comp =
      d == 0 ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
  std::vector<char> converged(n_comp, 0);
  std::vector<double> comp_change(n_comp, 0);

  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, d);
  HLPropResult result;
  int sweeps = 0;
  while (sweeps < settings.max_sweeps) {
    if (std::all_of(converged.begin(), converged.end(),
                    [](char c) { return c != 0; })) {
      break;
    }
    ++sweeps;
    std::fill(comp_change.begin(), comp_change.end(), 0.0);
    for (int m = 0; m < d; ++m) {
      if (converged[comp[m]]) continue;
      Eigen::VectorXd rhs = sigma.cwiseProduct(bias.values.col(m));
      for (int c : h.parents(m)) rhs += settings.lambda * f.col(c);
      for (int c : h.children(m)) rhs += settings.lambda * f.col(c);
      const Eigen::VectorXd diagonal =
          sigma + degrees +
          Eigen::VectorXd::Constant(n, settings.lambda * v[m]);
      const Eigen::VectorXd updated = solve_shifted_grf(
          net, diagonal, rhs, settings.inner, f.col(m));
      const double change = (updated - f.col(m)).lpNorm<Eigen::Infinity>();
      comp_change[comp[m]] = std::max(comp_change[comp[m]], change);
      f.col(m) = updated;
    }
    result.objective_per_sweep.push_back(
        hlprop_objective(net, bias.values, h, settings.lambda, f, sigma));
    double max_change = 0;
    for (int k = 0; k < n_comp; ++k) {
      if (converged[k]) continue;
      if (comp_change[k] <= settings.sweep_tolerance) converged[k] = 1;
      max_change = std::max(max_change, comp_change[k]);
    }
    result.last_max_change = max_change;
  }
  if (!std::all_of(converged.begin(), converged.end(),
                   [](char c) { return c != 0; })) {
    throw ConvergenceError(
        "hlprop: sweeps did not converge within " +
            std::to_string(settings.max_sweeps) +
            " sweeps (last max change " +
            std::to_string(result.last_max_change) + ")",
        result.last_max_change);
  }
  result.sweeps = sweeps;
  result.scores = {bias.gene_ids, bias.category_ids, std::move(f)};
  return result;
}

constexpr int kKronGuard = 5000;  // max n*d for dense assembly

/// Dense (n*d) x (n*d) system matrix A = I_d (x) (I + L) + lambda (G (x) I_n)
/// with Sigma = I. Diagonal blocks are I + L + lambda v_cc I; block (m, c)
/// is -lambda I for each hierarchy edge.
inline Eigen::MatrixXd assemble_kron(const SparseNetwork& net,
                                     const Hierarchy& h, double lambda) {
  const int n = net.size();
  const int d = h.size();
  if (static_cast<long>(n) * d > kKronGuard) {
    throw SizeError("assemble_kron: n*d = " + std::to_string(n * d) +
                    " exceeds the dense-assembly guard of " +
                    std::to_string(kKronGuard));
  }
  Eigen::MatrixXd laplacian =
      Eigen::MatrixXd(net.degrees().asDiagonal()) -
      Eigen::MatrixXd(net.weights());
  const Eigen::VectorXd v = h.undirected_degrees();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * d, n * d);
  for (int c = 0; c < d; ++c) {
    a.block(c * n, c * n, n, n) =
        Eigen::MatrixXd::Identity(n, n) * (1.0 + lambda * v[c]) + laplacian;
  }
  for (const auto& [m, c] : h.edges()) {
    a.block(m * n, c * n, n, n) =
        -lambda * Eigen::MatrixXd::Identity(n, n);
    a.block(c * n, m * n, n, n) =
        -lambda * Eigen::MatrixXd::Identity(n, n);
  }
  return a;
}

/// Direct dense solve of A vec(F) = vec(Y); test/oracle path only.
inline Eigen::VectorXd solve_dense_oracle(const Eigen::MatrixXd& a,
                                          const Eigen::VectorXd& vec_y) {
  if (a.rows() != a.cols() || a.rows() != vec_y.size()) {
    throw InvalidInputError("solve_dense_oracle: dimension mismatch");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw std::runtime_error("solve_dense_oracle: factorization failed");
  }
  return ldlt.solve(vec_y);
}

}  // namespace hierprop
