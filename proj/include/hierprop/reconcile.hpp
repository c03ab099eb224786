// Isotonic reconciliation of per-gene category scores: project a score
// vector onto the constraint set { z : z_m >= z_c for every hierarchy edge
// (m, c) } under the weighted least-squares objective sum_v q_v (z_v -
// x_v)^2, using GPAV block pooling. Exact when every category has at most
// one parent; a near-optimal approximation on general DAGs.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "hierprop/error.hpp"
#include "hierprop/grf.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/util.hpp"

namespace hierprop {

struct IsotonicProblem {
  Eigen::VectorXd values;   // x, one entry per category
  Eigen::VectorXd weights;  // q, positive; empty -> all ones
};

inline double isotonic_objective(const IsotonicProblem& problem,
                                 const Eigen::VectorXd& z) {
  const Eigen::VectorXd q = problem.weights.size() == 0
                                ? Eigen::VectorXd::Ones(problem.values.size())
                                : problem.weights;
  return (z - problem.values).cwiseProduct(q.cwiseProduct(z - problem.values))
      .sum();
}

namespace detail {

struct BlockPool {
  std::vector<int> uf;          // union-find parent
  std::vector<double> weight;   // per root: sum of q
  std::vector<double> wsum;     // per root: sum of q * x
  std::vector<int> min_member;  // per root: smallest member index
  std::vector<std::set<int>> preds;  // per root: predecessor vertices

  explicit BlockPool(int d)
      : uf(d), weight(d, 0), wsum(d, 0), min_member(d), preds(d) {}

  int find(int v) {
    while (uf[v] != v) {
      uf[v] = uf[uf[v]];
      v = uf[v];
    }
    return v;
  }

  double mean(int root) const { return wsum[root] / weight[root]; }
};

}  // namespace detail

/// GPAV solve of the per-gene isotonic projection. Categories are swept
/// leaves first; each new singleton block repeatedly absorbs the adjacent
/// predecessor block of largest mean while that mean exceeds its own
/// (ties broken by smallest member index). The result is feasible by
/// construction and optimal whenever the hierarchy is a forest.
inline Eigen::VectorXd gpav(const IsotonicProblem& problem,
                            const Hierarchy& h) {
  const int d = h.size();
  if (problem.values.size() != d) {
    throw InvalidInputError("gpav: value count does not match hierarchy");
  }
  if (!problem.values.allFinite()) {
    throw InvalidInputError("gpav: values contain non-finite entries");
  }
  Eigen::VectorXd q = problem.weights;
  if (q.size() == 0) q = Eigen::VectorXd::Ones(d);
  if (q.size() != d) {
    throw InvalidInputError("gpav: weight count does not match hierarchy");
  }
  if (!(q.array() > 0).all()) {
    throw InvalidInputError("gpav: weights must be positive");
  }
  if (d == 0) return {};

  std::vector<int> order = h.topological_order();
  std::reverse(order.begin(), order.end());

  detail::BlockPool pool(d);
  for (const int v : order) {
    pool.uf[v] = v;
    pool.weight[v] = q[v];
    pool.wsum[v] = q[v] * problem.values[v];
    pool.min_member[v] = v;
    for (int c : h.children(v)) pool.preds[v].insert(pool.find(c));

    for (;;) {
      const int rv = pool.find(v);
      // canonicalize the predecessor set and pick the violating block of
      // maximal mean
      std::set<int> canonical;
      for (int p : pool.preds[rv]) {
        const int rp = pool.find(p);
        if (rp != rv) canonical.insert(rp);
      }
      pool.preds[rv] = canonical;
      int best = -1;
      for (int rp : canonical) {
        if (!(pool.mean(rp) > pool.mean(rv))) continue;
        if (best == -1 || pool.mean(rp) > pool.mean(best) ||
            (pool.mean(rp) == pool.mean(best) &&
             pool.min_member[rp] < pool.min_member[best])) {
          best = rp;
        }
      }
      if (best == -1) break;
      pool.uf[best] = rv;
      pool.weight[rv] += pool.weight[best];
      pool.wsum[rv] += pool.wsum[best];
      pool.min_member[rv] = std::min(pool.min_member[rv],
                                     pool.min_member[best]);
      pool.preds[rv].erase(best);
      pool.preds[rv].insert(pool.preds[best].begin(),
                            pool.preds[best].end());
    }
  }

  Eigen::VectorXd z(d);
  for (int v = 0; v < d; ++v) z[v] = pool.mean(pool.find(v));
  for (const auto& [m, c] : h.edges()) {
    if (!(z[m] >= z[c] - 1e-12)) {
      throw std::logic_error("gpav: produced an infeasible solution");
    }
  }
  return z;
}

/// Row-wise reconciliation of a full score matrix; gene rows are
/// independent problems and run in parallel.
inline DiscriminantMatrix reconcile_matrix(const DiscriminantMatrix& scores,
                                           const Hierarchy& h,
                                           const Eigen::VectorXd& weights = {}) {
  if (scores.category_ids != h.category_ids()) {
    throw InvalidInputError(
        "reconcile: score category list does not match hierarchy");
  }
  if (scores.scores.cols() != h.size()) {
    throw InvalidInputError("reconcile: score matrix has wrong column count");
  }
  const int n = static_cast<int>(scores.scores.rows());
  Eigen::MatrixXd z(n, h.size());
  parallel_for(n, [&](int g) {
    IsotonicProblem problem{scores.scores.row(g).transpose(), weights};
    z.row(g) = gpav(problem, h).transpose();
  });
  return {scores.gene_ids, scores.category_ids, std::move(z)};
}

}  // namespace hierprop
