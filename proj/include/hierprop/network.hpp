// SparseNetwork: a symmetric, nonnegative, zero-diagonal weighted graph over
// genes. Backing store is an Eigen sparse matrix with both triangles filled
// so that matrix-vector products need no symmetry bookkeeping.
#pragma once

#include <Eigen/Sparse>
#include <algorithm>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hierprop/error.hpp"

namespace hierprop {

struct Edge {
  int i;
  int j;
  double weight;
};

class SparseNetwork {
 public:
  SparseNetwork() = default;

  /// Builds a network from undirected edges given once per unordered pair.
  /// Self-loops, negative weights and duplicate pairs are rejected;
  /// zero-weight edges are dropped.
  static SparseNetwork from_edges(std::vector<std::string> gene_ids,
                                  const std::vector<Edge>& edges) {
    SparseNetwork net;
    net.gene_ids_ = std::move(gene_ids);
    net.build_index();
    const int n = net.size();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(edges.size() * 2);
    // pair-key for duplicate detection; n fits comfortably in 32 bits
    std::unordered_map<long long, bool> seen;
    seen.reserve(edges.size());
    for (const Edge& e : edges) {
      if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
        throw InvalidInputError("edge index out of range");
      }
      if (e.i == e.j) {
        throw InvalidInputError("self-loop on gene '" + net.gene_ids_[e.i] +
                                "'");
      }
      if (e.weight < 0) {
        throw InvalidInputError("negative edge weight between '" +
                                net.gene_ids_[e.i] + "' and '" +
                                net.gene_ids_[e.j] + "'");
      }
      const int a = std::min(e.i, e.j);
      const int b = std::max(e.i, e.j);
      const long long key = static_cast<long long>(a) * n + b;
      if (!seen.emplace(key, true).second) {
        throw InvalidInputError("duplicate edge between '" + net.gene_ids_[a] +
                                "' and '" + net.gene_ids_[b] + "'");
      }
      if (e.weight == 0) continue;
      triplets.emplace_back(e.i, e.j, e.weight);
      triplets.emplace_back(e.j, e.i, e.weight);
    }
    net.weights_.resize(n, n);
    net.weights_.setFromTriplets(triplets.begin(), triplets.end());
    net.weights_.makeCompressed();
    return net;
  }

  int size() const { return static_cast<int>(gene_ids_.size()); }
  const std::vector<std::string>& gene_ids() const { return gene_ids_; }

  /// Symmetric weight matrix (both triangles stored, zero diagonal).
  const Eigen::SparseMatrix<double>& weights() const { return weights_; }

  Eigen::VectorXd degrees() const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(size());
    for (int k = 0; k < weights_.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, k); it;
           ++it) {
        d[it.row()] += it.value();
      }
    }
    return d;
  }

  /// One entry per unordered pair, i < j, ordered by (i, j).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(weights_.nonZeros() / 2);
    for (int k = 0; k < weights_.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, k); it;
           ++it) {
        const int i = static_cast<int>(it.row());
        const int j = static_cast<int>(it.col());
        if (i < j) out.push_back({i, j, it.value()});
      }
    }
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return out;
  }

  int index_of(const std::string& gene) const {
    auto it = index_.find(gene);
    return it == index_.end() ? -1 : it->second;
  }

 private:
  void build_index() {
    index_.reserve(gene_ids_.size());
    for (std::size_t i = 0; i < gene_ids_.size(); ++i) {
      if (!index_.emplace(gene_ids_[i], static_cast<int>(i)).second) {
        throw InvalidInputError("duplicate gene id '" + gene_ids_[i] + "'");
      }
    }
  }

  std::vector<std::string> gene_ids_;
  std::unordered_map<std::string, int> index_;
  Eigen::SparseMatrix<double> weights_;
};

}  // namespace hierprop
