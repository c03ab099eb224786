// Similarity-network construction: Pearson correlation networks sparsified
// by a mutual top-k filter, degree normalization W~ = D^-1/2 W D^-1/2, and
// elementwise combination of networks over a shared gene universe.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hierprop/error.hpp"
#include "hierprop/network.hpp"

namespace hierprop {

// Gene-by-feature matrix. Missing values are NaN; a row must have at least
// one observed entry.
class FeatureMatrix {
 public:
  FeatureMatrix(std::vector<std::string> gene_ids, Eigen::MatrixXd values)
      : gene_ids_(std::move(gene_ids)), values_(std::move(values)) {
    if (static_cast<int>(gene_ids_.size()) != values_.rows()) {
      throw InvalidInputError("feature matrix: row count does not match ids");
    }
    std::unordered_map<std::string, int> seen;
    for (const auto& id : gene_ids_) {
      if (!seen.emplace(id, 1).second) {
        throw InvalidInputError("feature matrix: duplicate gene id '" + id +
                                "'");
      }
    }
    for (int i = 0; i < values_.rows(); ++i) {
      if (!values_.row(i).array().isFinite().any()) {
        throw InvalidInputError("feature matrix: row '" + gene_ids_[i] +
                                "' is entirely missing");
      }
    }
  }

  int n_genes() const { return static_cast<int>(gene_ids_.size()); }
  int n_features() const { return static_cast<int>(values_.cols()); }
  const std::vector<std::string>& gene_ids() const { return gene_ids_; }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  std::vector<std::string> gene_ids_;
  Eigen::MatrixXd values_;
};

namespace detail {

// Pairwise-complete Pearson correlation. Fewer than 3 shared observed
// columns, or a constant row on the shared support, gives r = 0.
inline double pairwise_pearson(const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  int n = 0;
  for (int k = 0; k < a.size(); ++k) {
    if (std::isnan(a[k]) || std::isnan(b[k])) continue;
    ++n;
    sa += a[k];
    sb += b[k];
    saa += a[k] * a[k];
    sbb += b[k] * b[k];
    sab += a[k] * b[k];
  }
  if (n < 3) return 0.0;
  const double va = saa - sa * sa / n;
  const double vb = sbb - sb * sb / n;
  if (va <= 0 || vb <= 0) return 0.0;
  const double cov = sab - sa * sb / n;
  double r = cov / std::sqrt(va * vb);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace detail

/// Pearson similarity network: edge (i, j) is kept iff r_ij > 0 and r_ij
/// ranks in the top-k correlations of gene i or of gene j (ties at rank k
/// kept).
inline SparseNetwork pearson_network(const FeatureMatrix& features,
                                     int top_k) {
  const int n = features.n_genes();
  if (n < 2) throw InvalidInputError("pearson_network: fewer than 2 genes");
  if (features.n_features() < 2) {
    throw InvalidInputError("pearson_network: fewer than 2 feature columns");
  }
  if (top_k < 1) throw InvalidInputError("pearson_network: top_k must be >= 1");

  // All pairwise correlations; only positive values can become edges, and
  // negatives can never displace a positive from a top-k slot.
  std::vector<std::vector<std::pair<int, double>>> pos(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = detail::pairwise_pearson(features.values().row(i),
                                                features.values().row(j));
      if (r > 0) {
        pos[i].push_back({j, r});
        pos[j].push_back({i, r});
      }
    }
  }

  // Per-gene rank-k threshold (ties at the k-th value are kept via >=).
  std::vector<double> threshold(n, -std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(pos[i].size()) <= top_k) continue;
    std::vector<double> vals;
    vals.reserve(pos[i].size());
    for (const auto& [j, r] : pos[i]) vals.push_back(r);
    std::nth_element(vals.begin(), vals.begin() + (top_k - 1), vals.end(),
                     std::greater<double>());
    threshold[i] = vals[top_k - 1];
  }

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, r] : pos[i]) {
      if (j < i) continue;
      if (r >= threshold[i] || r >= threshold[j]) {
        edges.push_back({i, j, r});
      }
    }
  }
  return SparseNetwork::from_edges(features.gene_ids(), edges);
}

/// Symmetric degree normalization w~_ij = w_ij / sqrt(d_i d_j). Isolated
/// genes keep no edges; no division by zero can occur because stored edges
/// have positive weight.
inline SparseNetwork normalize(const SparseNetwork& net) {
  const Eigen::VectorXd d = net.degrees();
  std::vector<Edge> edges = net.edges();
  for (Edge& e : edges) {
    e.weight /= std::sqrt(d[e.i] * d[e.j]);
  }
  return SparseNetwork::from_edges(net.gene_ids(), edges);
}

/// Sums networks over an identical gene universe, then normalizes the sum.
inline SparseNetwork combine(const std::vector<SparseNetwork>& nets) {
  if (nets.empty()) throw InvalidInputError("combine: no networks given");
  for (const SparseNetwork& net : nets) {
    if (net.gene_ids() != nets.front().gene_ids()) {
      throw InvalidInputError(
          "combine: networks are not indexed against the same gene list");
    }
  }
  Eigen::SparseMatrix<double> sum = nets.front().weights();
  for (std::size_t k = 1; k < nets.size(); ++k) {
    sum = sum + nets[k].weights();
  }
  std::vector<Edge> edges;
  for (int k = 0; k < sum.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sum, k); it; ++it) {
      if (it.row() < it.col() && it.value() != 0) {
        edges.push_back({static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value()});
      }
    }
  }
  return normalize(SparseNetwork::from_edges(nets.front().gene_ids(), edges));
}

/// Re-indexes a network against a larger (or permuted) gene universe.
/// Genes absent from the input become isolated nodes.
inline SparseNetwork align_genes(const SparseNetwork& net,
                                 const std::vector<std::string>& universe) {
  std::unordered_map<std::string, int> pos;
  pos.reserve(universe.size());
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (!pos.emplace(universe[i], static_cast<int>(i)).second) {
      throw InvalidInputError("align_genes: duplicate gene '" + universe[i] +
                              "' in universe");
    }
  }
  std::vector<int> remap(net.size());
  for (int i = 0; i < net.size(); ++i) {
    auto it = pos.find(net.gene_ids()[i]);
    if (it == pos.end()) {
      throw InvalidInputError("align_genes: gene '" + net.gene_ids()[i] +
                              "' missing from universe");
    }
    remap[i] = it->second;
  }
  std::vector<Edge> edges = net.edges();
  for (Edge& e : edges) {
    e.i = remap[e.i];
    e.j = remap[e.j];
  }
  return SparseNetwork::from_edges(universe, edges);
}

}  // namespace hierprop
