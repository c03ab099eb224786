// Label-bias construction. The baseline scheme assigns +1 / -1 / k with
// k = (n+ - n-) / (n+ + n-); the hierarchical scheme (HLBias) derives the
// bias of non-positive genes from their sibling and ancestor annotations.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hierprop/error.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/util.hpp"

namespace hierprop {

// n x d bias values in [-1, +1]; training positives are exactly +1.
struct LabelBiasMatrix {
  std::vector<std::string> gene_ids;
  std::vector<std::string> category_ids;
  Eigen::MatrixXd values;
};

// Annotation pairs resolved against a gene universe and a hierarchy.
// Genes absent from the universe are ignored (they cannot be scored).
class AnnotationIndex {
 public:
  AnnotationIndex(const AnnotationSet& ann, const Hierarchy& h,
                  const std::vector<std::string>& universe)
      : n_(static_cast<int>(universe.size())), d_(h.size()) {
    std::unordered_map<std::string, int> gene_index;
    gene_index.reserve(universe.size());
    for (int i = 0; i < n_; ++i) gene_index.emplace(universe[i], i);
    genes_by_category_.resize(d_);
    categories_by_gene_.resize(n_);
    for (const auto& [gene, category] : ann.pairs()) {
      const int c = h.index_of(category);
      auto it = gene_index.find(gene);
      if (it == gene_index.end()) continue;
      genes_by_category_[c].push_back(it->second);
      categories_by_gene_[it->second].push_back(c);
    }
    for (auto& v : genes_by_category_) std::sort(v.begin(), v.end());
    for (auto& v : categories_by_gene_) std::sort(v.begin(), v.end());
  }

  int n_genes() const { return n_; }
  int n_categories() const { return d_; }
  const std::vector<int>& positives(int category) const {
    return genes_by_category_[category];
  }
  const std::vector<int>& annotations_of(int gene) const {
    return categories_by_gene_[gene];
  }
  bool is_positive(int gene, int category) const {
    const auto& v = genes_by_category_[category];
    return std::binary_search(v.begin(), v.end(), gene);
  }
  /// Genes with at least one annotation, as a 0/1 mask.
  std::vector<char> annotated_mask() const {
    std::vector<char> mask(n_, 0);
    for (int g = 0; g < n_; ++g) {
      if (!categories_by_gene_[g].empty()) mask[g] = 1;
    }
    return mask;
  }

 private:
  int n_;
  int d_;
  std::vector<std::vector<int>> genes_by_category_;
  std::vector<std::vector<int>> categories_by_gene_;
};

/// Mean label of the labeled genes; 0 when nothing is labeled.
inline double baseline_k(int n_pos, int n_neg) {
  if (n_pos + n_neg == 0) return 0.0;
  return static_cast<double>(n_pos - n_neg) / (n_pos + n_neg);
}

/// Three-valued bias vector: +1 on positives, -1 on negatives, k elsewhere.
inline Eigen::VectorXd baseline_bias(const std::vector<int>& positives,
                                     const std::vector<int>& negatives,
                                     int n_genes) {
  std::vector<char> is_pos(n_genes, 0);
  for (int g : positives) {
    if (g < 0 || g >= n_genes) throw InvalidInputError("gene index out of range");
    is_pos[g] = 1;
  }
  const double k =
      baseline_k(static_cast<int>(positives.size()),
                 static_cast<int>(negatives.size()));
  Eigen::VectorXd bias = Eigen::VectorXd::Constant(n_genes, k);
  for (int g : positives) bias[g] = 1.0;
  for (int g : negatives) {
    if (g < 0 || g >= n_genes) throw InvalidInputError("gene index out of range");
    if (is_pos[g]) {
      throw InvalidInputError(
          "baseline_bias: positive and negative sets overlap");
    }
    bias[g] = -1.0;
  }
  return bias;
}

/// HLBias for one category. Rule precedence per gene:
///   1. annotated to the category            -> +1
///   2. annotated to any sibling             -> -1
///   3. annotated to >=1 ancestor a          -> mean over those ancestors of
///      2 * n+_ac / n+_a - 1   (ancestors with no positives are skipped)
///   4. otherwise                            -> unlabeled_default
inline Eigen::VectorXd hlbias_vector(int category, const AnnotationIndex& idx,
                                     const Hierarchy& h,
                                     double unlabeled_default) {
  if (category < 0 || category >= h.size()) {
    throw InvalidInputError("hlbias_vector: category index out of range");
  }
  const int n = idx.n_genes();

  std::vector<char> sibling_annotated(n, 0);
  for (int s : h.siblings(category)) {
    for (int g : idx.positives(s)) sibling_annotated[g] = 1;
  }

  // Per-ancestor fraction 2*n+_ac/n+_a - 1, for ancestors with positives.
  const std::vector<int> ancestors = h.ancestors(category);
  std::vector<int> informative;
  std::vector<double> fraction;
  for (int a : ancestors) {
    const auto& pos_a = idx.positives(a);
    if (pos_a.empty()) continue;
    int overlap = 0;
    for (int g : pos_a) {
      if (idx.is_positive(g, category)) ++overlap;
    }
    informative.push_back(a);
    fraction.push_back(2.0 * overlap / static_cast<double>(pos_a.size()) - 1.0);
  }
  std::vector<std::vector<char>> member(informative.size(),
                                        std::vector<char>(n, 0));
  for (std::size_t ai = 0; ai < informative.size(); ++ai) {
    for (int g : idx.positives(informative[ai])) member[ai][g] = 1;
  }

  Eigen::VectorXd bias(n);
  for (int g = 0; g < n; ++g) {
    if (idx.is_positive(g, category)) {
      bias[g] = 1.0;
    } else if (sibling_annotated[g]) {
      bias[g] = -1.0;
    } else {
      double sum = 0;
      int hits = 0;
      for (std::size_t ai = 0; ai < informative.size(); ++ai) {
        if (member[ai][g]) {
          sum += fraction[ai];
          ++hits;
        }
      }
      bias[g] = hits > 0 ? sum / hits : unlabeled_default;
    }
  }
  return bias;
}

enum class BiasMethod { kBaseline, kHlBias };

// Rule-4 fallback for HLBias: the baseline k of the category (test setting)
// or a hard -1 (novel setting).
enum class HlbiasUnlabeled { kBaselineK, kNegativeOne };

struct BiasOptions {
  BiasMethod method = BiasMethod::kBaseline;
  HlbiasUnlabeled hlbias_unlabeled = HlbiasUnlabeled::kBaselineK;
};

/// Baseline negatives for a category: genes with at least one training
/// annotation in the hierarchy that are not positives of the category.
inline std::vector<int> baseline_negatives(const AnnotationIndex& idx,
                                           int category) {
  const std::vector<char> annotated = idx.annotated_mask();
  std::vector<int> negatives;
  for (int g = 0; g < idx.n_genes(); ++g) {
    if (annotated[g] && !idx.is_positive(g, category)) negatives.push_back(g);
  }
  return negatives;
}

/// Full n x d bias matrix; column c is the selected per-category scheme.
inline LabelBiasMatrix bias_matrix(const AnnotationSet& ann,
                                   const Hierarchy& h,
                                   const std::vector<std::string>& universe,
                                   const BiasOptions& options = {}) {
  if (!ann.closed()) {
    throw InvalidInputError("bias_matrix: annotation set must be closed");
  }
  const AnnotationIndex idx(ann, h, universe);
  LabelBiasMatrix out;
  out.gene_ids = universe;
  out.category_ids = h.category_ids();
  out.values.resize(idx.n_genes(), h.size());
  parallel_for(h.size(), [&](int c) {
    if (options.method == BiasMethod::kBaseline) {
      out.values.col(c) = baseline_bias(idx.positives(c),
                                        baseline_negatives(idx, c),
                                        idx.n_genes());
    } else {
      double fallback = -1.0;
      if (options.hlbias_unlabeled == HlbiasUnlabeled::kBaselineK) {
        fallback = baseline_k(
            static_cast<int>(idx.positives(c).size()),
            static_cast<int>(baseline_negatives(idx, c).size()));
      }
      out.values.col(c) = hlbias_vector(c, idx, h, fallback);
    }
  });
  return out;
}

}  // namespace hierprop
