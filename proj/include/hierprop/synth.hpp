// Synthetic benchmark instances with planted hierarchical signal: a
// complete branching tree of categories, each gene assigned one leaf
// (plus ancestors by closure), and a network whose edge probability
// depends on how deep the two genes' common category ancestor sits. A
// fraction of genes have their observed annotation truncated at a random
// internal ancestor, imitating incomplete curation.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hierprop/error.hpp"
#include "hierprop/netbuild.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/util.hpp"

namespace hierprop {

struct SynthSpec {
  int n_genes = 300;
  int depth = 3;      // levels including the root
  int branching = 3;  // children per internal category
  double p_in = 0.15;   // same leaf
  double p_mid = 0.05;  // common non-root ancestor only
  double p_out = 0.01;  // nothing in common but the root
  double hide_fraction = 0.3;
};

struct SynthInstance {
  SparseNetwork net;
  Hierarchy h;
  AnnotationSet ann_full;
  AnnotationSet ann_observed;
};

namespace detail {

inline std::string padded_id(const char* prefix, int value, int width) {
  std::string digits = std::to_string(value);
  return std::string(prefix) +
         std::string(width > static_cast<int>(digits.size())
                         ? width - digits.size()
                         : 0,
                     '0') +
         digits;
}

}  // namespace detail

/// Deterministic generation for a given seed. The category tree is a
/// complete depth-level branching-ary tree in level order; gene leaves,
/// network pair draws (fixed i < j order), and hiding choices each
/// consume the stream in a fixed sequence, so equal seeds give
/// bit-identical instances. Edges carry unit weight; callers that want a
/// normalized network can pass the result through normalize().
inline SynthInstance generate(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.n_genes < 2) {
    throw InvalidInputError("synth: n_genes must be >= 2");
  }
  if (spec.depth < 2 || spec.branching < 2) {
    throw InvalidInputError(
        "synth: depth and branching must both be >= 2");
  }
  for (double p : {spec.p_in, spec.p_mid, spec.p_out}) {
    if (!(p >= 0 && p <= 1)) {
      throw InvalidInputError("synth: edge probabilities must be in [0, 1]");
    }
  }
  if (!(spec.hide_fraction >= 0 && spec.hide_fraction < 1)) {
    throw InvalidInputError("synth: hide_fraction must be in [0, 1)");
  }

  // complete tree, level order: children of i are i*b+1 .. i*b+b
  const int b = spec.branching;
  long n_cats = 0;
  long level_size = 1;
  for (int l = 0; l < spec.depth; ++l) {
    n_cats += level_size;
    level_size *= b;
  }
  if (n_cats > 100000) {
    throw InvalidInputError("synth: category tree too large");
  }
  const int d = static_cast<int>(n_cats);
  const int first_leaf = static_cast<int>(n_cats - level_size / b);
  const int cat_width = static_cast<int>(std::to_string(d - 1).size());
  std::vector<std::string> cat_ids(d);
  for (int c = 0; c < d; ++c) {
    cat_ids[c] = detail::padded_id("cat", c, cat_width);
  }
  std::vector<std::pair<std::string, std::string>> tree_edges;
  for (int c = 1; c < d; ++c) {
    tree_edges.emplace_back(cat_ids[(c - 1) / b], cat_ids[c]);
  }
  Hierarchy h = Hierarchy::from_edges(tree_edges, cat_ids);

  const int n = spec.n_genes;
  const int gene_width = static_cast<int>(std::to_string(n - 1).size());
  std::vector<std::string> gene_ids(n);
  for (int g = 0; g < n; ++g) {
    gene_ids[g] = detail::padded_id("g", g, gene_width);
  }

  Rng rng(seed);
  const int n_leaves = d - first_leaf;
  std::vector<int> leaf_of(n);
  for (int g = 0; g < n; ++g) {
    leaf_of[g] = first_leaf + static_cast<int>(uniform_below(
                                  rng, static_cast<std::uint64_t>(n_leaves)));
  }

  // path from root (depth entries, root first, leaf last)
  std::vector<std::vector<int>> path(n_leaves);
  for (int i = 0; i < n_leaves; ++i) {
    int c = first_leaf + i;
    std::vector<int>& p = path[i];
    while (true) {
      p.push_back(c);
      if (c == 0) break;
      c = (c - 1) / b;
    }
    std::reverse(p.begin(), p.end());
  }
  auto common_depth = [&](int leaf_a, int leaf_b) {
    const std::vector<int>& pa = path[leaf_a - first_leaf];
    const std::vector<int>& pb = path[leaf_b - first_leaf];
    int l = 0;
    while (l + 1 < static_cast<int>(pa.size()) && pa[l + 1] == pb[l + 1]) {
      ++l;
    }
    return l;  // 0 = root only, depth-1 = same leaf
  };

  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int dc = common_depth(leaf_of[i], leaf_of[j]);
      const double p = dc == spec.depth - 1 ? spec.p_in
                       : dc >= 1            ? spec.p_mid
                                            : spec.p_out;
      if (uniform_unit(rng) < p) {
        edges.push_back({i, j, 1.0});
      }
    }
  }
  SparseNetwork net = SparseNetwork::from_edges(gene_ids, edges);

  std::set<std::pair<std::string, std::string>> full_pairs;
  for (int g = 0; g < n; ++g) {
    for (int c : path[leaf_of[g] - first_leaf]) {
      full_pairs.emplace(gene_ids[g], cat_ids[c]);
    }
  }
  AnnotationSet ann_full =
      AnnotationSet::from_pairs(std::move(full_pairs), true);

  const int n_hidden =
      static_cast<int>(std::lround(spec.hide_fraction * n));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order, rng);
  std::vector<int> keep_depth(n, spec.depth - 1);  // kept path prefix end
  for (int i = 0; i < n_hidden; ++i) {
    // truncate at a random internal (non-root) ancestor: keep levels 0..t
    // with t >= 1; a two-level tree has no internal ancestors, so the
    // truncation falls back to the root there
    keep_depth[order[i]] =
        spec.depth == 2
            ? 0
            : 1 + static_cast<int>(uniform_below(
                      rng, static_cast<std::uint64_t>(spec.depth - 2)));
  }
  std::set<std::pair<std::string, std::string>> observed_pairs;
  for (int g = 0; g < n; ++g) {
    const std::vector<int>& p = path[leaf_of[g] - first_leaf];
    for (int l = 0; l <= keep_depth[g]; ++l) {
      observed_pairs.emplace(gene_ids[g], cat_ids[p[l]]);
    }
  }
  AnnotationSet ann_observed =
      AnnotationSet::from_pairs(std::move(observed_pairs), true);

  return {std::move(net), std::move(h), std::move(ann_full),
          std::move(ann_observed)};
}

}  // namespace hierprop
