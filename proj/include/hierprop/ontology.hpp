// Category DAG (parent -> child edges), annotation sets with true-path
// closure, annotation-count filtering with nearest-retained-ancestor
// rewiring, and the symmetric hierarchy Laplacian G = V - H.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hierprop/error.hpp"

namespace hierprop {

class Hierarchy {
 public:
  Hierarchy() = default;

  /// Builds a validated DAG from (parent, child) pairs. Categories are the
  /// union of edge endpoints and `declared`, ordered lexicographically.
  static Hierarchy from_edges(
      const std::vector<std::pair<std::string, std::string>>& edges,
      const std::vector<std::string>& declared = {}) {
    Hierarchy h;
    std::set<std::string> ids(declared.begin(), declared.end());
    for (const auto& [parent, child] : edges) {
      ids.insert(parent);
      ids.insert(child);
    }
    h.category_ids_.assign(ids.begin(), ids.end());
    for (std::size_t i = 0; i < h.category_ids_.size(); ++i) {
      h.index_[h.category_ids_[i]] = static_cast<int>(i);
    }
    const int d = h.size();
    h.parents_.resize(d);
    h.children_.resize(d);
    std::set<std::pair<int, int>> seen;
    for (const auto& [parent, child] : edges) {
      const int m = h.index_.at(parent);
      const int c = h.index_.at(child);
      if (m == c) {
        throw InvalidInputError("hierarchy: self-edge on '" + parent + "'");
      }
      if (!seen.insert({m, c}).second) {
        throw InvalidInputError("hierarchy: duplicate edge '" + parent +
                                "' -> '" + child + "'");
      }
      h.parents_[c].push_back(m);
      h.children_[m].push_back(c);
    }
    for (int c = 0; c < d; ++c) {
      std::sort(h.parents_[c].begin(), h.parents_[c].end());
      std::sort(h.children_[c].begin(), h.children_[c].end());
    }
    h.check_acyclic();
    return h;
  }

  int size() const { return static_cast<int>(category_ids_.size()); }
  const std::vector<std::string>& category_ids() const { return category_ids_; }

  int index_of(const std::string& category) const {
    auto it = index_.find(category);
    if (it == index_.end()) {
      throw InvalidInputError("unknown category '" + category + "'");
    }
    return it->second;
  }

  bool contains(const std::string& category) const {
    return index_.count(category) > 0;
  }

  const std::vector<int>& parents(int c) const { return checked(c).parents_[c]; }
  const std::vector<int>& children(int c) const {
    return checked(c).children_[c];
  }

  /// Proper ancestors, ascending index order.
  std::vector<int> ancestors(int c) const { return reach(c, parents_); }

  /// Proper descendants, ascending index order.
  std::vector<int> descendants(int c) const { return reach(c, children_); }

  /// Categories (other than c) sharing at least one parent with c.
  std::vector<int> siblings(int c) const {
    checked(c);
    std::set<int> sibs;
    for (int m : parents_[c]) {
      for (int s : children_[m]) {
        if (s != c) sibs.insert(s);
      }
    }
    return {sibs.begin(), sibs.end()};
  }

  /// Every parent listed before all of its children; ties broken by
  /// category order.
  std::vector<int> topological_order() const {
    const int d = size();
    std::vector<int> indegree(d);
    for (int c = 0; c < d; ++c) indegree[c] = static_cast<int>(parents_[c].size());
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int c = 0; c < d; ++c) {
      if (indegree[c] == 0) ready.push(c);
    }
    std::vector<int> order;
    order.reserve(d);
    while (!ready.empty()) {
      const int m = ready.top();
      ready.pop();
      order.push_back(m);
      for (int c : children_[m]) {
        if (--indegree[c] == 0) ready.push(c);
      }
    }
    return order;
  }

  /// (parent, child) index pairs, ordered.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int m = 0; m < size(); ++m) {
      for (int c : children_[m]) out.push_back({m, c});
    }
    return out;
  }

  /// Undirected degree v_cc of each category.
  Eigen::VectorXd undirected_degrees() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(size());
    for (int c = 0; c < size(); ++c) {
      v[c] = static_cast<double>(parents_[c].size() + children_[c].size());
    }
    return v;
  }

  /// Symmetric hierarchy Laplacian G = V - H over the undirected view of
  /// the DAG. Rows sum to zero; diagonal is the undirected degree.
  Eigen::MatrixXd laplacian() const {
    const int d = size();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    for (int m = 0; m < d; ++m) {
      for (int c : children_[m]) {
        g(m, c) -= 1.0;
        g(c, m) -= 1.0;
        g(m, m) += 1.0;
        g(c, c) += 1.0;
      }
    }
    return g;
  }

  /// Categories with no parents.
  std::vector<int> sources() const {
    std::vector<int> out;
    for (int c = 0; c < size(); ++c) {
      if (parents_[c].empty()) out.push_back(c);
    }
    return out;
  }

 private:
  const Hierarchy& checked(int c) const {
    if (c < 0 || c >= size()) throw InvalidInputError("category index out of range");
    return *this;
  }

  std::vector<int> reach(int start,
                         const std::vector<std::vector<int>>& step) const {
    checked(start);
    std::vector<bool> seen(size(), false);
    std::vector<int> stack = step[start];
    std::vector<int> out;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      if (seen[c]) continue;
      seen[c] = true;
      out.push_back(c);
      for (int next : step[c]) stack.push_back(next);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void check_acyclic() const {
    // Iterative DFS with color marks; on a back edge, reconstruct one cycle
    // for the error message.
    const int d = size();
    std::vector<int> color(d, 0);  // 0 white, 1 on stack, 2 done
    std::vector<int> via(d, -1);
    for (int root = 0; root < d; ++root) {
      if (color[root] != 0) continue;
      std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
      color[root] = 1;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < children_[node].size()) {
          const int child = children_[node][next++];
          if (color[child] == 1) {
            std::string cycle = category_ids_[child];
            for (int at = node; at != child; at = via[at]) {
              cycle = category_ids_[at] + " -> " + cycle;
            }
            cycle = category_ids_[child] + " -> " + cycle;
            throw CyclicHierarchyError("hierarchy contains a cycle: " + cycle);
          }
          if (color[child] == 0) {
            color[child] = 1;
            via[child] = node;
            stack.push_back({child, 0});
          }
        } else {
          color[node] = 2;
          stack.pop_back();
        }
      }
    }
  }

  std::vector<std::string> category_ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

// Gene <-> category assignments. `closed` records that the true-path rule
// has been applied (every annotation implies all ancestor annotations).
class AnnotationSet {
 public:
  AnnotationSet() = default;

  static AnnotationSet from_pairs(
      std::set<std::pair<std::string, std::string>> pairs,
      bool closed = false) {
    AnnotationSet ann;
    ann.pairs_ = std::move(pairs);
    ann.closed_ = closed;
    return ann;
  }

  const std::set<std::pair<std::string, std::string>>& pairs() const {
    return pairs_;
  }
  bool closed() const { return closed_; }
  std::size_t size() const { return pairs_.size(); }

  bool contains(const std::string& gene, const std::string& category) const {
    return pairs_.count({gene, category}) > 0;
  }

  /// Distinct genes, sorted.
  std::vector<std::string> genes() const {
    std::vector<std::string> out;
    for (const auto& [g, c] : pairs_) {
      if (out.empty() || out.back() != g) out.push_back(g);
    }
    return out;
  }

  /// Annotations restricted to genes outside `excluded` (used to hide
  /// held-out genes during cross-validation). Closure is preserved.
  AnnotationSet without_genes(const std::set<std::string>& excluded) const {
    std::set<std::pair<std::string, std::string>> kept;
    for (const auto& p : pairs_) {
      if (!excluded.count(p.first)) kept.insert(p);
    }
    return from_pairs(std::move(kept), closed_);
  }

 private:
  std::set<std::pair<std::string, std::string>> pairs_;
  bool closed_ = false;
};

/// True-path closure: each (gene, category) pair implies (gene, ancestor)
/// for every ancestor. Idempotent.
inline AnnotationSet true_path_closure(const AnnotationSet& ann,
                                       const Hierarchy& h) {
  std::set<std::pair<std::string, std::string>> out;
  std::map<int, std::vector<int>> ancestor_cache;
  for (const auto& [gene, category] : ann.pairs()) {
    const int c = h.index_of(category);
    out.insert({gene, category});
    auto it = ancestor_cache.find(c);
    if (it == ancestor_cache.end()) {
      it = ancestor_cache.emplace(c, h.ancestors(c)).first;
    }
    for (int a : it->second) {
      out.insert({gene, h.category_ids()[a]});
    }
  }
  return AnnotationSet::from_pairs(std::move(out), true);
}

/// Annotations restricted to categories present in `h`. For a hierarchy
/// induced by filter_categories this keeps the set closed.
inline AnnotationSet restrict_to(const AnnotationSet& ann, const Hierarchy& h) {
  std::set<std::pair<std::string, std::string>> kept;
  for (const auto& p : ann.pairs()) {
    if (h.contains(p.second)) kept.insert(p);
  }
  return AnnotationSet::from_pairs(std::move(kept), ann.closed());
}

/// Positive gene count per category.
inline std::map<std::string, int> positive_counts(const AnnotationSet& ann) {
  std::map<std::string, int> counts;
  for (const auto& [gene, category] : ann.pairs()) ++counts[category];
  return counts;
}

/// Sub-hierarchy over the retained categories, each rewired to its nearest
/// retained ancestors: an output edge (m, c) exists iff some original path
/// m -> ... -> c passes only through dropped categories.
inline Hierarchy induced_hierarchy(const Hierarchy& h,
                                   const std::vector<bool>& retained) {
  if (static_cast<int>(retained.size()) != h.size()) {
    throw InvalidInputError("induced_hierarchy: retained mask size mismatch");
  }
  std::vector<std::string> retained_ids;
  for (int c = 0; c < h.size(); ++c) {
    if (retained[c]) retained_ids.push_back(h.category_ids()[c]);
  }

  std::vector<std::pair<std::string, std::string>> induced;
  for (int c = 0; c < h.size(); ++c) {
    if (!retained[c]) continue;
    // climb through dropped categories only
    std::vector<bool> visited(h.size(), false);
    std::vector<int> stack = h.parents(c);
    std::set<int> nearest;
    while (!stack.empty()) {
      const int m = stack.back();
      stack.pop_back();
      if (visited[m]) continue;
      visited[m] = true;
      if (retained[m]) {
        nearest.insert(m);
      } else {
        for (int up : h.parents(m)) stack.push_back(up);
      }
    }
    for (int m : nearest) {
      induced.push_back({h.category_ids()[m], h.category_ids()[c]});
    }
  }
  return Hierarchy::from_edges(induced, retained_ids);
}

/// Keeps categories whose positive count lies in [min_pos, max_pos] and
/// rewires the survivors with induced_hierarchy.
inline std::pair<Hierarchy, AnnotationSet> filter_categories(
    const Hierarchy& h, const AnnotationSet& ann, int min_pos, int max_pos) {
  if (min_pos > max_pos) {
    throw InvalidInputError("filter_categories: min_pos > max_pos");
  }
  if (!ann.closed()) {
    throw InvalidInputError(
        "filter_categories: annotation set must be closed first");
  }
  const auto counts = positive_counts(ann);
  std::vector<bool> retained(h.size(), false);
  for (int c = 0; c < h.size(); ++c) {
    auto it = counts.find(h.category_ids()[c]);
    const int n = it == counts.end() ? 0 : it->second;
    retained[c] = n >= min_pos && n <= max_pos;
  }
  Hierarchy filtered = induced_hierarchy(h, retained);
  return {filtered, restrict_to(ann, filtered)};
}

}  // namespace hierprop
