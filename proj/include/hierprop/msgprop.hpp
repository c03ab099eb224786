// Sequential message passing over the hierarchy: each category gets an
// independent GRF solve whose bias is augmented by the already-computed
// scores of its hierarchy neighbours. Down passes parent scores to
// children (roots first); Up passes child scores to parents (leaves
// first).
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hierprop/bias.hpp"
#include "hierprop/error.hpp"
#include "hierprop/grf.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"

namespace hierprop {

namespace detail {

inline void check_bias_matrix(const SparseNetwork& net,
                              const LabelBiasMatrix& bias,
                              const Hierarchy& h, const char* context) {
  if (bias.gene_ids != net.gene_ids()) {
    throw InvalidInputError(std::string(context) +
                            ": bias gene list does not match network");
  }
  if (bias.category_ids != h.category_ids()) {
    throw InvalidInputError(std::string(context) +
                            ": bias category list does not match hierarchy");
  }
  if (bias.values.rows() != net.size() || bias.values.cols() != h.size()) {
    throw InvalidInputError(std::string(context) +
                            ": bias matrix has inconsistent dimensions");
  }
  if (!bias.values.allFinite()) {
    throw InvalidInputError(std::string(context) +
                            ": bias contains non-finite values");
  }
}

enum class MsgDirection { kDown, kUp };

inline DiscriminantMatrix message_propagate(const SparseNetwork& net,
                                            const LabelBiasMatrix& bias,
                                            const Hierarchy& h,
                                            MsgDirection direction,
                                            const SolverSettings& settings) {
  check_bias_matrix(net, bias, h,
                    direction == MsgDirection::kDown ? "down_propagate"
                                                     : "up_propagate");
  std::vector<int> order = h.topological_order();
  if (direction == MsgDirection::kUp) {
    std::reverse(order.begin(), order.end());
  }
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(net.size(), h.size());
  for (int c : order) {
    Eigen::VectorXd b = bias.values.col(c);
    const std::vector<int>& senders = direction == MsgDirection::kDown
                                          ? h.parents(c)
                                          : h.children(c);
    for (int m : senders) b += f.col(m);
    f.col(c) = solve_grf_scores(net, b, settings);
  }
  return {bias.gene_ids, bias.category_ids, std::move(f)};
}

}  // namespace detail

/// Roots first: a child's effective bias is its own bias plus the final
/// scores of all its parents.
inline DiscriminantMatrix down_propagate(const SparseNetwork& net,
                                         const LabelBiasMatrix& bias,
                                         const Hierarchy& h,
                                         const SolverSettings& settings = {}) {
  return detail::message_propagate(net, bias, h, detail::MsgDirection::kDown,
                                   settings);
}

/// Leaves first: a parent's effective bias is its own bias plus the final
/// scores of all its children.
inline DiscriminantMatrix up_propagate(const SparseNetwork& net,
                                       const LabelBiasMatrix& bias,
                                       const Hierarchy& h,
                                       const SolverSettings& settings = {}) {
  return detail::message_propagate(net, bias, h, detail::MsgDirection::kUp,
                                   settings);
}

}  // namespace hierprop
