// End-to-end scoring pipelines: one entry point that takes a method
// name, builds the label biases from the training annotations, and runs
// the corresponding propagation over the network. Used by the CLI and by
// the evaluation protocols.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hierprop/bias.hpp"
#include "hierprop/error.hpp"
#include "hierprop/eval.hpp"
#include "hierprop/grf.hpp"
#include "hierprop/hlprop.hpp"
#include "hierprop/msgprop.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/reconcile.hpp"
#include "hierprop/util.hpp"

namespace hierprop {

enum class Method { kGrf, kHlBias, kHlProp, kDown, kUp, kGrfIr };

inline Method parse_method(const std::string& name) {
  if (name == "grf") return Method::kGrf;
  if (name == "hlbias") return Method::kHlBias;
  if (name == "hlprop") return Method::kHlProp;
  if (name == "down") return Method::kDown;
  if (name == "up") return Method::kUp;
  if (name == "grf-ir") return Method::kGrfIr;
  throw InvalidInputError("unknown method: " + name);
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::kGrf: return "grf";
    case Method::kHlBias: return "hlbias";
    case Method::kHlProp: return "hlprop";
    case Method::kDown: return "down";
    case Method::kUp: return "up";
    case Method::kGrfIr: return "grf-ir";
  }
  return "?";
}

struct PipelineSettings {
  SolverSettings solver;
  HLPropSettings hlprop;
  // HLBias treatment of fully unlabeled genes: the baseline constant in
  // the cross-validation setting, -1 in the novel setting where every
  // unannotated gene is a candidate negative.
  HlbiasUnlabeled hlbias_unlabeled = HlbiasUnlabeled::kBaselineK;
};

inline LabelBiasMatrix method_bias(Method method, const AnnotationSet& ann,
                                   const Hierarchy& h,
                                   const std::vector<std::string>& genes,
                                   const PipelineSettings& settings = {}) {
  BiasOptions options;
  options.method =
      method == Method::kHlBias ? BiasMethod::kHlBias : BiasMethod::kBaseline;
  options.hlbias_unlabeled = settings.hlbias_unlabeled;
  return bias_matrix(ann, h, genes, options);
}

/// Score every gene for every category with the chosen method. The bias
/// construction is the only place the training annotations enter.
inline DiscriminantMatrix run_method(Method method, const SparseNetwork& net,
                                     const AnnotationSet& ann,
                                     const Hierarchy& h,
                                     const PipelineSettings& settings = {}) {
  const LabelBiasMatrix bias =
      method_bias(method, ann, h, net.gene_ids(), settings);
  switch (method) {
    case Method::kHlProp: {
      HLPropSettings hp = settings.hlprop;
      hp.inner = settings.solver;
      return solve_hlprop(net, bias, h, hp).scores;
    }
    case Method::kDown:
      return down_propagate(net, bias, h, settings.solver);
    case Method::kUp:
      return up_propagate(net, bias, h, settings.solver);
    case Method::kGrf:
    case Method::kHlBias:
    case Method::kGrfIr: {
      Eigen::MatrixXd scores(net.size(), h.size());
      parallel_for(h.size(), [&](int c) {
        scores.col(c) =
            solve_grf_scores(net, bias.values.col(c), settings.solver);
      });
      DiscriminantMatrix out{bias.gene_ids, bias.category_ids,
                             std::move(scores)};
      if (method == Method::kGrfIr) return reconcile_matrix(out, h);
      return out;
    }
  }
  throw InvalidInputError("run_method: unreachable");
}

/// Adapter for the evaluation protocols.
inline auto score_fn(Method method, const PipelineSettings& settings = {}) {
  return [method, settings](const SparseNetwork& net, const AnnotationSet& ann,
                            const Hierarchy& h) -> Eigen::MatrixXd {
    return run_method(method, net, ann, h, settings).scores;
  };
}

inline EvalReport cross_validate_method(
    Method method, const SparseNetwork& net, const AnnotationSet& ann,
    const Hierarchy& h, int folds, std::uint64_t seed,
    const PipelineSettings& settings = {},
    const std::vector<std::pair<long, long>>& buckets = default_buckets()) {
  return cross_validate(score_fn(method, settings), net, ann, h, folds, seed,
                        buckets);
}

inline EvalReport novel_eval_method(
    Method method, const SparseNetwork& net, const AnnotationSet& ann_old,
    const AnnotationSet& ann_new, const Hierarchy& h, int min_new,
    PipelineSettings settings = {},
    const std::vector<std::pair<long, long>>& buckets = default_buckets()) {
  settings.hlbias_unlabeled = HlbiasUnlabeled::kNegativeOne;
  return novel_eval(score_fn(method, settings), net, ann_old, ann_new, h,
                    min_new, buckets);
}

}  // namespace hierprop
