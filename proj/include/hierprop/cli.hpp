// Command-line front end. Batch subcommands only; every run is
// deterministic given its flags and seed. Exit codes: 0 success, 1 usage
// error, 2 data/input error, 3 convergence failure.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "hierprop/bias.hpp"
#include "hierprop/error.hpp"
#include "hierprop/eval.hpp"
#include "hierprop/grf.hpp"
#include "hierprop/hlprop.hpp"
#include "hierprop/io.hpp"
#include "hierprop/msgprop.hpp"
#include "hierprop/netbuild.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/pipeline.hpp"
#include "hierprop/reconcile.hpp"
#include "hierprop/synth.hpp"
#include "hierprop/util.hpp"

namespace hierprop {
namespace cli {

inline std::vector<std::pair<long, long>> parse_buckets(
    const std::string& spec) {
  std::vector<std::pair<long, long>> buckets;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    if (comma == std::string::npos) comma = spec.size();
    const std::string part = spec.substr(start, comma - start);
    const std::size_t dash = part.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 == part.size()) {
      throw InvalidInputError("bad bucket '" + part +
                              "'; expected LO-HI,LO-HI,...");
    }
    const long lo = parse_long(part.substr(0, dash), "bucket bound");
    const long hi = parse_long(part.substr(dash + 1), "bucket bound");
    if (lo > hi) {
      throw InvalidInputError("bad bucket '" + part + "': lo > hi");
    }
    buckets.emplace_back(lo, hi);
    start = comma + 1;
  }
  if (buckets.empty()) {
    throw InvalidInputError("empty bucket spec");
  }
  return buckets;
}

struct CommonFlags {
  std::string net_path;
  std::string ann_path;
  std::string hierarchy_path;
  std::string method = "grf";
  double lambda = 1.0;
  double cg_tol = 1e-8;
  int sweeps = 100;
  int min_annotations = 3;
  int max_annotations = 300;
  bool drop_iea = false;
};

inline void add_method_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--method", flags.method, "Scoring method")
      ->check(CLI::IsMember(
          {"grf", "hlbias", "hlprop", "down", "up", "grf-ir"}))
      ->capture_default_str();
  cmd->add_option("--lambda", flags.lambda, "Hierarchy coupling strength")
      ->capture_default_str();
  cmd->add_option("--cg-tol", flags.cg_tol,
                  "Conjugate-gradient relative residual tolerance")
      ->capture_default_str();
  cmd->add_option("--sweeps", flags.sweeps, "Maximum joint-solve sweeps")
      ->capture_default_str();
  cmd->add_option("--min-annotations", flags.min_annotations,
                  "Smallest annotation count for a category to be kept")
      ->capture_default_str();
  cmd->add_option("--max-annotations", flags.max_annotations,
                  "Largest annotation count for a category to be kept")
      ->capture_default_str();
  cmd->add_flag("--drop-iea", flags.drop_iea,
                "Skip annotation records with the IEA evidence code");
}

inline PipelineSettings pipeline_settings(const CommonFlags& flags) {
  PipelineSettings s;
  s.solver.tolerance = flags.cg_tol;
  s.hlprop.lambda = flags.lambda;
  s.hlprop.max_sweeps = flags.sweeps;
  return s;
}

// Load + close + count-filter the training inputs shared by propagate and
// evaluate.
struct LoadedInputs {
  SparseNetwork net;
  Hierarchy h;
  AnnotationSet ann;
};

inline LoadedInputs load_inputs(const CommonFlags& flags) {
  SparseNetwork net = read_network(flags.net_path);
  Hierarchy h = read_hierarchy(flags.hierarchy_path);
  AnnotationSet ann =
      true_path_closure(read_annotations(flags.ann_path, flags.drop_iea), h);
  auto [filtered_h, filtered_ann] =
      filter_categories(h, ann, flags.min_annotations, flags.max_annotations);
  return {std::move(net), std::move(filtered_h), std::move(filtered_ann)};
}

inline int run_build_network(const std::string& features_path,
                             const std::string& edges_path, int top_k,
                             const std::string& out_path) {
  SparseNetwork net = features_path.empty()
                          ? read_network(edges_path)
                          : pearson_network(read_features(features_path),
                                            top_k);
  write_network(out_path, normalize(net));
  return 0;
}

inline int run_combine(const std::vector<std::string>& net_paths,
                       const std::string& out_path) {
  std::vector<SparseNetwork> nets;
  for (const std::string& p : net_paths) nets.push_back(read_network(p));
  // bring every network onto the union universe, in sorted order
  std::set<std::string> universe_set;
  for (const SparseNetwork& n : nets) {
    universe_set.insert(n.gene_ids().begin(), n.gene_ids().end());
  }
  const std::vector<std::string> universe(universe_set.begin(),
                                          universe_set.end());
  for (SparseNetwork& n : nets) n = align_genes(n, universe);
  write_network(out_path, combine(nets));
  return 0;
}

inline void log_oracle_gap(const CommonFlags& flags, const LoadedInputs& in,
                           const PipelineSettings& settings,
                           const DiscriminantMatrix& scores) {
  const Method method = parse_method(flags.method);
  const int n = in.net.size();
  const int d = in.h.size();
  const LabelBiasMatrix bias =
      method_bias(method, in.ann, in.h, in.net.gene_ids(), settings);
  double gap = 0;
  if (method == Method::kHlProp) {
    const Eigen::MatrixXd a = assemble_kron(in.net, in.h, flags.lambda);
    Eigen::VectorXd vec_y(static_cast<long>(n) * d);
    for (int c = 0; c < d; ++c) vec_y.segment(c * n, n) = bias.values.col(c);
    const Eigen::VectorXd dense = solve_dense_oracle(a, vec_y);
    for (int c = 0; c < d; ++c) {
      gap = std::max(gap, (scores.scores.col(c) - dense.segment(c * n, n))
                              .lpNorm<Eigen::Infinity>());
    }
  } else if (method == Method::kGrf || method == Method::kHlBias) {
    if (static_cast<long>(n) * n > 4000000) {
      throw SizeError("--oracle: instance too large for a dense solve");
    }
    const Eigen::MatrixXd a =
        Eigen::MatrixXd::Identity(n, n) +
        Eigen::MatrixXd(in.net.degrees().asDiagonal()) -
        Eigen::MatrixXd(in.net.weights());
    for (int c = 0; c < d; ++c) {
      const Eigen::VectorXd dense = solve_dense_oracle(a, bias.values.col(c));
      gap = std::max(gap,
                     (scores.scores.col(c) - dense).lpNorm<Eigen::Infinity>());
    }
  } else {
    throw InvalidInputError("--oracle supports methods grf, hlbias, hlprop");
  }
  std::cerr << "oracle: max |iterative - dense| = " << format_double(gap)
            << "\n";
}

inline int run_propagate(const CommonFlags& flags, bool oracle,
                         const std::string& out_path) {
  const LoadedInputs in = load_inputs(flags);
  const PipelineSettings settings = pipeline_settings(flags);
  const DiscriminantMatrix scores =
      run_method(parse_method(flags.method), in.net, in.ann, in.h, settings);
  if (oracle) log_oracle_gap(flags, in, settings, scores);
  write_scores(out_path, scores);
  return 0;
}

inline int run_reconcile(const std::string& scores_path,
                         const std::string& hierarchy_path,
                         const std::string& out_path) {
  DiscriminantMatrix scores = read_scores(scores_path);
  const Hierarchy h = read_hierarchy(hierarchy_path);
  write_scores(out_path, reconcile_matrix(scores, h));
  return 0;
}

inline void write_report_files(const std::string& prefix,
                               const EvalReport& report) {
  write_report_json(prefix + ".json", report);
  write_report_tsv(prefix + ".tsv", report);
  write_cumulative_tsv(prefix + "_cumulative.tsv", report);
}

inline int run_evaluate_cv(const CommonFlags& flags, int folds,
                           std::uint64_t seed, const std::string& buckets,
                           const std::string& report_prefix) {
  const LoadedInputs in = load_inputs(flags);
  const EvalReport report = cross_validate_method(
      parse_method(flags.method), in.net, in.ann, in.h, folds, seed,
      pipeline_settings(flags), parse_buckets(buckets));
  write_report_files(report_prefix, report);
  std::cout << "categories " << report.records.size() << " (skipped "
            << report.skipped.size() << "), mean error "
            << format_double(report.mean_error) << ", median "
            << format_double(report.median_error) << ", SE "
            << format_double(report.standard_error) << "\n";
  return 0;
}

inline int run_evaluate_novel(const CommonFlags& flags,
                              const std::string& ann_old_path,
                              const std::string& ann_new_path, int min_new,
                              const std::string& buckets,
                              const std::string& report_prefix) {
  SparseNetwork net = read_network(flags.net_path);
  Hierarchy h = read_hierarchy(flags.hierarchy_path);
  AnnotationSet ann_old =
      true_path_closure(read_annotations(ann_old_path, flags.drop_iea), h);
  AnnotationSet ann_new =
      true_path_closure(read_annotations(ann_new_path, flags.drop_iea), h);
  // category retention is decided on the training-era counts only
  auto [filtered_h, filtered_old] = filter_categories(
      h, ann_old, flags.min_annotations, flags.max_annotations);
  AnnotationSet filtered_new = restrict_to(ann_new, filtered_h);
  const EvalReport report = novel_eval_method(
      parse_method(flags.method), net, filtered_old, filtered_new, filtered_h,
      min_new, pipeline_settings(flags), parse_buckets(buckets));
  write_report_files(report_prefix, report);
  std::cout << "categories " << report.records.size() << " (skipped "
            << report.skipped.size() << "), mean error "
            << format_double(report.mean_error) << ", median "
            << format_double(report.median_error) << ", SE "
            << format_double(report.standard_error) << "\n";
  return 0;
}

inline int run_synth(const SynthSpec& spec, std::uint64_t seed,
                     const std::string& out_dir) {
  const SynthInstance inst = generate(spec, seed);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_network((dir / "network.tsv").string(), inst.net);
  write_hierarchy((dir / "hierarchy.tsv").string(), inst.h);
  write_annotations((dir / "annotations_full.tsv").string(), inst.ann_full);
  write_annotations((dir / "annotations_observed.tsv").string(),
                    inst.ann_observed);
  return 0;
}

/// Builds the CLI11 application; `rc` receives the chosen subcommand's
/// exit code when parsing succeeds.
inline int run(int argc, const char* const* argv) {
  CLI::App app{"Hierarchy-aware gene function prediction over similarity "
               "networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from a key=value config file");
  app.set_version_flag("--version", "hierprop 1.0.0");

  int rc = 0;

  // build-network
  auto* bn = app.add_subcommand(
      "build-network", "Build a normalized similarity network");
  auto bn_flags = std::make_shared<std::string>();
  auto bn_edges = std::make_shared<std::string>();
  auto bn_topk = std::make_shared<int>(50);
  auto bn_out = std::make_shared<std::string>();
  auto* bn_f = bn->add_option("--features", *bn_flags,
                              "Gene-by-feature TSV; Pearson edges");
  auto* bn_e = bn->add_option("--edges", *bn_edges, "Prebuilt edge TSV");
  bn_f->excludes(bn_e);
  bn_e->excludes(bn_f);
  bn->add_option("--top-k", *bn_topk,
                 "Keep an edge when it ranks in either endpoint's top k")
      ->capture_default_str();
  bn->add_option("--out", *bn_out, "Output network TSV")->required();
  bn->callback([=, &rc] {
    if (bn_flags->empty() && bn_edges->empty()) {
      throw CLI::RequiredError("--features or --edges");
    }
    rc = run_build_network(*bn_flags, *bn_edges, *bn_topk, *bn_out);
  });

  // combine
  auto* cb = app.add_subcommand("combine",
                                "Sum networks and renormalize the composite");
  auto cb_nets = std::make_shared<std::vector<std::string>>();
  auto cb_out = std::make_shared<std::string>();
  cb->add_option("--net", *cb_nets, "Input network TSV (repeatable)")
      ->required()
      ->expected(-1);
  cb->add_option("--out", *cb_out, "Output network TSV")->required();
  cb->callback([=, &rc] { rc = run_combine(*cb_nets, *cb_out); });

  // propagate
  auto* pr = app.add_subcommand("propagate",
                                "Score genes for every category");
  auto pr_flags = std::make_shared<CommonFlags>();
  auto pr_oracle = std::make_shared<bool>(false);
  auto pr_out = std::make_shared<std::string>();
  pr->add_option("--net", pr_flags->net_path, "Network TSV")->required();
  pr->add_option("--ann", pr_flags->ann_path, "Annotation TSV")->required();
  pr->add_option("--hierarchy", pr_flags->hierarchy_path, "Hierarchy TSV")
      ->required();
  add_method_flags(pr, *pr_flags);
  pr->add_flag("--oracle", *pr_oracle,
               "Also solve densely and log the elementwise gap");
  pr->add_option("--out", *pr_out, "Output score TSV")->required();
  pr->callback(
      [=, &rc] { rc = run_propagate(*pr_flags, *pr_oracle, *pr_out); });

  // reconcile
  auto* rec = app.add_subcommand(
      "reconcile", "Project scores onto hierarchy-consistent order");
  auto rec_scores = std::make_shared<std::string>();
  auto rec_h = std::make_shared<std::string>();
  auto rec_out = std::make_shared<std::string>();
  rec->add_option("--scores", *rec_scores, "Input score TSV")->required();
  rec->add_option("--hierarchy", *rec_h, "Hierarchy TSV")->required();
  rec->add_option("--out", *rec_out, "Output score TSV")->required();
  rec->callback(
      [=, &rc] { rc = run_reconcile(*rec_scores, *rec_h, *rec_out); });

  // evaluate
  auto* ev = app.add_subcommand("evaluate",
                                "Cross-validated or novel-annotation report");
  auto ev_flags = std::make_shared<CommonFlags>();
  auto ev_mode = std::make_shared<std::string>("cv");
  auto ev_folds = std::make_shared<int>(3);
  auto ev_seed = std::make_shared<std::uint64_t>(0);
  auto ev_old = std::make_shared<std::string>();
  auto ev_new = std::make_shared<std::string>();
  auto ev_min_new = std::make_shared<int>(3);
  auto ev_buckets = std::make_shared<std::string>("3-10,11-30,31-100,101-300");
  auto ev_report = std::make_shared<std::string>();
  ev->add_option("--mode", *ev_mode, "cv or novel")
      ->check(CLI::IsMember({"cv", "novel"}))
      ->capture_default_str();
  ev->add_option("--net", ev_flags->net_path, "Network TSV")->required();
  ev->add_option("--hierarchy", ev_flags->hierarchy_path, "Hierarchy TSV")
      ->required();
  ev->add_option("--ann", ev_flags->ann_path, "Annotation TSV (cv mode)");
  ev->add_option("--folds", *ev_folds, "Cross-validation folds")
      ->capture_default_str();
  ev->add_option("--seed", *ev_seed, "Fold-assignment seed")
      ->capture_default_str();
  ev->add_option("--ann-old", *ev_old, "Training-era annotation TSV (novel)");
  ev->add_option("--ann-new", *ev_new, "Later annotation TSV (novel)");
  ev->add_option("--min-new", *ev_min_new,
                 "Newly annotated genes needed to evaluate a category")
      ->capture_default_str();
  add_method_flags(ev, *ev_flags);
  ev->add_option("--buckets", *ev_buckets, "Category-size buckets LO-HI,...")
      ->capture_default_str();
  ev->add_option("--report", *ev_report,
                 "Report path prefix (.json/.tsv/_cumulative.tsv)")
      ->required();
  ev->callback([=, &rc] {
    if (*ev_mode == "cv") {
      if (ev_flags->ann_path.empty()) {
        throw CLI::RequiredError("--ann (cv mode)");
      }
      rc = run_evaluate_cv(*ev_flags, *ev_folds, *ev_seed, *ev_buckets,
                           *ev_report);
    } else {
      if (ev_old->empty() || ev_new->empty()) {
        throw CLI::RequiredError("--ann-old and --ann-new (novel mode)");
      }
      rc = run_evaluate_novel(*ev_flags, *ev_old, *ev_new, *ev_min_new,
                              *ev_buckets, *ev_report);
    }
  });

  // synth
  auto* sy = app.add_subcommand("synth",
                                "Generate a synthetic benchmark instance");
  auto sy_spec = std::make_shared<SynthSpec>();
  auto sy_seed = std::make_shared<std::uint64_t>(0);
  auto sy_dir = std::make_shared<std::string>();
  sy->add_option("--seed", *sy_seed, "Generator seed")->capture_default_str();
  sy->add_option("--genes", sy_spec->n_genes, "Gene count")
      ->capture_default_str();
  sy->add_option("--depth", sy_spec->depth, "Category tree levels")
      ->capture_default_str();
  sy->add_option("--branching", sy_spec->branching,
                 "Children per internal category")
      ->capture_default_str();
  sy->add_option("--p-in", sy_spec->p_in, "Edge probability, shared leaf")
      ->capture_default_str();
  sy->add_option("--p-mid", sy_spec->p_mid,
                 "Edge probability, shared internal ancestor")
      ->capture_default_str();
  sy->add_option("--p-out", sy_spec->p_out, "Edge probability, otherwise")
      ->capture_default_str();
  sy->add_option("--hide-fraction", sy_spec->hide_fraction,
                 "Fraction of genes with truncated observed annotations")
      ->capture_default_str();
  sy->add_option("--out-dir", *sy_dir, "Output directory")->required();
  sy->callback([=, &rc] { rc = run_synth(*sy_spec, *sy_seed, *sy_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}

}  // namespace cli
}  // namespace hierprop
