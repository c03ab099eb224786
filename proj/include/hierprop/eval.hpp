// Ranking metrics (AUC-ROC, AUPRC), report aggregation, and the two
// evaluation protocols: k-fold cross-validation with pooled held-out
// scores and the old/new annotation-snapshot ("novel") protocol. The
// protocols are templated on a scoring callable
//   Eigen::MatrixXd fn(net, training_ann, h)   // n x d scores
// so any method (or a test oracle) can be plugged in.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hierprop/bias.hpp"
#include "hierprop/error.hpp"
#include "hierprop/network.hpp"
#include "hierprop/ontology.hpp"
#include "hierprop/util.hpp"

namespace hierprop {

/// Probability that a random positive outranks a random negative; ties
/// count half. Computed by one descending sweep with tied scores grouped,
/// so the numerator (#concordant + 0.5 #tied) is an exact integer
/// multiple of one half.
inline double auc_roc(const Eigen::VectorXd& scores,
                      const std::vector<char>& labels) {
  const int n = static_cast<int>(scores.size());
  if (static_cast<int>(labels.size()) != n) {
    throw InvalidInputError("auc_roc: scores and labels differ in length");
  }
  if (!scores.allFinite()) {
    throw InvalidInputError("auc_roc: scores contain non-finite values");
  }
  long n_pos = 0;
  for (char l : labels) n_pos += l ? 1 : 0;
  const long n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetricError(
        "auc_roc: needs at least one positive and one negative");
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return scores[a] > scores[b];
  });
  double concordant = 0;
  double tied = 0;
  long neg_seen = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    long group_pos = 0;
    long group_neg = 0;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]]) {
        ++group_pos;
      } else {
        ++group_neg;
      }
      ++j;
    }
    // positives in this group beat every strictly lower-scored negative
    concordant +=
        static_cast<double>(group_pos) * (n_neg - neg_seen - group_neg);
    tied += static_cast<double>(group_pos) * group_neg;
    neg_seen += group_neg;
    i = j;
  }
  return (concordant + 0.5 * tied) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Area under the precision-recall step curve by descending sweep, tied
/// scores entering together; no interpolation between steps.
inline double auprc(const Eigen::VectorXd& scores,
                    const std::vector<char>& labels) {
  const int n = static_cast<int>(scores.size());
  if (static_cast<int>(labels.size()) != n) {
    throw InvalidInputError("auprc: scores and labels differ in length");
  }
  if (!scores.allFinite()) {
    throw InvalidInputError("auprc: scores contain non-finite values");
  }
  long n_pos = 0;
  for (char l : labels) n_pos += l ? 1 : 0;
  if (n_pos == 0) {
    throw UndefinedMetricError("auprc: needs at least one positive");
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return scores[a] > scores[b];
  });
  double area = 0;
  double prev_recall = 0;
  long tp = 0;
  long fp = 0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    const double recall = static_cast<double>(tp) / n_pos;
    const double precision = static_cast<double>(tp) / (tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return area;
}

struct EvalRecord {
  std::string category_id;
  long n_pos = 0;      // positives in the evaluation pool
  double auc = 0;      // AUC-ROC
  double error = 0;    // 1 - AUC-ROC
  double auprc = 0;
};

struct BucketSummary {
  long lo = 0;  // inclusive n_pos bounds
  long hi = 0;
  long count = 0;
  double mean_error = 0;  // meaningful only when count > 0
};

struct CumulativePoint {
  double percentile = 0;  // fraction of categories with error <= this one
  double error = 0;
};

struct EvalReport {
  std::vector<EvalRecord> records;
  std::vector<std::string> skipped;  // categories lacking both classes
  double mean_error = 0;
  double median_error = 0;
  double standard_error = 0;  // sample stdev / sqrt(N)
  std::vector<BucketSummary> buckets;
  std::vector<CumulativePoint> cumulative;
};

inline std::vector<std::pair<long, long>> default_buckets() {
  return {{3, 10}, {11, 30}, {31, 100}, {101, 300}};
}

inline EvalReport summarize(
    std::vector<EvalRecord> records,
    const std::vector<std::pair<long, long>>& buckets = default_buckets()) {
  if (records.empty()) {
    throw InvalidInputError("summarize: no records");
  }
  EvalReport report;
  report.records = std::move(records);
  const int n = static_cast<int>(report.records.size());
  std::vector<double> errors(n);
  for (int i = 0; i < n; ++i) errors[i] = report.records[i].error;

  report.mean_error =
      std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  report.median_error = n % 2 == 1
                            ? sorted[n / 2]
                            : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  if (n > 1) {
    double ss = 0;
    for (double e : errors) ss += (e - report.mean_error) * (e - report.mean_error);
    report.standard_error = std::sqrt(ss / (n - 1)) / std::sqrt(double(n));
  }
  for (const auto& [lo, hi] : buckets) {
    BucketSummary b{lo, hi, 0, 0};
    double sum = 0;
    for (const EvalRecord& r : report.records) {
      if (r.n_pos >= lo && r.n_pos <= hi) {
        ++b.count;
        sum += r.error;
      }
    }
    if (b.count > 0) b.mean_error = sum / b.count;
    report.buckets.push_back(b);
  }
  report.cumulative.resize(n);
  for (int i = 0; i < n; ++i) {
    report.cumulative[i] = {static_cast<double>(i + 1) / n, sorted[i]};
  }
  return report;
}

/// Deterministic fold assignment: a seeded shuffle of gene indices split
/// into folds of near-equal size (the first n mod folds get the extra
/// gene).
inline std::vector<int> assign_folds(int n, int folds, std::uint64_t seed) {
  if (folds < 2) {
    throw InvalidInputError("assign_folds: folds must be >= 2");
  }
  if (folds > n) {
    throw InvalidInputError("assign_folds: more folds than genes");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  deterministic_shuffle(perm, rng);
  std::vector<int> fold(n);
  int start = 0;
  for (int f = 0; f < folds; ++f) {
    const int size = n / folds + (f < n % folds ? 1 : 0);
    for (int j = start; j < start + size; ++j) fold[perm[j]] = f;
    start += size;
  }
  return fold;
}

/// K-fold cross-validation. Each fold's held-out genes lose all their
/// annotations when the training set is built; their scores are taken
/// from the model trained without them, pooled across folds, and each
/// category is scored once on the pooled vector against the full
/// annotation set. Categories without both a positive and a negative in
/// the pool are skipped and listed in the report.
template <typename ScoreFn>
EvalReport cross_validate(
    ScoreFn&& fn, const SparseNetwork& net, const AnnotationSet& ann,
    const Hierarchy& h, int folds, std::uint64_t seed,
    const std::vector<std::pair<long, long>>& buckets = default_buckets()) {
  if (!ann.closed()) {
    throw InvalidInputError("cross_validate: annotations must be closed");
  }
  const int n = net.size();
  const int d = h.size();
  const std::vector<int> fold = assign_folds(n, folds, seed);
  const std::vector<std::string>& genes = net.gene_ids();

  Eigen::MatrixXd pooled(n, d);
  for (int f = 0; f < folds; ++f) {
    std::set<std::string> held_out;
    for (int g = 0; g < n; ++g) {
      if (fold[g] == f) held_out.insert(genes[g]);
    }
    const AnnotationSet training = ann.without_genes(held_out);
    const Eigen::MatrixXd scores = fn(net, training, h);
    if (scores.rows() != n || scores.cols() != d) {
      throw InvalidInputError(
          "cross_validate: scoring function returned wrong shape");
    }
    for (int g = 0; g < n; ++g) {
      if (fold[g] == f) pooled.row(g) = scores.row(g);
    }
  }

  const AnnotationIndex truth(ann, h, genes);
  std::vector<EvalRecord> records;
  std::vector<std::string> skipped;
  for (int c = 0; c < d; ++c) {
    const long n_pos = static_cast<long>(truth.positives(c).size());
    if (n_pos == 0 || n_pos == n) {
      skipped.push_back(h.category_ids()[c]);
      continue;
    }
    std::vector<char> labels(n, 0);
    for (int g : truth.positives(c)) labels[g] = 1;
    const double auc = auc_roc(pooled.col(c), labels);
    records.push_back({h.category_ids()[c], n_pos, auc, 1.0 - auc,
                       auprc(pooled.col(c), labels)});
  }
  if (records.empty()) {
    throw InvalidInputError("cross_validate: no scorable categories");
  }
  EvalReport report = summarize(std::move(records), buckets);
  report.skipped = std::move(skipped);
  return report;
}

/// Novel-annotation protocol: train once on the old snapshot; a category
/// is evaluable when at least min_new genes gained it in the new
/// snapshot. Positives are those newly annotated genes; negatives are
/// every other gene not annotated to the category in the old snapshot.
template <typename ScoreFn>
EvalReport novel_eval(
    ScoreFn&& fn, const SparseNetwork& net, const AnnotationSet& ann_old,
    const AnnotationSet& ann_new, const Hierarchy& h, int min_new,
    const std::vector<std::pair<long, long>>& buckets = default_buckets()) {
  if (!ann_old.closed() || !ann_new.closed()) {
    throw InvalidInputError("novel_eval: annotation sets must be closed");
  }
  if (min_new < 1) {
    throw InvalidInputError("novel_eval: min_new must be >= 1");
  }
  const int n = net.size();
  const int d = h.size();
  const std::vector<std::string>& genes = net.gene_ids();
  const Eigen::MatrixXd scores = fn(net, ann_old, h);
  if (scores.rows() != n || scores.cols() != d) {
    throw InvalidInputError(
        "novel_eval: scoring function returned wrong shape");
  }

  const AnnotationIndex old_idx(ann_old, h, genes);
  const AnnotationIndex new_idx(ann_new, h, genes);
  std::vector<EvalRecord> records;
  std::vector<std::string> skipped;
  for (int c = 0; c < d; ++c) {
    std::vector<char> old_pos(n, 0);
    for (int g : old_idx.positives(c)) old_pos[g] = 1;
    std::vector<int> novel;
    for (int g : new_idx.positives(c)) {
      if (!old_pos[g]) novel.push_back(g);
    }
    if (static_cast<int>(novel.size()) < min_new) continue;
    // evaluation pool: novel positives plus all genes outside the old
    // annotation; old positives are excluded entirely
    std::vector<int> pool;
    std::vector<char> labels;
    std::vector<char> is_novel(n, 0);
    for (int g : novel) is_novel[g] = 1;
    for (int g = 0; g < n; ++g) {
      if (old_pos[g]) continue;
      pool.push_back(g);
      labels.push_back(is_novel[g]);
    }
    if (static_cast<long>(novel.size()) == static_cast<long>(pool.size())) {
      skipped.push_back(h.category_ids()[c]);
      continue;
    }
    Eigen::VectorXd pool_scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      pool_scores[i] = scores(pool[i], c);
    }
    const double auc = auc_roc(pool_scores, labels);
    records.push_back({h.category_ids()[c],
                       static_cast<long>(novel.size()), auc, 1.0 - auc,
                       auprc(pool_scores, labels)});
  }
  if (records.empty()) {
    throw InvalidInputError("novel_eval: no evaluable categories");
  }
  EvalReport report = summarize(std::move(records), buckets);
  report.skipped = std::move(skipped);
  return report;
}

}  // namespace hierprop
