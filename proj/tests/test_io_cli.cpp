#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hierprop/cli.hpp"
#include "hierprop/io.hpp"

namespace fs = std::filesystem;

namespace {

using hierprop::AnnotationSet;
using hierprop::DiscriminantMatrix;
using hierprop::Edge;
using hierprop::FeatureMatrix;
using hierprop::Hierarchy;
using hierprop::InvalidInputError;
using hierprop::IoError;
using hierprop::LabelBiasMatrix;
using hierprop::SparseNetwork;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    static std::atomic<int> counter{0};
    dir_ = fs::temp_directory_path() /
           ("hierprop_io_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }
  void write_text(const std::string& name, const std::string& body) const {
    std::ofstream out(path(name), std::ios::binary);
    out << body;
  }
  std::string read_text(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

TEST_F(IoTest, FeaturesRoundTripWithMissingValues) {
  Eigen::MatrixXd values(2, 3);
  values << 0.1, std::nan(""), -2.5, 1e-17, 3.0, 0.0;
  const FeatureMatrix original({"gA", "gB"}, values);

  hierprop::write_features(path("f.tsv"), original);
  const FeatureMatrix back = hierprop::read_features(path("f.tsv"));

  EXPECT_EQ(back.gene_ids(), original.gene_ids());
  ASSERT_EQ(back.n_features(), 3);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (std::isnan(values(i, k))) {
        EXPECT_TRUE(std::isnan(back.values()(i, k)));
      } else {
        EXPECT_EQ(back.values()(i, k), values(i, k));
      }
    }
  }
}

TEST_F(IoTest, FeatureFileErrors) {
  write_text("empty.tsv", "");
  EXPECT_THROW(hierprop::read_features(path("empty.tsv")), InvalidInputError);
  write_text("ragged.tsv", "gene\tf1\tf2\ngA\t1.0\n");
  EXPECT_THROW(hierprop::read_features(path("ragged.tsv")), InvalidInputError);
  write_text("garbage.tsv", "gene\tf1\ngA\tbogus\n");
  EXPECT_THROW(hierprop::read_features(path("garbage.tsv")),
               InvalidInputError);
  EXPECT_THROW(hierprop::read_features(path("missing.tsv")), IoError);
}

TEST_F(IoTest, NetworkRoundTripKeepsIsolatedGenes) {
  const SparseNetwork original = SparseNetwork::from_edges(
      {"g1", "g2", "g3"}, {{0, 1, 0.25}, {1, 2, 1e-9}});
  hierprop::write_network(path("net.tsv"), original);
  const SparseNetwork back = hierprop::read_network(path("net.tsv"));

  EXPECT_EQ(back.gene_ids(), original.gene_ids());
  const auto ea = original.edges();
  const auto eb = back.edges();
  ASSERT_EQ(ea.size(), eb.size());
  for (std::size_t k = 0; k < ea.size(); ++k) {
    EXPECT_EQ(ea[k].i, eb[k].i);
    EXPECT_EQ(ea[k].j, eb[k].j);
    EXPECT_EQ(ea[k].weight, eb[k].weight);
  }

  const SparseNetwork lonely = SparseNetwork::from_edges({"solo"}, {});
  hierprop::write_network(path("solo.tsv"), lonely);
  EXPECT_EQ(hierprop::read_network(path("solo.tsv")).gene_ids(),
            std::vector<std::string>{"solo"});
}

TEST_F(IoTest, NetworkFileErrors) {
  write_text("two_cols.tsv", "gA\tgB\n");
  EXPECT_THROW(hierprop::read_network(path("two_cols.tsv")),
               InvalidInputError);
  write_text("bad_weight.tsv", "gA\tgB\theavy\n");
  EXPECT_THROW(hierprop::read_network(path("bad_weight.tsv")),
               InvalidInputError);
}

TEST_F(IoTest, HierarchyRoundTripKeepsIsolatedCategories) {
  const Hierarchy original = Hierarchy::from_edges(
      {{"root", "mid"}, {"mid", "leaf"}}, {"island"});
  hierprop::write_hierarchy(path("h.tsv"), original);
  const Hierarchy back = hierprop::read_hierarchy(path("h.tsv"));

  EXPECT_EQ(back.category_ids(), original.category_ids());
  EXPECT_EQ(back.edges(), original.edges());
}

TEST_F(IoTest, AnnotationsEvidenceColumnAndIeaFilter) {
  write_text("ann.tsv",
             "g1\tc1\tEXP\n"
             "g2\tc1\tIEA\n"
             "g3\tc2\n");
  const AnnotationSet all = hierprop::read_annotations(path("ann.tsv"));
  EXPECT_EQ(all.pairs().size(), 3u);
  const AnnotationSet curated =
      hierprop::read_annotations(path("ann.tsv"), true);
  EXPECT_EQ(curated.pairs().size(), 2u);
  EXPECT_FALSE(curated.pairs().count({"g2", "c1"}));

  // the writer emits plain gene/category pairs
  hierprop::write_annotations(path("out.tsv"), all);
  for (const std::string& line : {std::string("g1\tc1"), std::string("g2\tc1"),
                                  std::string("g3\tc2")}) {
    EXPECT_NE(read_text("out.tsv").find(line + "\n"), std::string::npos);
  }
  const AnnotationSet back = hierprop::read_annotations(path("out.tsv"));
  EXPECT_EQ(back.pairs(), all.pairs());

  write_text("wide.tsv", "g\tc\tEXP\textra\n");
  EXPECT_THROW(hierprop::read_annotations(path("wide.tsv")),
               InvalidInputError);
}

TEST_F(IoTest, BiasRoundTripIsGeneMajor) {
  Eigen::MatrixXd values(2, 2);
  values << 1.0, -0.2, 0.6, -1.0;
  const LabelBiasMatrix original{{"gB", "gA"}, {"c2", "c1"}, values};
  hierprop::write_bias(path("bias.tsv"), original);

  const std::string text = read_text("bias.tsv");
  EXPECT_TRUE(text.rfind("gB\tc2\t1\n", 0) == 0) << text;

  const LabelBiasMatrix back = hierprop::read_bias(path("bias.tsv"));
  EXPECT_EQ(back.gene_ids, original.gene_ids);
  EXPECT_EQ(back.category_ids, original.category_ids);
  EXPECT_EQ(back.values, original.values);
}

TEST_F(IoTest, ScoresRoundTripIsCategoryMajor) {
  Eigen::MatrixXd scores(3, 2);
  scores << 0.5, -0.125, 1e-30, 2.0, 0.0, -7.5;
  const DiscriminantMatrix original{{"g1", "g2", "g3"}, {"cY", "cX"}, scores};
  hierprop::write_scores(path("scores.tsv"), original);

  const std::string text = read_text("scores.tsv");
  EXPECT_TRUE(text.rfind("cY\tg1\t0.5\n", 0) == 0) << text;

  const DiscriminantMatrix back = hierprop::read_scores(path("scores.tsv"));
  EXPECT_EQ(back.gene_ids, original.gene_ids);
  EXPECT_EQ(back.category_ids, original.category_ids);
  EXPECT_EQ(back.scores, original.scores);
}

TEST_F(IoTest, TripletMatrixMustBeCompleteAndUnique) {
  write_text("partial.tsv",
             "c1\tg1\t0.5\n"
             "c1\tg2\t0.25\n"
             "c2\tg1\t0.75\n");
  EXPECT_THROW(hierprop::read_scores(path("partial.tsv")), InvalidInputError);

  write_text("dup.tsv",
             "c1\tg1\t0.5\n"
             "c1\tg1\t0.75\n");
  EXPECT_THROW(hierprop::read_scores(path("dup.tsv")), InvalidInputError);
}

TEST_F(IoTest, AtomicWriteReplacesContentAndLeavesNoTemps) {
  hierprop::detail::atomic_write(path("x.txt"),
                                 [](std::ostream& out) { out << "first\n"; });
  hierprop::detail::atomic_write(path("x.txt"),
                                 [](std::ostream& out) { out << "second\n"; });
  EXPECT_EQ(read_text("x.txt"), "second\n");
  int n_entries = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir_)) {
    ++n_entries;
  }
  EXPECT_EQ(n_entries, 1);

  EXPECT_THROW(hierprop::detail::atomic_write(
                   (dir_ / "no_such_dir" / "y.txt").string(),
                   [](std::ostream& out) { out << "?"; }),
               IoError);
}

TEST_F(IoTest, ReportWritersProduceParsableFiles) {
  std::vector<hierprop::EvalRecord> records;
  records.push_back({"cA", 5, 0.9, 0.1, 0.8});
  records.push_back({"cB", 40, 0.7, 0.3, 0.5});
  hierprop::EvalReport report = hierprop::summarize(std::move(records));
  report.skipped = {"cC"};

  hierprop::write_report_json(path("r.json"), report);
  hierprop::write_report_tsv(path("r.tsv"), report);
  hierprop::write_cumulative_tsv(path("r_cum.tsv"), report);

  const nlohmann::json j = nlohmann::json::parse(read_text("r.json"));
  EXPECT_EQ(j["n_categories"], 2);
  EXPECT_DOUBLE_EQ(j["mean_error"].get<double>(), 0.2);
  ASSERT_EQ(j["records"].size(), 2u);
  EXPECT_EQ(j["records"][0]["category"], "cA");
  EXPECT_DOUBLE_EQ(j["records"][0]["auc_roc"].get<double>(), 0.9);
  EXPECT_EQ(j["skipped"], nlohmann::json::array({"cC"}));
  ASSERT_EQ(j["buckets"].size(), 4u);
  EXPECT_EQ(j["buckets"][0]["count"], 1);
  EXPECT_TRUE(j["buckets"][3]["mean_error"].is_null());

  const std::string tsv = read_text("r.tsv");
  EXPECT_TRUE(tsv.rfind("category\tn_pos\tauc_roc\terror\tauprc\n", 0) == 0);
  EXPECT_NE(tsv.find("cB\t40\t0.7\t0.3\t0.5\n"), std::string::npos);

  const std::string cum = read_text("r_cum.tsv");
  EXPECT_EQ(std::count(cum.begin(), cum.end(), '\n'), 2);
}

TEST(BucketParse, AcceptsRangesRejectsGarbage) {
  const auto buckets = hierprop::cli::parse_buckets("3-10,11-30");
  ASSERT_EQ(buckets.size(), 2u);
  EXPECT_EQ(buckets[0], std::make_pair(3L, 10L));
  EXPECT_EQ(buckets[1], std::make_pair(11L, 30L));

  EXPECT_THROW(hierprop::cli::parse_buckets(""), InvalidInputError);
  EXPECT_THROW(hierprop::cli::parse_buckets("5"), InvalidInputError);
  EXPECT_THROW(hierprop::cli::parse_buckets("10-2"), InvalidInputError);
  EXPECT_THROW(hierprop::cli::parse_buckets("a-b"), InvalidInputError);
}

class CliTest : public IoTest {
 protected:
  static int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full = {"hierprop"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& a : full) argv.push_back(a.c_str());
    return hierprop::cli::run(static_cast<int>(argv.size()), argv.data());
  }

  // a small planted-signal instance shared by the subcommand tests
  void make_instance(const std::string& subdir, int genes = 60,
                     int seed = 5) {
    ASSERT_EQ(run_cli({"synth", "--genes", std::to_string(genes), "--seed",
                       std::to_string(seed), "--out-dir", path(subdir)}),
              0);
  }
  std::string inst(const std::string& subdir, const std::string& name) const {
    return (dir_ / subdir / name).string();
  }
};

TEST_F(CliTest, VersionAndUsageExitCodes) {
  EXPECT_EQ(run_cli({"--version"}), 0);
  EXPECT_EQ(run_cli({}), 1);
  EXPECT_EQ(run_cli({"no-such-command"}), 1);
  EXPECT_EQ(run_cli({"propagate"}), 1);  // missing required flags
  EXPECT_EQ(run_cli({"propagate", "--net", "x", "--ann", "x", "--hierarchy",
                     "x", "--method", "bogus", "--out", "x"}),
            1);
}

TEST_F(CliTest, MissingInputFileIsDataError) {
  EXPECT_EQ(run_cli({"propagate", "--net", path("absent.tsv"), "--ann",
                     path("absent.tsv"), "--hierarchy", path("absent.tsv"),
                     "--out", path("out.tsv")}),
            2);
}

TEST_F(CliTest, SynthWritesAllFourFiles) {
  make_instance("data");
  EXPECT_TRUE(fs::exists(inst("data", "network.tsv")));
  EXPECT_TRUE(fs::exists(inst("data", "hierarchy.tsv")));
  EXPECT_TRUE(fs::exists(inst("data", "annotations_full.tsv")));
  EXPECT_TRUE(fs::exists(inst("data", "annotations_observed.tsv")));
  EXPECT_EQ(hierprop::read_network(inst("data", "network.tsv")).size(), 60);
  EXPECT_EQ(hierprop::read_hierarchy(inst("data", "hierarchy.tsv")).size(),
            13);
}

TEST_F(CliTest, PropagateIsDeterministicAndCoversAllGenes) {
  make_instance("data");
  const std::vector<std::string> base = {
      "propagate",    "--net",
      inst("data", "network.tsv"),
      "--ann",        inst("data", "annotations_observed.tsv"),
      "--hierarchy",  inst("data", "hierarchy.tsv"),
      "--method",     "grf"};

  std::vector<std::string> first = base;
  first.insert(first.end(), {"--out", path("s1.tsv")});
  std::vector<std::string> second = base;
  second.insert(second.end(), {"--out", path("s2.tsv")});
  ASSERT_EQ(run_cli(first), 0);
  ASSERT_EQ(run_cli(second), 0);
  EXPECT_EQ(read_text("s1.tsv"), read_text("s2.tsv"));

  const DiscriminantMatrix scores = hierprop::read_scores(path("s1.tsv"));
  EXPECT_EQ(scores.gene_ids.size(), 60u);
  EXPECT_GE(scores.category_ids.size(), 1u);
  EXPECT_LE(scores.category_ids.size(), 13u);
  EXPECT_TRUE(scores.scores.allFinite());
}

TEST_F(CliTest, PropagateOracleFlagSucceedsOnSmallInputs) {
  make_instance("data", 40, 2);
  EXPECT_EQ(run_cli({"propagate", "--net", inst("data", "network.tsv"),
                     "--ann", inst("data", "annotations_observed.tsv"),
                     "--hierarchy", inst("data", "hierarchy.tsv"), "--method",
                     "hlprop", "--oracle", "--out", path("s.tsv")}),
            0);
}

TEST_F(CliTest, HlpropWithZeroLambdaMatchesGrf) {
  make_instance("data", 40, 3);
  const auto run_method = [&](const std::string& method, double lambda,
                              const std::string& out) {
    return run_cli({"propagate", "--net", inst("data", "network.tsv"),
                    "--ann", inst("data", "annotations_observed.tsv"),
                    "--hierarchy", inst("data", "hierarchy.tsv"), "--method",
                    method, "--lambda", hierprop::format_double(lambda),
                    "--out", path(out)});
  };
  ASSERT_EQ(run_method("grf", 1.0, "grf.tsv"), 0);
  ASSERT_EQ(run_method("hlprop", 0.0, "hlprop0.tsv"), 0);

  const DiscriminantMatrix a = hierprop::read_scores(path("grf.tsv"));
  const DiscriminantMatrix b = hierprop::read_scores(path("hlprop0.tsv"));
  ASSERT_EQ(a.category_ids, b.category_ids);
  ASSERT_EQ(a.gene_ids, b.gene_ids);
  EXPECT_LT((a.scores - b.scores).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST_F(CliTest, ReconcilePoolsViolatedPair) {
  write_text("h.tsv", "parent\tchild\n");
  // categories in hierarchy id order, as the propagate subcommand writes them
  write_text("scores.tsv",
             "child\tg1\t0.8\n"
             "child\tg2\t0.1\n"
             "parent\tg1\t0.3\n"
             "parent\tg2\t0.9\n");
  ASSERT_EQ(run_cli({"reconcile", "--scores", path("scores.tsv"),
                     "--hierarchy", path("h.tsv"), "--out", path("z.tsv")}),
            0);
  const DiscriminantMatrix z = hierprop::read_scores(path("z.tsv"));
  const int g1 = z.gene_ids[0] == "g1" ? 0 : 1;
  const int parent = z.category_ids[0] == "parent" ? 0 : 1;
  EXPECT_DOUBLE_EQ(z.scores(g1, parent), 0.55);
  EXPECT_DOUBLE_EQ(z.scores(g1, 1 - parent), 0.55);
  EXPECT_DOUBLE_EQ(z.scores(1 - g1, parent), 0.9);
  EXPECT_DOUBLE_EQ(z.scores(1 - g1, 1 - parent), 0.1);
}

TEST_F(CliTest, EvaluateCvWritesReportTriple) {
  make_instance("data");
  ASSERT_EQ(run_cli({"evaluate", "--mode", "cv", "--net",
                     inst("data", "network.tsv"), "--ann",
                     inst("data", "annotations_observed.tsv"), "--hierarchy",
                     inst("data", "hierarchy.tsv"), "--folds", "3", "--seed",
                     "1", "--method", "grf", "--report", path("cv")}),
            0);
  const nlohmann::json j = nlohmann::json::parse(read_text("cv.json"));
  EXPECT_GE(j["n_categories"].get<int>(), 1);
  EXPECT_GE(j["mean_error"].get<double>(), 0.0);
  EXPECT_LE(j["mean_error"].get<double>(), 1.0);
  EXPECT_TRUE(fs::exists(path("cv.tsv")));
  EXPECT_TRUE(fs::exists(path("cv_cumulative.tsv")));
}

TEST_F(CliTest, EvaluateNovelUsesTwoSnapshots) {
  make_instance("data", 120, 7);
  ASSERT_EQ(run_cli({"evaluate", "--mode", "novel", "--net",
                     inst("data", "network.tsv"), "--ann-old",
                     inst("data", "annotations_observed.tsv"), "--ann-new",
                     inst("data", "annotations_full.tsv"), "--hierarchy",
                     inst("data", "hierarchy.tsv"), "--min-new", "1",
                     "--method", "grf", "--report", path("novel")}),
            0);
  const nlohmann::json j = nlohmann::json::parse(read_text("novel.json"));
  EXPECT_GE(j["n_categories"].get<int>(), 1);
}

TEST_F(CliTest, EvaluateCvRequiresAnnotations) {
  make_instance("data");
  EXPECT_EQ(run_cli({"evaluate", "--mode", "cv", "--net",
                     inst("data", "network.tsv"), "--hierarchy",
                     inst("data", "hierarchy.tsv"), "--report", path("cv")}),
            1);
}

TEST_F(CliTest, ConfigFileSuppliesSubcommandFlags) {
  write_text("cfg.ini", "[synth]\ngenes=40\nseed=11\n");
  ASSERT_EQ(run_cli({"--config", path("cfg.ini"), "synth", "--out-dir",
                     path("data")}),
            0);
  EXPECT_EQ(hierprop::read_network(inst("data", "network.tsv")).size(), 40);
}

TEST_F(CliTest, UnreachableToleranceIsConvergenceFailure) {
  make_instance("data", 40, 4);
  EXPECT_EQ(run_cli({"propagate", "--net", inst("data", "network.tsv"),
                     "--ann", inst("data", "annotations_observed.tsv"),
                     "--hierarchy", inst("data", "hierarchy.tsv"), "--method",
                     "grf", "--cg-tol", "1e-300", "--out", path("s.tsv")}),
            3);
}

TEST_F(CliTest, BuildNetworkAndCombineRoundTrip) {
  write_text("f.tsv",
             "gene\tf1\tf2\tf3\tf4\n"
             "g1\t1\t2\t3\t4\n"
             "g2\t2\t4\t6\t8\n"
             "g3\t4\t3\t2\t1\n");
  ASSERT_EQ(run_cli({"build-network", "--features", path("f.tsv"), "--top-k",
                     "1", "--out", path("n1.tsv")}),
            0);
  const SparseNetwork n1 = hierprop::read_network(path("n1.tsv"));
  EXPECT_EQ(n1.size(), 3);
  EXPECT_GE(n1.edges().size(), 1u);

  write_text("n2.tsv", "g3\ng4\ng3\tg4\t1\n");
  ASSERT_EQ(run_cli({"combine", "--net", path("n1.tsv"), "--net",
                     path("n2.tsv"), "--out", path("sum.tsv")}),
            0);
  const SparseNetwork sum = hierprop::read_network(path("sum.tsv"));
  EXPECT_EQ(sum.size(), 4);

  EXPECT_EQ(run_cli({"build-network", "--features", path("f.tsv"), "--edges",
                     path("n2.tsv"), "--out", path("bad.tsv")}),
            1);
  EXPECT_EQ(run_cli({"build-network", "--out", path("bad.tsv")}), 1);
}

}  // namespace
