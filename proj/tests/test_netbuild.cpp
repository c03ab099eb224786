#include "hierprop/netbuild.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hierprop/error.hpp"
#include "hierprop/network.hpp"
#include "hierprop/util.hpp"

namespace hierprop {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> gene_names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("g" + std::to_string(i));
  return out;
}

std::map<std::pair<int, int>, double> edge_map(const SparseNetwork& net) {
  std::map<std::pair<int, int>, double> out;
  for (const Edge& e : net.edges()) out[{e.i, e.j}] = e.weight;
  return out;
}

TEST(FeatureMatrix, Validation) {
  Eigen::MatrixXd values(2, 2);
  values << 1, 2, 3, 4;
  EXPECT_THROW(FeatureMatrix({"a"}, values), InvalidInputError);
  EXPECT_THROW(FeatureMatrix({"a", "a"}, values), InvalidInputError);
  Eigen::MatrixXd missing_row(2, 2);
  missing_row << 1, 2, kNaN, kNaN;
  EXPECT_THROW(FeatureMatrix({"a", "b"}, missing_row), InvalidInputError);
}

TEST(PearsonNetwork, IdenticalRowsGiveUnitEdge) {
  Eigen::MatrixXd values(2, 4);
  values << 1, 2, 3, 4,
            1, 2, 3, 4;
  const SparseNetwork net =
      pearson_network(FeatureMatrix(gene_names(2), values), 1);
  const auto edges = net.edges();
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_DOUBLE_EQ(edges[0].weight, 1.0);
}

TEST(PearsonNetwork, AntiCorrelatedRowsGiveNoEdge) {
  Eigen::MatrixXd values(2, 4);
  values << 1, 2, 3, 4,
            4, 3, 2, 1;
  const SparseNetwork net =
      pearson_network(FeatureMatrix(gene_names(2), values), 1);
  EXPECT_TRUE(net.edges().empty());
}

TEST(PearsonNetwork, EdgeKeptWhenTopForEitherEndpoint) {
  // Rows engineered so r01 > r02 > r12 > 0. With k = 1, (0,2) survives
  // because it is gene 2's best correlation even though gene 0 prefers 1.
  Eigen::MatrixXd values(3, 5);
  values << 1.0, 2.0, 3.0, 4.0, 5.0,
            1.1, 2.0, 3.1, 4.0, 5.1,
            1.0, 2.8, 2.6, 4.9, 4.0;
  const FeatureMatrix features(gene_names(3), values);
  const double r01 = detail::pairwise_pearson(values.row(0), values.row(1));
  const double r02 = detail::pairwise_pearson(values.row(0), values.row(2));
  const double r12 = detail::pairwise_pearson(values.row(1), values.row(2));
  ASSERT_GT(r01, r02);
  ASSERT_GT(r02, r12);
  ASSERT_GT(r12, 0.0);
  const auto edges = edge_map(pearson_network(features, 1));
  EXPECT_EQ(edges.size(), 2u);
  EXPECT_TRUE(edges.count({0, 1}));
  EXPECT_TRUE(edges.count({0, 2}));
}

TEST(PearsonNetwork, MatchesBruteForceFilter) {
  Rng rng(61);
  const int n = 12;
  const int p = 8;
  Eigen::MatrixXd values(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) values(i, j) = uniform_range(rng, -1.0, 1.0);
  }
  const FeatureMatrix features(gene_names(n), values);
  for (const int k : {1, 2, 4}) {
    const auto got = edge_map(pearson_network(features, k));

    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        r(i, j) = r(j, i) =
            detail::pairwise_pearson(values.row(i), values.row(j));
      }
    }
    std::map<std::pair<int, int>, double> expected;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (r(i, j) <= 0) continue;
        const auto rank_of = [&](int g, double value) {
          int better = 0;
          for (int other = 0; other < n; ++other) {
            if (other != g && r(g, other) > value) ++better;
          }
          return better;  // 0-based rank among g's correlations
        };
        if (rank_of(i, r(i, j)) < k || rank_of(j, r(i, j)) < k) {
          expected[{i, j}] = r(i, j);
        }
      }
    }
    EXPECT_EQ(got, expected) << "k=" << k;
  }
}

TEST(PearsonNetwork, MissingValuesUsePairwiseCompleteColumns) {
  Eigen::MatrixXd values(2, 5);
  values << 1, 2, kNaN, 4, 5,
            2, 4, 9.0, 8, 10;
  // Shared support is columns {0,1,3,4} where the rows are proportional.
  const SparseNetwork net =
      pearson_network(FeatureMatrix(gene_names(2), values), 1);
  ASSERT_EQ(net.edges().size(), 1u);
  EXPECT_NEAR(net.edges()[0].weight, 1.0, 1e-12);
}

TEST(PearsonNetwork, TooFewSharedColumnsGiveZero) {
  Eigen::VectorXd a(4);
  Eigen::VectorXd b(4);
  a << 1, 2, kNaN, kNaN;
  b << 1, 2, 3, 4;
  EXPECT_EQ(detail::pairwise_pearson(a, b), 0.0);
}

TEST(PearsonNetwork, ConstantRowGivesZero) {
  Eigen::VectorXd a = Eigen::VectorXd::Constant(5, 2.0);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  EXPECT_EQ(detail::pairwise_pearson(a, b), 0.0);
}

TEST(PearsonNetwork, RejectsDegenerateInputs) {
  Eigen::MatrixXd one_gene(1, 3);
  one_gene << 1, 2, 3;
  EXPECT_THROW(pearson_network(FeatureMatrix({"a"}, one_gene), 1),
               InvalidInputError);
  Eigen::MatrixXd one_column(2, 1);
  one_column << 1, 2;
  EXPECT_THROW(pearson_network(FeatureMatrix(gene_names(2), one_column), 1),
               InvalidInputError);
}

TEST(Normalize, SingleEdgeUnchanged) {
  const SparseNetwork net =
      SparseNetwork::from_edges(gene_names(2), {{0, 1, 1.0}});
  const SparseNetwork normalized = normalize(net);
  ASSERT_EQ(normalized.edges().size(), 1u);
  EXPECT_DOUBLE_EQ(normalized.edges()[0].weight, 1.0);
}

TEST(Normalize, PathWeightsBecomeInverseSqrtTwo) {
  const SparseNetwork net = SparseNetwork::from_edges(
      gene_names(3), {{0, 1, 1.0}, {1, 2, 1.0}});
  const SparseNetwork normalized = normalize(net);
  for (const Edge& e : normalized.edges()) {
    EXPECT_NEAR(e.weight, 1.0 / std::sqrt(2.0), 1e-12);
  }
}

TEST(Normalize, SpectralRadiusAtMostOne) {
  Rng rng(62);
  const int n = 20;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform_unit(rng) < 0.3) {
        edges.push_back({i, j, uniform_range(rng, 0.1, 5.0)});
      }
    }
  }
  const SparseNetwork normalized =
      normalize(SparseNetwork::from_edges(gene_names(n), edges));
  const Eigen::MatrixXd dense = Eigen::MatrixXd(normalized.weights());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  EXPECT_LE(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-12);
}

TEST(Normalize, ScaleInvariant) {
  Rng rng(63);
  const int n = 10;
  std::vector<Edge> edges;
  std::vector<Edge> scaled;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform_unit(rng) < 0.4) {
        const double w = uniform_range(rng, 0.1, 2.0);
        edges.push_back({i, j, w});
        scaled.push_back({i, j, 3.7 * w});
      }
    }
  }
  const auto a = edge_map(normalize(SparseNetwork::from_edges(gene_names(n), edges)));
  const auto b =
      edge_map(normalize(SparseNetwork::from_edges(gene_names(n), scaled)));
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [key, w] : a) {
    EXPECT_NEAR(b.at(key), w, 1e-12);
  }
}

TEST(Normalize, IsolatedGenesKeepNoEdges) {
  const SparseNetwork net = SparseNetwork::from_edges(
      gene_names(3), {{0, 1, 2.0}});
  const SparseNetwork normalized = normalize(net);
  EXPECT_EQ(normalized.size(), 3);
  EXPECT_EQ(normalized.edges().size(), 1u);
}

TEST(Combine, SingleNetworkEqualsNormalize) {
  const SparseNetwork net = SparseNetwork::from_edges(
      gene_names(3), {{0, 1, 2.0}, {1, 2, 1.0}});
  const auto combined = edge_map(combine({net}));
  const auto normalized = edge_map(normalize(net));
  EXPECT_EQ(combined.size(), normalized.size());
  for (const auto& [key, w] : normalized) {
    EXPECT_DOUBLE_EQ(combined.at(key), w);
  }
}

TEST(Combine, DisjointEdgesUnion) {
  const SparseNetwork first =
      SparseNetwork::from_edges(gene_names(4), {{0, 1, 1.0}});
  const SparseNetwork second =
      SparseNetwork::from_edges(gene_names(4), {{2, 3, 1.0}});
  const auto combined = edge_map(combine({first, second}));
  EXPECT_EQ(combined.size(), 2u);
  EXPECT_TRUE(combined.count({0, 1}));
  EXPECT_TRUE(combined.count({2, 3}));
}

TEST(Combine, DuplicateInputEqualsSingle) {
  Rng rng(64);
  const int n = 5;
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uniform_unit(rng) < 0.6) {
        edges.push_back({i, j, uniform_range(rng, 0.1, 2.0)});
      }
    }
  }
  const SparseNetwork net = SparseNetwork::from_edges(gene_names(n), edges);
  const auto twice = edge_map(combine({net, net}));
  const auto once = edge_map(combine({net}));
  ASSERT_EQ(twice.size(), once.size());
  for (const auto& [key, w] : once) {
    EXPECT_NEAR(twice.at(key), w, 1e-12);
  }
}

TEST(Combine, RejectsMismatchedUniverses) {
  const SparseNetwork a = SparseNetwork::from_edges(gene_names(2), {});
  const SparseNetwork b = SparseNetwork::from_edges({"x", "y"}, {});
  EXPECT_THROW(combine({a, b}), InvalidInputError);
  EXPECT_THROW(combine({}), InvalidInputError);
}

TEST(AlignGenes, IdentityWhenUniverseMatches) {
  const SparseNetwork net =
      SparseNetwork::from_edges(gene_names(3), {{0, 2, 1.5}});
  const SparseNetwork aligned = align_genes(net, gene_names(3));
  EXPECT_EQ(edge_map(aligned), edge_map(net));
}

TEST(AlignGenes, AppendsIsolatedGene) {
  const SparseNetwork net =
      SparseNetwork::from_edges(gene_names(2), {{0, 1, 1.0}});
  const SparseNetwork aligned = align_genes(net, gene_names(3));
  EXPECT_EQ(aligned.size(), 3);
  EXPECT_DOUBLE_EQ(aligned.degrees()[2], 0.0);
}

TEST(AlignGenes, PermutationPreservesWeights) {
  const SparseNetwork net = SparseNetwork::from_edges(
      gene_names(3), {{0, 1, 1.0}, {1, 2, 2.0}});
  const std::vector<std::string> permuted{"g2", "g0", "g1"};
  const SparseNetwork aligned = align_genes(net, permuted);
  // g1-g2 edge of weight 2 is now between indices 2 and 0.
  EXPECT_DOUBLE_EQ(aligned.weights().coeff(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(aligned.weights().coeff(1, 2), 1.0);
}

TEST(AlignGenes, RejectsMissingGene) {
  const SparseNetwork net = SparseNetwork::from_edges(gene_names(2), {});
  EXPECT_THROW(align_genes(net, {"g0"}), InvalidInputError);
}

}  // namespace
}  // namespace hierprop
