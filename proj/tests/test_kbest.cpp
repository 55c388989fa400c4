#include <gtest/gtest.h>

#include <random>

#include "fastassoc/cost.hpp"
#include "fastassoc/kbest.hpp"
#include "fastassoc/oracle.hpp"
#include "test_util.hpp"

namespace fastassoc {
namespace {

SparseCostMatrix two_by_two() {
  std::vector<double> v{-3, -1, -2, -4};
  return SparseCostMatrix::from_dense(2, 2, v);
}

ProblemNode root_node(const SparseCostMatrix& c) {
  auto rows = all_rows(c.rows());
  auto sol = solve_optimal(c, {.rows = rows});
  ProblemNode node;
  node.row_to = sol->assoc.row_to;
  node.duals = sol->duals;
  node.fixed.assign(static_cast<std::size_t>(c.rows()), 0);
  node.cost = sol->assoc.cost;
  node.lower_bound = node.cost;
  node.solved = true;
  return node;
}

TEST(KBestConfig, Parse) {
  EXPECT_FALSE(KBestConfig::parse("v1").early_stop);
  EXPECT_TRUE(KBestConfig::parse("v3").lookahead);
  EXPECT_TRUE(KBestConfig::parse("v4").sparse);
  EXPECT_THROW(KBestConfig::parse("v5"), InvalidInput);
}

TEST(Lookahead, MinimumOfListedValues) {
  // Row 0 currently matched to column 0; reduced costs of columns 1 and 2
  // are 0.5 and 0.2, and the miss edge is -u = 0.7.
  auto c = SparseCostMatrix::from_triplets(1, 3, {{0, 0, -0.7}, {0, 1, -0.2}, {0, 2, -0.5}});
  ProblemNode node;
  node.row_to = {0};
  node.duals = DualState(1, 3);
  node.duals.u[0] = -0.7;
  node.fixed = {0};
  node.cost = 10.0;
  node.solved = true;
  EXPECT_DOUBLE_EQ(lookahead_bound(node, c, 0), 10.2);
}

TEST(Lookahead, MissEdgeOnly) {
  auto c = SparseCostMatrix::from_triplets(1, 2, {{0, 0, -1.0}, {0, 1, -1.0}});
  ProblemNode node;
  node.row_to = {0};
  node.duals = DualState(1, 2);
  node.fixed = {0};
  node.forbidden = {{0, 1}};
  node.cost = 3.0;
  node.solved = true;
  EXPECT_DOUBLE_EQ(lookahead_bound(node, c, 0), 3.0);
  node.forbidden = {{0, kMiss}, {0, 1}};
  EXPECT_EQ(lookahead_bound(node, c, 0), kInfinity);
}

TEST(Partition, OneChildPerActiveRow) {
  auto c = SparseCostMatrix::from_triplets(3, 2, {{0, 0, -2.0}, {1, 1, -2.0}, {2, 0, 1.0}});
  auto node = root_node(c);
  ASSERT_EQ(node.row_to, (std::vector<Index>{0, 1, kMiss}));
  auto kids = partition(node, c, false);
  ASSERT_EQ(kids.size(), 3u);
  for (std::size_t t = 0; t < kids.size(); ++t) {
    EXPECT_EQ(kids[t].pending_row, static_cast<Index>(t));
    for (std::size_t r = 0; r < t; ++r) EXPECT_TRUE(kids[t].fixed[r]);
  }
}

TEST(KBestSingle, TwoByTwo) {
  auto c = two_by_two();
  auto out = kbest_single(c, 2);
  EXPECT_EQ(out.costs(), (std::vector<double>{-7, -4}));
  auto all = kbest_single(c, 7);
  EXPECT_EQ(all.costs(), (std::vector<double>{-7, -4, -3, -3, -2, -1, 0}));
}

TEST(KBestSingle, OneByOneHasTwoAssociations) {
  std::vector<double> v{-1};
  auto c = SparseCostMatrix::from_dense(1, 1, v);
  auto out = kbest_single(c, 3);
  EXPECT_EQ(out.costs(), (std::vector<double>{-1, 0}));
}

TEST(KBestSingle, KEqualsOneIsOptimal) {
  std::mt19937_64 rng(9);
  auto c = testing::random_dense(6, 7, -2.0, 1.0, rng);
  auto rows = all_rows(6);
  auto sol = solve_optimal(c, {.rows = rows});
  auto out = kbest_single(c, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out.entries[0].total_cost, sol->assoc.cost, 1e-9);
}

TEST(KBestSingle, ZeroKRejected) {
  EXPECT_THROW(kbest_single(two_by_two(), 0), InvalidInput);
}

struct ConfigProperty : ::testing::TestWithParam<int> {};

KBestConfig config_for(int v) {
  KBestConfig cfg = v == 1 ? KBestConfig::v1() : v == 2 ? KBestConfig::v2() : v == 3 ? KBestConfig::v3() : KBestConfig::v4();
  cfg.check_duals = true;
  return cfg;
}

// Costs agree with brute force; the association sets agree whenever no tie
// straddles the K-th position.
TEST_P(ConfigProperty, MatchesBruteForce) {
  std::mt19937_64 rng(31 + GetParam());
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<int> kdist(1, 40);
  std::uniform_real_distribution<double> keep(0.4, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Index M = dim(rng);
    Index N = dim(rng);
    auto c = testing::random_sparse(M, N, -3.0, 2.0, keep(rng), rng);
    std::size_t k = static_cast<std::size_t>(kdist(rng));
    auto got = KBestSolver(c, config_for(GetParam())).solve(k);
    auto want = kbest_bruteforce(c, k);
    ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got.entries[i].total_cost, want.entries[i].total_cost, 1e-9) << "trial " << trial << " rank " << i;
      EXPECT_FALSE(validate_association(c, got.entries[i].assoc, true));
    }
    EXPECT_EQ(testing::sorted_row_tos(got), testing::sorted_row_tos(want)) << "trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(Versions, ConfigProperty, ::testing::Values(1, 2, 3, 4));

TEST(KBestSingle, ConfigsAgreeOnLargerInstances) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = testing::random_dense(30, 30, -2.0, -1.0, rng);
    auto a = kbest_single(c, 50, KBestConfig::v1());
    for (int v = 2; v <= 4; ++v) {
      auto b = kbest_single(c, 50, config_for(v));
      EXPECT_EQ(testing::sorted_row_tos(a), testing::sorted_row_tos(b)) << "v" << v;
    }
  }
}

TEST(KBestSingle, Distinct) {
  std::mt19937_64 rng(55);
  auto c = testing::random_sparse(8, 8, -2.0, 0.5, 0.6, rng);
  auto out = kbest_single(c, 300);
  auto rows = testing::sorted_row_tos(out);
  EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LE(out.entries[i - 1].total_cost, out.entries[i].total_cost);
}

TEST(KBestMimo, SingleHypothesisEqualsSingle) {
  std::mt19937_64 rng(8);
  auto c = testing::random_dense(5, 5, -2.0, 1.0, rng);
  HypothesisSet h;
  h.num_objects = 5;
  h.add(all_rows(5), 0.0);
  auto a = kbest_mimo(c, h, 20);
  auto b = kbest_single(c, 20);
  EXPECT_EQ(a.costs(), b.costs());
  EXPECT_EQ(testing::sorted_row_tos(a), testing::sorted_row_tos(b));
}

TEST(KBestMimo, PriorDominance) {
  std::mt19937_64 rng(10);
  auto c = testing::random_dense(4, 4, -2.0, 1.0, rng);
  HypothesisSet h;
  h.num_objects = 4;
  h.add(all_rows(4), 0.0);
  h.add(all_rows(4), 1e6);
  auto out = kbest_mimo(c, h, 10);
  ASSERT_EQ(out.size(), 10u);
  for (const auto& e : out.entries) EXPECT_EQ(e.parent, 0u);
}

TEST(KBestMimo, EmptyHypothesisSetRejected) {
  HypothesisSet h;
  h.num_objects = 2;
  EXPECT_THROW(kbest_mimo(two_by_two(), h, 3), InvalidInput);
}

// Brute force over every hypothesis: enumerate associations of the member
// rows, add the prior, take the K smallest.
TEST(KBestMimo, MatchesBruteForce) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> prior(0.0, 3.0);
  std::bernoulli_distribution member(0.6);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = testing::random_sparse(4, 4, -3.0, 1.0, 0.8, rng);
    HypothesisSet h;
    h.num_objects = 4;
    for (int k = 0; k < 3; ++k) {
      std::vector<Index> rows;
      for (Index r = 0; r < 4; ++r)
        if (member(rng)) rows.push_back(r);
      h.add(rows, prior(rng));
    }
    std::vector<double> want;
    auto all = enumerate_all(c).associations;
    for (std::size_t k = 0; k < h.size(); ++k) {
      auto in = h.membership()[k];
      for (const auto& a : all) {
        bool ok = true;
        for (Index r = 0; r < 4; ++r)
          if (!in[static_cast<std::size_t>(r)] && a.row_to[static_cast<std::size_t>(r)] != kMiss) ok = false;
        if (ok) want.push_back(a.cost + h.priors[k]);
      }
    }
    std::sort(want.begin(), want.end());
    const std::size_t K = 15;
    want.resize(std::min(want.size(), K));
    auto got = kbest_mimo(c, h, K, config_for(3));
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got.entries[i].total_cost, want[i], 1e-9);
  }
}

}  // namespace
}  // namespace fastassoc
