#include <gtest/gtest.h>

#include <atomic>
#include <sstream>

#include "fastassoc/bench.hpp"
#include "fastassoc/oracle.hpp"
#include "test_util.hpp"

namespace fastassoc {
namespace {

TEST(GenRandomDense, RangeAndDeterminism) {
  auto a = gen_random_dense(40, 5);
  auto b = gen_random_dense(40, 5);
  auto c = gen_random_dense(40, 6);
  ASSERT_TRUE(a.is_dense());
  bool differs = false;
  for (Index i = 0; i < 40; ++i) {
    for (Index j = 0; j < 40; ++j) {
      double x = *a.at(i, j);
      EXPECT_GT(x, -2.0);
      EXPECT_LT(x, -1.0);
      EXPECT_EQ(x, *b.at(i, j));
      differs |= x != *c.at(i, j);
    }
  }
  EXPECT_TRUE(differs);
}

TEST(GenRandomDense, TopAssociationsHaveNoMisses) {
  auto m = gen_random_dense(300, 17);
  auto out = kbest_single(m, 200);
  ASSERT_EQ(out.size(), 200u);
  for (const auto& e : out.entries) EXPECT_EQ(std::count(e.assoc.row_to.begin(), e.assoc.row_to.end(), kMiss), 0);
}

TEST(GateMatrix, KeepsLowestPerRow) {
  auto m = SparseCostMatrix::from_triplets(1, 3, {{0, 0, -1.9}, {0, 1, -1.2}, {0, 2, -1.5}});
  auto g = gate_matrix(m, 2);
  EXPECT_EQ(g.nnz(), 2u);
  EXPECT_TRUE(g.at(0, 0));
  EXPECT_FALSE(g.at(0, 1));
  EXPECT_TRUE(g.at(0, 2));
  auto same = gate_matrix(m, 5);
  EXPECT_EQ(same.nnz(), 3u);
  EXPECT_THROW(gate_matrix(m, 0), InvalidInput);
}

TEST(MinSufficientGate, Examples) {
  std::vector<double> one{-1.5};
  EXPECT_EQ(min_sufficient_gate(SparseCostMatrix::from_dense(1, 1, one), 1), 1);

  std::vector<double> v(25, -1.0);
  for (int i = 0; i < 5; ++i) v[static_cast<std::size_t>(i * 5 + i)] = -10.0;
  EXPECT_EQ(min_sufficient_gate(SparseCostMatrix::from_dense(5, 5, v), 1), 1);
}

TEST(MinSufficientGate, IsMinimal) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = gen_random_dense(12, seed);
    Index s = min_sufficient_gate(m, 30);
    auto want = testing::sorted_row_tos(kbest_single(m, 30));
    EXPECT_EQ(testing::sorted_row_tos(kbest_single(gate_matrix(m, s), 30, KBestConfig::v4())), want);
    if (s > 1) EXPECT_NE(testing::sorted_row_tos(kbest_single(gate_matrix(m, s - 1), 30, KBestConfig::v4())), want);
  }
}

TEST(Summarize, Percentiles) {
  std::vector<double> ms;
  for (int i = 1; i <= 20; ++i) ms.push_back(i);
  auto s = summarize(ms);
  EXPECT_DOUBLE_EQ(s.mean_ms, 10.5);
  EXPECT_DOUBLE_EQ(s.median_ms, 10.5);
  EXPECT_DOUBLE_EQ(s.p95_ms, 19.0);
  EXPECT_EQ(s.samples, 20u);
}

TEST(ParallelFor, VisitsAllAndRethrows) {
  std::vector<std::atomic<int>> hit(100);
  parallel_for(100, 4, [&](std::size_t i) { hit[i]++; });
  for (auto& h : hit) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw InvalidInput("x"); }), InvalidInput);
}

TEST(BenchConfig, Validation) {
  BenchConfig c;
  c.sizes = {};
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.versions = {5};
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.k = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(DenseBench, VersionsAgree) {
  BenchConfig c;
  c.sizes = {30};
  c.k = 50;
  c.trials = 2;
  auto rows = run_dense_bench(c);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_TRUE(r.same_solutions) << "v" << r.version;
  std::ostringstream out;
  write_csv(out, rows);
  EXPECT_EQ(out.str().rfind("size,version,mean_ms", 0), 0u);
}

TEST(MakeChain, RowsAreDistinctPairs) {
  auto chain = make_chain(8, 20, 3);
  std::set<std::pair<Index, Index>> pairs;
  for (const auto& e : chain.stage1_out.entries)
    for (Index r = 0; r < 8; ++r)
      if (e.assoc.row_to[static_cast<std::size_t>(r)] >= 0) pairs.emplace(r, e.assoc.row_to[static_cast<std::size_t>(r)]);
  EXPECT_EQ(static_cast<std::size_t>(chain.stage2.rows()), pairs.size());
  EXPECT_EQ(chain.hypotheses.size(), 20u);
  EXPECT_NO_THROW(chain.hypotheses.validate());
}

TEST(MakeChain, KOneIsTwoSequentialSolves) {
  auto chain = make_chain(10, 1, 4);
  auto out = kbest_mimo(chain.stage2, chain.hypotheses, 1);
  auto rows = chain.hypotheses.members[0];
  auto second = solve_optimal(chain.stage2, {.rows = rows});
  EXPECT_NEAR(out.entries[0].total_cost, chain.stage1_out.entries[0].total_cost + second->assoc.cost, 1e-9);
}

// Small chains: per-hypothesis exhaustive enumeration, merged.
TEST(MakeChain, MimoMatchesEnumerationOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto chain = make_chain(4, 10, seed);
    std::vector<double> want;
    auto all = enumerate_all(chain.stage2).associations;
    for (std::size_t h = 0; h < chain.hypotheses.size(); ++h) {
      auto in = chain.hypotheses.membership()[h];
      for (const auto& a : all) {
        bool ok = true;
        for (std::size_t r = 0; r < a.row_to.size(); ++r) ok &= in[r] || a.row_to[r] == kMiss;
        if (ok) want.push_back(a.cost + chain.hypotheses.priors[h]);
      }
    }
    std::sort(want.begin(), want.end());
    want.resize(10);
    auto got = kbest_mimo(chain.stage2, chain.hypotheses, 10);
    ASSERT_EQ(got.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(got.entries[i].total_cost, want[i], 1e-9);
  }
}

TEST(MakeChain, NaiveMurtyOracleAgreesWithEnumeration) {
  std::mt19937_64 rng(8);
  auto c = testing::random_sparse(4, 4, -2.0, 1.0, 0.8, rng);
  auto rows = all_rows(4);
  auto naive = testing::naive_kbest(c, rows, 25);
  auto brute = kbest_bruteforce(c, 25);
  ASSERT_EQ(naive.size(), brute.size());
  for (std::size_t i = 0; i < naive.size(); ++i) EXPECT_NEAR(naive[i].cost, brute.entries[i].total_cost, 1e-9);
}

TEST(GibbsBench, SmallRun) {
  BenchConfig c;
  c.sizes = {20};
  c.trials = 2;
  c.det_k = {5};
  c.samples = {10};
  auto rows = run_gibbs_bench(c);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].method, "deterministic");
  EXPECT_LE(rows[0].mean_ratio, 5.0 + 1e-9);
  EXPECT_GE(rows[0].mean_ratio, 1.0);
  EXPECT_GE(rows[1].mean_ratio, 1.0);
}

}  // namespace
}  // namespace fastassoc
