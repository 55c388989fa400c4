#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "fastassoc/kbest.hpp"
#include "fastassoc/types.hpp"

namespace fastassoc {

/// size x size matrix with i.i.d. entries uniform on (-2, -1).
SparseCostMatrix gen_random_dense(Index size, std::uint64_t seed);

/// Keeps the S lowest-cost entries of each row (ties by column index).
/// Throws InvalidInput when S < 1.
SparseCostMatrix gate_matrix(const SparseCostMatrix& matrix, Index S);

/// Smallest S for which gate_matrix(matrix, S) yields the same K-best
/// solution set as the dense matrix.
Index min_sufficient_gate(const SparseCostMatrix& matrix, std::size_t k);

/// Runs fn(0..n-1) on up to `threads` workers. Exceptions are rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct TimingStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  std::size_t samples = 0;
};
TimingStats summarize(std::vector<double> ms);

struct BenchConfig {
  std::vector<Index> sizes{100, 200, 400, 800};
  std::size_t k = 200;
  std::size_t trials = 5;
  std::uint64_t seed = 1;
  /// Pairs kept per row for the sparse version.
  Index gate = 30;
  std::vector<int> versions{1, 2, 3, 4};
  unsigned threads = 1;
  /// Gibbs table: deterministic K values and sample counts.
  std::vector<std::size_t> det_k{10, 1000};
  std::vector<std::size_t> samples{10, 10000};

  /// Throws InvalidInput on an empty or out-of-range field.
  void validate() const;
};

/// Seed of the matrix used for (size, trial); shared across versions.
std::uint64_t instance_seed(std::uint64_t seed, Index size, std::size_t trial);

KBestConfig version_config(int version);

struct DenseBenchRow {
  Index size = 0;
  int version = 0;
  TimingStats time;
  /// Every trial produced the same solution set as the first listed version.
  bool same_solutions = true;
};
std::vector<DenseBenchRow> run_dense_bench(const BenchConfig& config);
void write_csv(std::ostream& out, const std::vector<DenseBenchRow>& rows);

/// Two-stage problem: the top-K of `stage1` become input hypotheses over
/// the rows of `stage2`, one row per distinct matched (row, col) pair.
struct ChainedProblem {
  SparseCostMatrix stage1;
  OutputSet stage1_out;
  std::vector<std::pair<Index, Index>> pairs;
  SparseCostMatrix stage2;
  HypothesisSet hypotheses;
};
ChainedProblem make_chain(Index size, std::size_t k, std::uint64_t seed);

struct MimoBenchRow {
  Index size = 0;
  std::size_t stage2_rows = 0;
  TimingStats time;
  std::size_t peak_live_nodes = 0;
};
std::vector<MimoBenchRow> run_mimo_bench(const BenchConfig& config);
void write_csv(std::ostream& out, const std::vector<MimoBenchRow>& rows);

struct GibbsBenchRow {
  std::string method;  // "deterministic" or "gibbs"
  std::size_t count = 0;  // K or samples
  double mean_ratio = 0.0;
  TimingStats time;
};
/// Likelihood ratio and runtime, deterministic K-best versus Gibbs, on
/// sizes.front() square instances.
std::vector<GibbsBenchRow> run_gibbs_bench(const BenchConfig& config);
void write_csv(std::ostream& out, const std::vector<GibbsBenchRow>& rows);

struct GateSweepRow {
  Index size = 0;
  std::size_t trial = 0;
  Index s_star = 0;
};
std::vector<GateSweepRow> run_gate_sweep(const BenchConfig& config);
void write_csv(std::ostream& out, const std::vector<GateSweepRow>& rows);

}  // namespace fastassoc
