#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "fastassoc/minmax_heap.hpp"
#include "fastassoc/ssp.hpp"
#include "fastassoc/types.hpp"

namespace fastassoc {

/// Solver options. The named versions are cumulative:
///   v1 implicit miss handling only
///   v2 + early stopping against the current K-th best cost
///   v3 + look-ahead ordering of subproblems
///   v4 + sparse shortest paths (pair with a gated matrix)
struct KBestConfig {
  bool early_stop = true;
  bool lookahead = true;
  bool sparse = false;
  /// Verify reductions after every node solve; throws std::logic_error on
  /// violation.
  bool check_duals = false;

  static KBestConfig v1() { return {false, false, false}; }
  static KBestConfig v2() { return {true, false, false}; }
  static KBestConfig v3() { return {true, true, false}; }
  static KBestConfig v4() { return {true, true, true}; }

  /// "v1".."v4"; throws InvalidInput otherwise.
  static KBestConfig parse(std::string_view name);

  SearchKind search_kind() const { return sparse ? SearchKind::sparse : SearchKind::augmented; }
};

struct OutputEntry {
  Association assoc;
  std::size_t parent = 0;
  /// Parent prior plus association NLL.
  double total_cost = 0.0;
};

/// Output hypotheses sorted by total cost.
struct OutputSet {
  std::vector<OutputEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<double> costs() const;
};

/// A Murty subproblem. Rows outside the parent hypothesis hold kUnassigned
/// in row_to. For an unsolved child, row_to is the parent's solution and
/// pending_row is the row whose assignment is now forbidden.
struct ProblemNode {
  std::vector<Index> row_to;
  DualState duals;
  /// Rows held to their row_to entry.
  std::vector<char> fixed;
  /// Sorted; only pairs on non-fixed rows are kept.
  std::vector<ForbiddenPair> forbidden;
  double cost = 0.0;
  double lower_bound = 0.0;
  std::size_t hypothesis = 0;
  Index pending_row = -1;
  bool solved = false;
};

/// cost + min over the row's allowed columns (and the miss, when allowed) of
/// the reduced cost, excluding the row's current assignment, its forbidden
/// pairs and columns held by fixed rows. +infinity when nothing is allowed.
double lookahead_bound(const ProblemNode& node, const SparseCostMatrix& matrix, Index partition_row);

/// Non-fixed rows of a solved node in child order: increasing index, or
/// decreasing lookahead_bound (ties by index) when `lookahead` is set.
std::vector<Index> partition_order(const ProblemNode& node, const SparseCostMatrix& matrix, bool lookahead);

/// Unsolved children: child t forbids row t's assignment and fixes every row
/// before it in partition_order.
std::vector<ProblemNode> partition(const ProblemNode& node, const SparseCostMatrix& matrix, bool lookahead);

/// Solves an unsolved child with one shortest path from its pending row.
PathStatus solve_node(ProblemNode& node, const SparseCostMatrix& matrix, SearchKind kind, double bound = kInfinity);

/// True when row_to honors the node's fixed and forbidden constraints.
bool node_admits(const ProblemNode& node, std::span<const Index> row_to);

struct KBestStats {
  std::size_t nodes_solved = 0;
  std::size_t nodes_pruned = 0;
  std::size_t nodes_infeasible = 0;
  std::size_t peak_queue = 0;
  std::size_t peak_live_nodes = 0;
  std::size_t dual_checks = 0;
};

/// Murty's algorithm over a capacity-K double-ended queue. One instance per
/// thread; the matrix must outlive it.
class KBestSolver {
 public:
  KBestSolver(const SparseCostMatrix& matrix, KBestConfig config);

  OutputSet solve(std::size_t k);
  OutputSet solve(const HypothesisSet& hypotheses, std::size_t k);

  const KBestStats& stats() const { return stats_; }

 private:
  struct QueueItem {
    double cost;
    std::uint64_t seq;
    std::uint32_t node;
  };
  struct QueueLess {
    bool operator()(const QueueItem& a, const QueueItem& b) const {
      return a.cost != b.cost ? a.cost < b.cost : a.seq < b.seq;
    }
  };

  std::uint32_t allocate();
  void release(std::uint32_t id);
  double worst_bound(std::size_t capacity) const;
  bool offer(std::uint32_t id, std::size_t capacity);
  void expand(std::uint32_t parent, std::size_t capacity);
  void verify(const ProblemNode& node);
  OutputEntry emit(const ProblemNode& node, const HypothesisSet& hypotheses) const;

  const SparseCostMatrix* matrix_;
  KBestConfig config_;
  SspSolver ssp_;
  MinMaxHeap<QueueItem, QueueLess> queue_;
  std::vector<ProblemNode> pool_;
  std::vector<std::uint32_t> free_;
  std::uint64_t seq_ = 0;
  KBestStats stats_;
  Matching scratch_;
  std::vector<char> mask_;
};

/// The K lowest-NLL associations of a single input hypothesis containing
/// every row, sorted by cost.
OutputSet kbest_single(const SparseCostMatrix& matrix, std::size_t k, KBestConfig config = KBestConfig::v3());

/// The K best (prior + association) pairs over all input hypotheses.
OutputSet kbest_mimo(const SparseCostMatrix& matrix, const HypothesisSet& hypotheses, std::size_t k,
                     KBestConfig config = KBestConfig::v3());

}  // namespace fastassoc
