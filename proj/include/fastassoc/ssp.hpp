#pragma once

#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fastassoc/types.hpp"

namespace fastassoc {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A (row, column) pair excluded from a problem. col == kMiss forbids the
/// row from going missing.
struct ForbiddenPair {
  Index row;
  Index col;

  friend auto operator<=>(const ForbiddenPair&, const ForbiddenPair&) = default;
};

/// Current partial matching. Rows hold a column, kMiss (missing) or
/// kUnassigned (not part of the problem). Columns hold a row or kMiss.
struct Matching {
  std::vector<Index> row_to;
  std::vector<Index> col_to;

  Matching() = default;
  Matching(Index rows, Index cols)
      : row_to(static_cast<std::size_t>(rows), kUnassigned), col_to(static_cast<std::size_t>(cols), kMiss) {}

  /// Builds col_to from row_to. Throws InvalidInput on a repeated column.
  static Matching from_rows(Index cols, std::vector<Index> row_to);

  bool consistent() const;
};

enum class SearchKind {
  dense,      // plain assignment, no misses
  augmented,  // implicit miss column, linear argmin over unused columns
  sparse,     // implicit miss column, lazy-deletion priority queue over stored pairs
};

enum class PathStatus { found, pruned, infeasible };

/// pathback marker: column reached from the implicit augmentation block,
/// i.e. it becomes missing when the path is applied.
inline constexpr Index kFromAugmentation = -3;

struct PathResult {
  PathStatus status = PathStatus::infeasible;
  Index start_row = -1;
  /// p_T, the reduced-cost length of the augmenting path.
  double distance = 0.0;
  /// Last real column on the path, or kMiss when the final row goes missing.
  Index terminal = kMiss;
  /// Predecessor of each column, indexed [0, N] with the miss column at N.
  /// Only meaningful for columns listed in `scanned`.
  std::vector<Index> pathback;
  /// Column through which the miss column was entered, or -1 when it was
  /// entered from a row going missing.
  Index theta_entry_col = -1;
  /// Finalized columns in pop order with their distances p_j (miss column
  /// reported as kMiss).
  std::vector<std::pair<Index, double>> scanned;
};

/// Restrictions on a single search. An empty row mask means every assigned
/// row is active. Rows that are matched but inactive are fixed: their
/// columns are unavailable and they never move.
struct SearchConstraints {
  std::span<const char> row_active;
  /// Sorted by (row, col).
  std::span<const ForbiddenPair> forbidden;
  /// One additional forbidden pair; row < 0 means none.
  ForbiddenPair extra{-1, -1};
};

/// Reusable Dijkstra workspace over one matrix. Distances are invalidated
/// by an epoch counter, so no per-call reset or allocation occurs once the
/// buffers have grown.
class PathSearch {
 public:
  explicit PathSearch(const SparseCostMatrix& matrix);

  /// Shortest augmenting path from `new_row` (which must be kUnassigned in
  /// `matching`) to a target. `targets` lists unmatched columns that end the
  /// path; kMiss in `targets` makes the miss column a target. Returns pruned
  /// as soon as the smallest tentative distance exceeds `bound`.
  const PathResult& run(SearchKind kind, const DualState& duals, const Matching& matching, Index new_row,
                        std::span<const Index> targets, double bound, const SearchConstraints& constraints = {});

  const SparseCostMatrix& matrix() const { return *matrix_; }

 private:
  bool active(const Matching& m, std::span<const char> mask, Index r) const;
  void mark_forbidden(const SearchConstraints& c, Index row);
  void relax(Index col, double path, Index from);

  const SparseCostMatrix* matrix_;
  SearchKind kind_ = SearchKind::augmented;
  std::uint32_t epoch_ = 0;
  std::uint32_t forbid_epoch_ = 0;
  std::vector<double> dist_;
  std::vector<std::uint32_t> dist_stamp_;
  std::vector<std::uint32_t> used_stamp_;
  std::vector<std::uint32_t> target_stamp_;
  std::vector<std::uint32_t> forbid_stamp_;
  std::vector<Index> unused_;
  std::vector<Index> missing_rows_;
  using QueueEntry = std::pair<double, Index>;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> heap_;
  PathResult result_;
};

/// Plain assignment search: no misses, unmatched columns outside `targets` are
/// dead ends.
PathResult shortest_path_dense(const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                               Index new_row, std::span<const Index> targets, double bound = kInfinity);

/// Search over the implicitly augmented problem with linear argmin.
PathResult shortest_path_augmented(const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                                   Index new_row, std::span<const Index> targets, double bound = kInfinity,
                                   const SearchConstraints& constraints = {});

/// Same contract as shortest_path_augmented, visiting only stored pairs.
PathResult shortest_path_sparse(const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                                Index new_row, std::span<const Index> targets, double bound = kInfinity,
                                const SearchConstraints& constraints = {});

/// Flips the matching along a found path.
void augment(Matching& matching, const PathResult& path);

/// Reduction update after `augment`: v_j -= max(p_T - p_j, 0) for scanned
/// columns, renormalized so the miss column keeps reduction 0, then
/// u_i = C[i, row_to[i]] - v[row_to[i]] for matched rows and 0 for missing
/// rows.
void update_duals(const SparseCostMatrix& matrix, DualState& duals, const PathResult& path, const Matching& matching);

/// Checks dual feasibility and complementary slackness over the active
/// part of the problem. Returns a description of the first violation.
std::optional<std::string> check_duals(const SparseCostMatrix& matrix, const DualState& duals,
                                       const Matching& matching, const SearchConstraints& constraints = {},
                                       double eps = -1.0);

struct SolveRequest {
  /// Rows to insert, in order. Rows not listed take no part.
  std::span<const Index> rows{};
  std::span<const ForbiddenPair> forbidden{};
  /// Mandatory (row, col|kMiss) assignments; these rows need not appear in
  /// `rows`.
  std::span<const std::pair<Index, Index>> fixed{};
  double bound = kInfinity;
  SearchKind kind = SearchKind::augmented;
};

struct Solution {
  Association assoc;
  DualState duals;
  Matching matching;
};

/// Successive-shortest-paths solver owning its search workspace.
class SspSolver {
 public:
  explicit SspSolver(const SparseCostMatrix& matrix) : search_(matrix) {}

  /// Optimal association over the requested rows from zero reductions.
  /// Returns nullopt when the cost provably exceeds `bound`. Throws
  /// InvalidInput on contradictory fixed assignments and Infeasible when the
  /// constraints admit no association.
  std::optional<Solution> solve(const SolveRequest& request);

  PathSearch& search() { return search_; }

 private:
  PathSearch search_;
};

std::optional<Solution> solve_optimal(const SparseCostMatrix& matrix, const SolveRequest& request);

/// 0, 1, ..., rows - 1.
std::vector<Index> all_rows(Index rows);

}  // namespace fastassoc
