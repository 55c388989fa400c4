#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fastassoc {

using Index = std::int32_t;

/// Row assignment meaning "no measurement" (the implicit miss column).
/// Also used for a column that is not matched to any row.
inline constexpr Index kMiss = -1;

/// Row that takes no part in the current problem (not yet added, or not
/// present in the hypothesis being solved).
inline constexpr Index kUnassigned = -2;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  Index row;
  Index col;
  double cost;
};

/// Negative log-likelihood cost matrix in compressed-row form.
///
/// Pairs absent from the structure are infeasible. Misses are implicit and
/// always cost 0, so they never appear here. Column indices within a row are
/// strictly increasing. Immutable after construction.
class SparseCostMatrix {
 public:
  struct Entry {
    Index col;
    double cost;
  };

  SparseCostMatrix() = default;

  /// Builds from unordered triplets. Throws InvalidInput on out-of-range
  /// indices, duplicate pairs or non-finite costs.
  static SparseCostMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);

  /// Row-major dense input; every pair is stored.
  static SparseCostMatrix from_dense(Index rows, Index cols, std::span<const double> values);

  /// Builds from per-row entry lists that already satisfy the invariants
  /// (checked).
  static SparseCostMatrix from_rows(Index cols, const std::vector<std::vector<Entry>>& rows);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const Entry> row(Index i) const {
    return {entries_.data() + row_ptr_[static_cast<std::size_t>(i)],
            entries_.data() + row_ptr_[static_cast<std::size_t>(i) + 1]};
  }

  /// Cost of (i, j) or nullopt when the pair is gated out.
  std::optional<double> at(Index i, Index j) const;

  bool is_dense() const { return nnz() == static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }
  double max_abs_cost() const { return max_abs_; }

  /// Scale-relative tolerance for dual checks: 1e-9 * (1 + max |C|).
  double tolerance() const { return 1e-9 * (1.0 + max_abs_); }

  std::vector<Triplet> triplets() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  double max_abs_ = 0.0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> entries_;
};

/// One row-to-(column | kMiss) mapping and its NLL.
struct Association {
  std::vector<Index> row_to;
  double cost = 0.0;
  std::optional<std::size_t> parent_hypothesis;

  friend bool operator==(const Association&, const Association&) = default;
};

/// Row and column reductions. The miss column's reduction is fixed at 0 and
/// not stored.
struct DualState {
  std::vector<double> u;
  std::vector<double> v;

  DualState() = default;
  DualState(Index rows, Index cols)
      : u(static_cast<std::size_t>(rows), 0.0), v(static_cast<std::size_t>(cols), 0.0) {}
};

/// Input hypotheses over a shared vector of object slots (matrix rows).
struct HypothesisSet {
  Index num_objects = 0;
  /// Sorted object indices present in each hypothesis.
  std::vector<std::vector<Index>> members;
  /// NLL offset of each hypothesis.
  std::vector<double> priors;

  std::size_t size() const { return members.size(); }

  void add(std::vector<Index> objects, double prior);

  /// Throws InvalidInput when empty, when a prior is not finite, or when a
  /// member index is out of range or repeated.
  void validate() const;

  /// Dense K x M membership view.
  std::vector<std::vector<bool>> membership() const;
};

}  // namespace fastassoc
