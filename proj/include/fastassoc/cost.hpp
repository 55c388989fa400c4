#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastassoc/types.hpp"

namespace fastassoc {

/// Raw association model: pairwise likelihoods plus per-row and per-column
/// miss probabilities. Likelihoods not listed are zero (gated out).
struct LikelihoodModel {
  Index rows = 0;
  Index cols = 0;
  std::vector<Triplet> likelihoods;  // cost field holds L_ij > 0
  std::vector<double> miss_row;      // p(i miss), in (0, 1]
  std::vector<double> miss_col;      // p(j miss), in (0, 1]
};

/// C_ij = -log L_ij + log p(i miss) + log p(j miss), same sparsity as the
/// likelihoods.
SparseCostMatrix build_cost(const LikelihoodModel& model);

/// Sum of C over matched pairs. Throws Infeasible if a matched pair is not
/// stored, InvalidInput if row_to has the wrong length or a bad index.
double association_nll(const SparseCostMatrix& matrix, std::span<const Index> row_to);

/// Unnormalized P(A): product of matched likelihoods and of the miss
/// probabilities of every unmatched row and column.
double association_probability(const LikelihoodModel& model, std::span<const Index> row_to);

/// The constant dropped when moving from P(A) to NLL(A):
/// sum_i log p(i miss) + sum_j log p(j miss).
double dropped_log_constant(const LikelihoodModel& model);

enum class ViolationKind { wrong_length, bad_index, duplicate_column, infeasible_pair, cost_mismatch };

struct Violation {
  ViolationKind kind;
  Index row = -1;
  Index col = -1;
  std::string message;
};

/// Reports the first broken Association invariant, or nullopt if valid.
/// When check_cost is set, assoc.cost must match the recomputed NLL to the
/// matrix tolerance.
std::optional<Violation> validate_association(const SparseCostMatrix& matrix, const Association& assoc,
                                              bool check_cost = false);

}  // namespace fastassoc
