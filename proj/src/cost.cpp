#include "fastassoc/cost.hpp"

#include <cmath>
#include <string>

namespace fastassoc {

namespace {

void check_model(const LikelihoodModel& model) {
  if (model.miss_row.size() != static_cast<std::size_t>(model.rows) ||
      model.miss_col.size() != static_cast<std::size_t>(model.cols)) {
    throw InvalidInput("miss probability vectors do not match matrix dimensions");
  }
  for (double p : model.miss_row) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidInput("row miss probability outside (0, 1]");
    }
  }
  for (double p : model.miss_col) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw InvalidInput("column miss probability outside (0, 1]");
    }
  }
  for (const Triplet& t : model.likelihoods) {
    if (!(t.cost > 0.0) || !std::isfinite(t.cost)) {
      throw InvalidInput("likelihood at (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                         ") is not strictly positive");
    }
  }
}

void check_row_to(Index rows, Index cols, std::span<const Index> row_to) {
  if (row_to.size() != static_cast<std::size_t>(rows)) {
    throw InvalidInput("association length does not match matrix rows");
  }
  for (Index j : row_to) {
    if (j != kMiss && (j < 0 || j >= cols)) {
      throw InvalidInput("association references column out of range");
    }
  }
}

}  // namespace

SparseCostMatrix build_cost(const LikelihoodModel& model) {
  check_model(model);
  std::vector<Triplet> costs;
  costs.reserve(model.likelihoods.size());
  for (const Triplet& t : model.likelihoods) {
    if (t.row < 0 || t.row >= model.rows || t.col < 0 || t.col >= model.cols) {
      throw InvalidInput("likelihood index out of range");
    }
    double c = -std::log(t.cost) + std::log(model.miss_row[static_cast<std::size_t>(t.row)]) +
               std::log(model.miss_col[static_cast<std::size_t>(t.col)]);
    costs.push_back({t.row, t.col, c});
  }
  return SparseCostMatrix::from_triplets(model.rows, model.cols, std::move(costs));
}

double association_nll(const SparseCostMatrix& matrix, std::span<const Index> row_to) {
  check_row_to(matrix.rows(), matrix.cols(), row_to);
  double total = 0.0;
  for (Index i = 0; i < matrix.rows(); ++i) {
    Index j = row_to[static_cast<std::size_t>(i)];
    if (j == kMiss) {
      continue;
    }
    auto c = matrix.at(i, j);
    if (!c) {
      throw Infeasible("association uses gated-out pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    total += *c;
  }
  return total;
}

double association_probability(const LikelihoodModel& model, std::span<const Index> row_to) {
  check_model(model);
  check_row_to(model.rows, model.cols, row_to);
  std::vector<bool> col_used(static_cast<std::size_t>(model.cols), false);
  double p = 1.0;
  for (Index i = 0; i < model.rows; ++i) {
    Index j = row_to[static_cast<std::size_t>(i)];
    if (j == kMiss) {
      p *= model.miss_row[static_cast<std::size_t>(i)];
      continue;
    }
    const Triplet* found = nullptr;
    for (const Triplet& t : model.likelihoods) {
      if (t.row == i && t.col == j) {
        found = &t;
        break;
      }
    }
    if (found == nullptr) {
      throw Infeasible("association uses gated-out pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    p *= found->cost;
    col_used[static_cast<std::size_t>(j)] = true;
  }
  for (Index j = 0; j < model.cols; ++j) {
    if (!col_used[static_cast<std::size_t>(j)]) {
      p *= model.miss_col[static_cast<std::size_t>(j)];
    }
  }
  return p;
}

double dropped_log_constant(const LikelihoodModel& model) {
  check_model(model);
  double s = 0.0;
  for (double p : model.miss_row) s += std::log(p);
  for (double p : model.miss_col) s += std::log(p);
  return s;
}

std::optional<Violation> validate_association(const SparseCostMatrix& matrix, const Association& assoc,
                                              bool check_cost) {
  if (assoc.row_to.size() != static_cast<std::size_t>(matrix.rows())) {
    return Violation{ViolationKind::wrong_length, -1, -1, "association length does not match matrix rows"};
  }
  std::vector<Index> owner(static_cast<std::size_t>(matrix.cols()), kMiss);
  double total = 0.0;
  for (Index i = 0; i < matrix.rows(); ++i) {
    Index j = assoc.row_to[static_cast<std::size_t>(i)];
    if (j == kMiss) {
      continue;
    }
    if (j < 0 || j >= matrix.cols()) {
      return Violation{ViolationKind::bad_index, i, j, "row " + std::to_string(i) + " maps to invalid column"};
    }
    if (owner[static_cast<std::size_t>(j)] != kMiss) {
      return Violation{ViolationKind::duplicate_column, i, j,
                       "column " + std::to_string(j) + " assigned to rows " +
                           std::to_string(owner[static_cast<std::size_t>(j)]) + " and " + std::to_string(i)};
    }
    owner[static_cast<std::size_t>(j)] = i;
    auto c = matrix.at(i, j);
    if (!c) {
      return Violation{ViolationKind::infeasible_pair, i, j,
                       "pair (" + std::to_string(i) + ", " + std::to_string(j) + ") is gated out"};
    }
    total += *c;
  }
  if (check_cost && std::abs(total - assoc.cost) > matrix.tolerance() * (1.0 + static_cast<double>(matrix.rows()))) {
    return Violation{ViolationKind::cost_mismatch, -1, -1,
                     "stored cost " + std::to_string(assoc.cost) + " differs from recomputed " + std::to_string(total)};
  }
  return std::nullopt;
}

}  // namespace fastassoc
