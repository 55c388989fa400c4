#include "fastassoc/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fastassoc {

namespace {

void check_dims(Index rows, Index cols) {
  if (rows < 0 || cols < 0) {
    throw InvalidInput("matrix dimensions must be non-negative");
  }
}

}  // namespace

SparseCostMatrix SparseCostMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  check_dims(rows, cols);
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseCostMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  m.entries_.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw InvalidInput("entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ") out of range");
    }
    if (!std::isfinite(t.cost)) {
      throw InvalidInput("non-finite cost at (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
    }
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      throw InvalidInput("duplicate entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ")");
    }
    m.entries_.push_back({t.col, t.cost});
    ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
    m.max_abs_ = std::max(m.max_abs_, std::abs(t.cost));
  }
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows); ++i) {
    m.row_ptr_[i + 1] += m.row_ptr_[i];
  }
  return m;
}

SparseCostMatrix SparseCostMatrix::from_dense(Index rows, Index cols, std::span<const double> values) {
  check_dims(rows, cols);
  if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw InvalidInput("dense matrix value count does not match dimensions");
  }
  SparseCostMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.resize(static_cast<std::size_t>(rows) + 1);
  m.entries_.reserve(values.size());
  for (Index i = 0; i < rows; ++i) {
    m.row_ptr_[static_cast<std::size_t>(i)] = m.entries_.size();
    for (Index j = 0; j < cols; ++j) {
      double c = values[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
      if (!std::isfinite(c)) {
        throw InvalidInput("non-finite cost at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      m.entries_.push_back({j, c});
      m.max_abs_ = std::max(m.max_abs_, std::abs(c));
    }
  }
  m.row_ptr_[static_cast<std::size_t>(rows)] = m.entries_.size();
  return m;
}

SparseCostMatrix SparseCostMatrix::from_rows(Index cols, const std::vector<std::vector<Entry>>& rows) {
  check_dims(static_cast<Index>(rows.size()), cols);
  SparseCostMatrix m;
  m.rows_ = static_cast<Index>(rows.size());
  m.cols_ = cols;
  m.row_ptr_.resize(rows.size() + 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m.row_ptr_[i] = m.entries_.size();
    Index last = -1;
    for (const Entry& e : rows[i]) {
      if (e.col <= last || e.col >= cols) {
        throw InvalidInput("row " + std::to_string(i) + " has unsorted or out-of-range columns");
      }
      if (!std::isfinite(e.cost)) {
        throw InvalidInput("non-finite cost in row " + std::to_string(i));
      }
      last = e.col;
      m.entries_.push_back(e);
      m.max_abs_ = std::max(m.max_abs_, std::abs(e.cost));
    }
  }
  m.row_ptr_[rows.size()] = m.entries_.size();
  return m;
}

std::optional<double> SparseCostMatrix::at(Index i, Index j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    return std::nullopt;
  }
  auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, Index c) { return e.col < c; });
  if (it == r.end() || it->col != j) {
    return std::nullopt;
  }
  return it->cost;
}

std::vector<Triplet> SparseCostMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index i = 0; i < rows_; ++i) {
    for (const Entry& e : row(i)) {
      out.push_back({i, e.col, e.cost});
    }
  }
  return out;
}

void HypothesisSet::add(std::vector<Index> objects, double prior) {
  std::sort(objects.begin(), objects.end());
  members.push_back(std::move(objects));
  priors.push_back(prior);
}

void HypothesisSet::validate() const {
  if (members.empty()) {
    throw InvalidInput("hypothesis set is empty");
  }
  if (members.size() != priors.size()) {
    throw InvalidInput("hypothesis membership and prior counts differ");
  }
  for (std::size_t h = 0; h < members.size(); ++h) {
    if (!std::isfinite(priors[h])) {
      throw InvalidInput("hypothesis " + std::to_string(h) + " has a non-finite prior");
    }
    const auto& m = members[h];
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] < 0 || m[k] >= num_objects) {
        throw InvalidInput("hypothesis " + std::to_string(h) + " references object out of range");
      }
      if (k > 0 && m[k - 1] >= m[k]) {
        throw InvalidInput("hypothesis " + std::to_string(h) + " lists objects unsorted or twice");
      }
    }
  }
}

std::vector<std::vector<bool>> HypothesisSet::membership() const {
  std::vector<std::vector<bool>> out(members.size(), std::vector<bool>(static_cast<std::size_t>(num_objects), false));
  for (std::size_t h = 0; h < members.size(); ++h) {
    for (Index i : members[h]) {
      out[h][static_cast<std::size_t>(i)] = true;
    }
  }
  return out;
}

}  // namespace fastassoc
