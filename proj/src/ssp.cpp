#include "fastassoc/ssp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fastassoc {

Matching Matching::from_rows(Index cols, std::vector<Index> row_to) {
  Matching m;
  m.col_to.assign(static_cast<std::size_t>(cols), kMiss);
  for (std::size_t i = 0; i < row_to.size(); ++i) {
    Index j = row_to[i];
    if (j >= 0) {
      if (j >= cols || m.col_to[static_cast<std::size_t>(j)] != kMiss) {
        throw InvalidInput("matching assigns column " + std::to_string(j) + " invalidly");
      }
      m.col_to[static_cast<std::size_t>(j)] = static_cast<Index>(i);
    }
  }
  m.row_to = std::move(row_to);
  return m;
}

bool Matching::consistent() const {
  for (std::size_t i = 0; i < row_to.size(); ++i) {
    Index j = row_to[i];
    if (j >= 0 && (static_cast<std::size_t>(j) >= col_to.size() || col_to[static_cast<std::size_t>(j)] != static_cast<Index>(i))) {
      return false;
    }
  }
  for (std::size_t j = 0; j < col_to.size(); ++j) {
    Index i = col_to[j];
    if (i >= 0 && (static_cast<std::size_t>(i) >= row_to.size() || row_to[static_cast<std::size_t>(i)] != static_cast<Index>(j))) {
      return false;
    }
  }
  return true;
}

PathSearch::PathSearch(const SparseCostMatrix& matrix) : matrix_(&matrix) {
  std::size_t n = static_cast<std::size_t>(matrix.cols()) + 1;
  dist_.resize(n);
  dist_stamp_.assign(n, 0);
  used_stamp_.assign(n, 0);
  target_stamp_.assign(n, 0);
  forbid_stamp_.assign(n, 0);
  result_.pathback.assign(n, -1);
  unused_.reserve(n);
}

bool PathSearch::active(const Matching& m, std::span<const char> mask, Index r) const {
  if (m.row_to[static_cast<std::size_t>(r)] == kUnassigned) {
    return false;
  }
  return mask.empty() || mask[static_cast<std::size_t>(r)] != 0;
}

void PathSearch::mark_forbidden(const SearchConstraints& c, Index row) {
  ++forbid_epoch_;
  if (forbid_epoch_ == 0) {
    std::fill(forbid_stamp_.begin(), forbid_stamp_.end(), 0);
    forbid_epoch_ = 1;
  }
  const Index theta = matrix_->cols();
  auto mark = [&](Index col) { forbid_stamp_[static_cast<std::size_t>(col == kMiss ? theta : col)] = forbid_epoch_; };
  if (!c.forbidden.empty()) {
    auto lo = std::lower_bound(c.forbidden.begin(), c.forbidden.end(), row,
                               [](const ForbiddenPair& p, Index r) { return p.row < r; });
    for (auto it = lo; it != c.forbidden.end() && it->row == row; ++it) {
      mark(it->col);
    }
  }
  if (c.extra.row == row) {
    mark(c.extra.col);
  }
}

void PathSearch::relax(Index col, double path, Index from) {
  auto k = static_cast<std::size_t>(col);
  if (dist_stamp_[k] != epoch_ || path < dist_[k]) {
    dist_[k] = path;
    dist_stamp_[k] = epoch_;
    result_.pathback[k] = from;
    if (kind_ == SearchKind::sparse) {
      heap_.emplace(path, col);
    }
  }
}

const PathResult& PathSearch::run(SearchKind kind, const DualState& duals, const Matching& matching, Index new_row,
                                  std::span<const Index> targets, double bound, const SearchConstraints& constraints) {
  const SparseCostMatrix& C = *matrix_;
  const Index n = C.cols();
  const Index theta = n;
  const bool misses = kind != SearchKind::dense;
  kind_ = kind;

  ++epoch_;
  if (epoch_ == 0) {
    std::fill(dist_stamp_.begin(), dist_stamp_.end(), 0);
    std::fill(used_stamp_.begin(), used_stamp_.end(), 0);
    std::fill(target_stamp_.begin(), target_stamp_.end(), 0);
    epoch_ = 1;
  }

  result_.status = PathStatus::infeasible;
  result_.start_row = new_row;
  result_.distance = 0.0;
  result_.terminal = kMiss;
  result_.theta_entry_col = -1;
  result_.scanned.clear();
  while (!heap_.empty()) heap_.pop();

  bool theta_target = false;
  for (Index t : targets) {
    if (t == kMiss) {
      theta_target = misses;
    } else {
      target_stamp_[static_cast<std::size_t>(t)] = epoch_;
    }
  }
  auto is_target = [&](Index col) { return target_stamp_[static_cast<std::size_t>(col)] == epoch_; };
  auto used = [&](Index col) { return used_stamp_[static_cast<std::size_t>(col)] == epoch_; };
  auto excluded = [&](Index col) {
    Index owner = matching.col_to[static_cast<std::size_t>(col)];
    return owner >= 0 && !active(matching, constraints.row_active, owner);
  };

  const bool scan = kind != SearchKind::sparse;
  if (scan) {
    unused_.clear();
    for (Index c = 0; c < n; ++c) {
      if (!excluded(c)) unused_.push_back(c);
    }
  }
  bool theta_used = !misses;
  if (theta_used) used_stamp_[static_cast<std::size_t>(theta)] = epoch_;

  auto expand_row = [&](Index row, double d) {
    mark_forbidden(constraints, row);
    const double ur = duals.u[static_cast<std::size_t>(row)];
    for (const auto& e : C.row(row)) {
      if (used(e.col) || forbid_stamp_[static_cast<std::size_t>(e.col)] == forbid_epoch_ || excluded(e.col)) {
        continue;
      }
      relax(e.col, d + e.cost - ur - duals.v[static_cast<std::size_t>(e.col)], row);
    }
    if (!theta_used && forbid_stamp_[static_cast<std::size_t>(theta)] != forbid_epoch_) {
      relax(theta, d - ur, row);
    }
  };

  auto expand_augmentation = [&](double d) {
    // exit on column: an augmenting row takes the column
    for (Index c = 0; c < n; ++c) {
      if (used(c) || excluded(c)) continue;
      if (matching.col_to[static_cast<std::size_t>(c)] == kMiss && !is_target(c)) continue;
      relax(c, d - duals.v[static_cast<std::size_t>(c)], kFromAugmentation);
    }
    // exit on row: a missing row leaves its augmenting column
    missing_rows_.clear();
    for (Index r = 0; r < C.rows(); ++r) {
      if (r != new_row && matching.row_to[static_cast<std::size_t>(r)] == kMiss && active(matching, constraints.row_active, r)) {
        missing_rows_.push_back(r);
      }
    }
    for (Index r : missing_rows_) {
      mark_forbidden(constraints, r);
      const double ur = duals.u[static_cast<std::size_t>(r)];
      for (const auto& e : C.row(r)) {
        if (used(e.col) || forbid_stamp_[static_cast<std::size_t>(e.col)] == forbid_epoch_ || excluded(e.col)) {
          continue;
        }
        relax(e.col, d + e.cost - ur - duals.v[static_cast<std::size_t>(e.col)], r);
      }
    }
  };

  auto pop_min = [&](Index& col, double& d) -> bool {
    if (scan) {
      std::size_t best = unused_.size();
      double best_d = kInfinity;
      for (std::size_t k = 0; k < unused_.size(); ++k) {
        Index c = unused_[k];
        if (dist_stamp_[static_cast<std::size_t>(c)] != epoch_) continue;
        double dc = dist_[static_cast<std::size_t>(c)];
        if (dc < best_d || (dc == best_d && best < unused_.size() && c < unused_[best])) {
          best_d = dc;
          best = k;
        }
      }
      bool theta_ok = !theta_used && dist_stamp_[static_cast<std::size_t>(theta)] == epoch_;
      if (theta_ok && dist_[static_cast<std::size_t>(theta)] < best_d) {
        col = theta;
        d = dist_[static_cast<std::size_t>(theta)];
        return true;
      }
      if (best == unused_.size()) return false;
      col = unused_[best];
      d = best_d;
      unused_[best] = unused_.back();
      unused_.pop_back();
      return true;
    }
    while (!heap_.empty()) {
      auto [dc, c] = heap_.top();
      heap_.pop();
      if (!used(c)) {
        col = c;
        d = dc;
        return true;
      }
    }
    return false;
  };

  Index row = new_row;
  double d = 0.0;
  expand_row(row, d);
  while (true) {
    Index col = -1;
    if (!pop_min(col, d)) {
      result_.status = PathStatus::infeasible;
      return result_;
    }
    if (d > bound) {
      result_.status = PathStatus::pruned;
      result_.distance = d;
      return result_;
    }
    used_stamp_[static_cast<std::size_t>(col)] = epoch_;
    result_.scanned.emplace_back(col == theta ? kMiss : col, d);

    if (col == theta) {
      theta_used = true;
      if (theta_target) {
        result_.status = PathStatus::found;
        result_.distance = d;
        result_.terminal = kMiss;
        return result_;
      }
      expand_augmentation(d);
      continue;
    }
    if (is_target(col)) {
      result_.status = PathStatus::found;
      result_.distance = d;
      result_.terminal = col;
      return result_;
    }
    Index owner = matching.col_to[static_cast<std::size_t>(col)];
    if (owner >= 0) {
      expand_row(owner, d);
      continue;
    }
    // unmatched column: held by an augmenting row
    if (!theta_used) {
      theta_used = true;
      used_stamp_[static_cast<std::size_t>(theta)] = epoch_;
      result_.pathback[static_cast<std::size_t>(theta)] = col;
      result_.theta_entry_col = col;
      result_.scanned.emplace_back(kMiss, d);
      if (theta_target) {
        result_.status = PathStatus::found;
        result_.distance = d;
        result_.terminal = col;
        return result_;
      }
      expand_augmentation(d);
    }
  }
}

namespace {

PathResult run_once(SearchKind kind, const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                    Index new_row, std::span<const Index> targets, double bound, const SearchConstraints& c) {
  if (new_row < 0 || new_row >= matrix.rows() || matching.row_to[static_cast<std::size_t>(new_row)] != kUnassigned) {
    throw InvalidInput("new row must be an unassigned row of the matrix");
  }
  PathSearch search(matrix);
  return search.run(kind, duals, matching, new_row, targets, bound, c);
}

}  // namespace

PathResult shortest_path_dense(const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                               Index new_row, std::span<const Index> targets, double bound) {
  return run_once(SearchKind::dense, matrix, duals, matching, new_row, targets, bound, {});
}

PathResult shortest_path_augmented(const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                                   Index new_row, std::span<const Index> targets, double bound,
                                   const SearchConstraints& constraints) {
  return run_once(SearchKind::augmented, matrix, duals, matching, new_row, targets, bound, constraints);
}

PathResult shortest_path_sparse(const SparseCostMatrix& matrix, const DualState& duals, const Matching& matching,
                                Index new_row, std::span<const Index> targets, double bound,
                                const SearchConstraints& constraints) {
  return run_once(SearchKind::sparse, matrix, duals, matching, new_row, targets, bound, constraints);
}

void augment(Matching& m, const PathResult& path) {
  if (path.status != PathStatus::found) {
    throw InvalidInput("cannot augment along a path that was not found");
  }
  const Index theta = static_cast<Index>(m.col_to.size());
  Index j = path.terminal == kMiss ? theta : path.terminal;
  while (true) {
    if (j == theta) {
      if (path.theta_entry_col >= 0) {
        j = path.theta_entry_col;
        continue;
      }
      Index r = path.pathback[static_cast<std::size_t>(theta)];
      Index prev = m.row_to[static_cast<std::size_t>(r)];
      m.row_to[static_cast<std::size_t>(r)] = kMiss;
      if (r == path.start_row) break;
      j = prev;
      continue;
    }
    Index i = path.pathback[static_cast<std::size_t>(j)];
    if (i == kFromAugmentation) {
      m.col_to[static_cast<std::size_t>(j)] = kMiss;
      j = theta;
      continue;
    }
    Index prev = m.row_to[static_cast<std::size_t>(i)];
    m.row_to[static_cast<std::size_t>(i)] = j;
    m.col_to[static_cast<std::size_t>(j)] = i;
    if (i == path.start_row) break;
    j = prev == kMiss ? theta : prev;
  }
}

void update_duals(const SparseCostMatrix& matrix, DualState& duals, const PathResult& path, const Matching& m) {
  const double pT = path.distance;
  double shift = 0.0;
  for (const auto& [col, pj] : path.scanned) {
    if (col == kMiss) {
      shift = std::max(pT - pj, 0.0);
    } else if (pj < pT) {
      duals.v[static_cast<std::size_t>(col)] -= pT - pj;
    }
  }
  for (std::size_t c = 0; c < m.col_to.size(); ++c) {
    if (m.col_to[c] == kMiss) {
      duals.v[c] = 0.0;
    } else {
      duals.v[c] += shift;
    }
  }
  for (std::size_t r = 0; r < m.row_to.size(); ++r) {
    Index j = m.row_to[r];
    if (j == kMiss) {
      duals.u[r] = 0.0;
    } else if (j >= 0) {
      duals.u[r] = *matrix.at(static_cast<Index>(r), j) - duals.v[static_cast<std::size_t>(j)];
    }
  }
}

std::optional<std::string> check_duals(const SparseCostMatrix& matrix, const DualState& duals, const Matching& m,
                                       const SearchConstraints& constraints, double eps) {
  if (eps < 0.0) eps = matrix.tolerance();
  auto is_active = [&](Index r) {
    if (m.row_to[static_cast<std::size_t>(r)] == kUnassigned) return false;
    return constraints.row_active.empty() || constraints.row_active[static_cast<std::size_t>(r)] != 0;
  };
  auto excluded = [&](Index c) {
    Index owner = m.col_to[static_cast<std::size_t>(c)];
    return owner >= 0 && !is_active(owner);
  };
  auto forbidden = [&](Index r, Index c) {
    if (constraints.extra.row == r && constraints.extra.col == c) return true;
    return std::binary_search(constraints.forbidden.begin(), constraints.forbidden.end(), ForbiddenPair{r, c});
  };
  auto describe = [](const std::string& what, Index r, Index c, double value) {
    return what + " at (" + std::to_string(r) + ", " + std::to_string(c) + "): " + std::to_string(value);
  };
  for (Index r = 0; r < matrix.rows(); ++r) {
    if (!is_active(r)) continue;
    const double ur = duals.u[static_cast<std::size_t>(r)];
    const Index assigned = m.row_to[static_cast<std::size_t>(r)];
    for (const auto& e : matrix.row(r)) {
      if (excluded(e.col) || forbidden(r, e.col)) continue;
      double red = e.cost - ur - duals.v[static_cast<std::size_t>(e.col)];
      if (red < -eps) return describe("negative reduced cost", r, e.col, red);
      if (assigned == e.col && std::abs(red) > eps) return describe("matched pair not tight", r, e.col, red);
    }
    if (!forbidden(r, kMiss) && -ur < -eps) return describe("negative miss reduced cost", r, kMiss, -ur);
    if (assigned == kMiss && std::abs(ur) > eps) return describe("missing row with nonzero reduction", r, kMiss, ur);
  }
  for (Index c = 0; c < matrix.cols(); ++c) {
    if (excluded(c)) continue;
    const double vc = duals.v[static_cast<std::size_t>(c)];
    if (-vc < -eps) return describe("positive column reduction", -1, c, vc);
    if (m.col_to[static_cast<std::size_t>(c)] == kMiss && std::abs(vc) > eps) {
      return describe("missing column with nonzero reduction", -1, c, vc);
    }
  }
  return std::nullopt;
}

std::optional<Solution> SspSolver::solve(const SolveRequest& req) {
  const SparseCostMatrix& C = search_.matrix();
  const Index M = C.rows();
  const Index N = C.cols();
  Solution sol;
  sol.matching = Matching(M, N);
  sol.duals = DualState(M, N);
  Matching& m = sol.matching;

  std::vector<ForbiddenPair> forbidden(req.forbidden.begin(), req.forbidden.end());
  std::sort(forbidden.begin(), forbidden.end());

  double total = 0.0;
  std::vector<char> mask(static_cast<std::size_t>(M), 0);
  for (auto [r, c] : req.fixed) {
    if (r < 0 || r >= M || (c != kMiss && (c < 0 || c >= N))) {
      throw InvalidInput("fixed assignment out of range");
    }
    if (m.row_to[static_cast<std::size_t>(r)] != kUnassigned) {
      throw InvalidInput("row " + std::to_string(r) + " fixed twice");
    }
    if (std::binary_search(forbidden.begin(), forbidden.end(), ForbiddenPair{r, c})) {
      throw InvalidInput("row " + std::to_string(r) + " fixed to a forbidden assignment");
    }
    if (c != kMiss) {
      if (m.col_to[static_cast<std::size_t>(c)] != kMiss) {
        throw InvalidInput("column " + std::to_string(c) + " fixed to two rows");
      }
      auto cost = C.at(r, c);
      if (!cost) {
        throw InvalidInput("fixed pair (" + std::to_string(r) + ", " + std::to_string(c) + ") is gated out");
      }
      total += *cost;
      m.col_to[static_cast<std::size_t>(c)] = r;
    }
    m.row_to[static_cast<std::size_t>(r)] = c;
  }
  for (Index r : req.rows) {
    if (r < 0 || r >= M) throw InvalidInput("row out of range");
    if (m.row_to[static_cast<std::size_t>(r)] != kUnassigned || mask[static_cast<std::size_t>(r)] != 0) {
      throw InvalidInput("row " + std::to_string(r) + " listed twice or also fixed");
    }
    mask[static_cast<std::size_t>(r)] = 1;
  }

  // Suffix lower bounds: no row can lower the total by more than its most
  // negative entry.
  std::vector<double> suffix(req.rows.size() + 1, 0.0);
  if (std::isfinite(req.bound)) {
    for (std::size_t k = req.rows.size(); k-- > 0;) {
      double best = 0.0;
      for (const auto& e : C.row(req.rows[k])) best = std::min(best, e.cost);
      suffix[k] = suffix[k + 1] + best;
    }
  }

  SearchConstraints constraints{mask, forbidden};
  std::vector<Index> targets{kMiss};
  for (std::size_t k = 0; k < req.rows.size(); ++k) {
    const Index r = req.rows[k];
    if (total + suffix[k] > req.bound) return std::nullopt;
    if (req.kind == SearchKind::dense) {
      targets.clear();
      for (Index c = 0; c < N; ++c) {
        if (m.col_to[static_cast<std::size_t>(c)] == kMiss) targets.push_back(c);
      }
    }
    const PathResult& path = search_.run(req.kind, sol.duals, m, r, targets, req.bound - total - suffix[k + 1], constraints);
    if (path.status == PathStatus::pruned) return std::nullopt;
    if (path.status == PathStatus::infeasible) {
      throw Infeasible("row " + std::to_string(r) + " cannot be inserted under the given constraints");
    }
    total += path.distance + sol.duals.u[static_cast<std::size_t>(r)];
    augment(m, path);
    update_duals(C, sol.duals, path, m);
  }

  sol.assoc.row_to.assign(static_cast<std::size_t>(M), kMiss);
  double cost = 0.0;
  for (Index r = 0; r < M; ++r) {
    Index c = m.row_to[static_cast<std::size_t>(r)];
    if (c >= 0) {
      sol.assoc.row_to[static_cast<std::size_t>(r)] = c;
      cost += *C.at(r, c);
    }
  }
  sol.assoc.cost = cost;
  return sol;
}

std::optional<Solution> solve_optimal(const SparseCostMatrix& matrix, const SolveRequest& request) {
  SspSolver solver(matrix);
  return solver.solve(request);
}

std::vector<Index> all_rows(Index rows) {
  std::vector<Index> out(static_cast<std::size_t>(rows));
  std::iota(out.begin(), out.end(), Index{0});
  return out;
}

}  // namespace fastassoc
