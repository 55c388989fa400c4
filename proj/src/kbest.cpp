#include "fastassoc/kbest.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fastassoc/cost.hpp"

namespace fastassoc {

KBestConfig KBestConfig::parse(std::string_view name) {
  if (name == "v1") return v1();
  if (name == "v2") return v2();
  if (name == "v3") return v3();
  if (name == "v4") return v4();
  throw InvalidInput("unknown configuration '" + std::string(name) + "' (expected v1..v4)");
}

std::vector<double> OutputSet::costs() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.total_cost);
  return out;
}

namespace {

std::vector<char> active_mask(const ProblemNode& node) {
  std::vector<char> mask(node.row_to.size(), 0);
  for (std::size_t r = 0; r < node.row_to.size(); ++r) {
    mask[r] = node.row_to[r] != kUnassigned && node.fixed[r] == 0;
  }
  return mask;
}

double lookahead_impl(const SparseCostMatrix& C, const DualState& duals, const Matching& m, std::span<const char> mask,
                      std::span<const ForbiddenPair> forbidden, Index r, double cost) {
  auto lo = std::lower_bound(forbidden.begin(), forbidden.end(), r,
                             [](const ForbiddenPair& p, Index row) { return p.row < row; });
  auto hi = lo;
  while (hi != forbidden.end() && hi->row == r) ++hi;
  auto is_forbidden = [&](Index c) {
    for (auto it = lo; it != hi; ++it) {
      if (it->col == c) return true;
    }
    return false;
  };
  const Index current = m.row_to[static_cast<std::size_t>(r)];
  const double ur = duals.u[static_cast<std::size_t>(r)];
  double best = kInfinity;
  for (const auto& e : C.row(r)) {
    if (e.col == current || is_forbidden(e.col)) continue;
    Index owner = m.col_to[static_cast<std::size_t>(e.col)];
    if (owner >= 0 && owner != r && mask[static_cast<std::size_t>(owner)] == 0) continue;
    best = std::min(best, e.cost - ur - duals.v[static_cast<std::size_t>(e.col)]);
  }
  if (current != kMiss && !is_forbidden(kMiss)) best = std::min(best, -ur);
  return cost + best;
}

std::vector<Index> order_rows(const SparseCostMatrix& C, const DualState& duals, const Matching& m,
                              std::span<const char> mask, std::span<const ForbiddenPair> forbidden, double cost,
                              bool lookahead) {
  std::vector<Index> rows;
  for (Index r = 0; r < C.rows(); ++r) {
    if (mask[static_cast<std::size_t>(r)] != 0) rows.push_back(r);
  }
  if (lookahead) {
    std::vector<std::pair<double, Index>> keyed;
    keyed.reserve(rows.size());
    for (Index r : rows) keyed.emplace_back(lookahead_impl(C, duals, m, mask, forbidden, r, cost), r);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = keyed[k].second;
  }
  return rows;
}

std::vector<ForbiddenPair> child_forbidden(std::span<const ForbiddenPair> parent, std::span<const char> mask,
                                           ForbiddenPair extra) {
  std::vector<ForbiddenPair> out;
  out.reserve(parent.size() + 1);
  for (const auto& p : parent) {
    if (mask[static_cast<std::size_t>(p.row)] != 0) out.push_back(p);
  }
  out.insert(std::upper_bound(out.begin(), out.end(), extra), extra);
  return out;
}

}  // namespace

double lookahead_bound(const ProblemNode& node, const SparseCostMatrix& matrix, Index partition_row) {
  Matching m = Matching::from_rows(matrix.cols(), node.row_to);
  auto mask = active_mask(node);
  return lookahead_impl(matrix, node.duals, m, mask, node.forbidden, partition_row, node.cost);
}

std::vector<Index> partition_order(const ProblemNode& node, const SparseCostMatrix& matrix, bool lookahead) {
  Matching m = Matching::from_rows(matrix.cols(), node.row_to);
  auto mask = active_mask(node);
  return order_rows(matrix, node.duals, m, mask, node.forbidden, node.cost, lookahead);
}

std::vector<ProblemNode> partition(const ProblemNode& node, const SparseCostMatrix& matrix, bool lookahead) {
  if (!node.solved) throw InvalidInput("only solved nodes can be partitioned");
  Matching m = Matching::from_rows(matrix.cols(), node.row_to);
  auto mask = active_mask(node);
  auto order = order_rows(matrix, node.duals, m, mask, node.forbidden, node.cost, lookahead);
  std::vector<ProblemNode> children;
  children.reserve(order.size());
  for (Index t : order) {
    ProblemNode child;
    child.row_to = node.row_to;
    child.duals = node.duals;
    child.hypothesis = node.hypothesis;
    child.cost = node.cost;
    child.pending_row = t;
    child.fixed.resize(node.row_to.size());
    for (std::size_t r = 0; r < node.row_to.size(); ++r) {
      child.fixed[r] = node.row_to[r] != kUnassigned && mask[r] == 0;
    }
    child.forbidden = child_forbidden(node.forbidden, mask, {t, node.row_to[static_cast<std::size_t>(t)]});
    child.lower_bound = lookahead_impl(matrix, node.duals, m, mask, child.forbidden, t, node.cost);
    children.push_back(std::move(child));
    mask[static_cast<std::size_t>(t)] = 0;
  }
  return children;
}

PathStatus solve_node(ProblemNode& node, const SparseCostMatrix& matrix, SearchKind kind, double bound) {
  if (node.solved || node.pending_row < 0) throw InvalidInput("node has no pending row");
  const Index t = node.pending_row;
  Matching m = Matching::from_rows(matrix.cols(), node.row_to);
  const Index old = m.row_to[static_cast<std::size_t>(t)];
  m.row_to[static_cast<std::size_t>(t)] = kUnassigned;
  if (old >= 0) m.col_to[static_cast<std::size_t>(old)] = kMiss;
  auto mask = active_mask(node);
  mask[static_cast<std::size_t>(t)] = 1;

  PathSearch search(matrix);
  Index targets[1] = {old};
  const PathResult& path = search.run(kind, node.duals, m, t, targets, bound - node.cost, {mask, node.forbidden});
  if (path.status != PathStatus::found) return path.status;
  augment(m, path);
  update_duals(matrix, node.duals, path, m);
  node.row_to = std::move(m.row_to);
  node.cost += path.distance;
  node.pending_row = -1;
  node.solved = true;
  return PathStatus::found;
}

bool node_admits(const ProblemNode& node, std::span<const Index> row_to) {
  if (row_to.size() != node.row_to.size()) return false;
  for (std::size_t r = 0; r < row_to.size(); ++r) {
    if (node.fixed[r] != 0 && row_to[r] != node.row_to[r]) return false;
  }
  for (const auto& p : node.forbidden) {
    if (row_to[static_cast<std::size_t>(p.row)] == p.col) return false;
  }
  return true;
}

KBestSolver::KBestSolver(const SparseCostMatrix& matrix, KBestConfig config)
    : matrix_(&matrix), config_(config), ssp_(matrix) {}

std::uint32_t KBestSolver::allocate() {
  std::uint32_t id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<std::uint32_t>(pool_.size());
    pool_.emplace_back();
  }
  stats_.peak_live_nodes = std::max(stats_.peak_live_nodes, pool_.size() - free_.size());
  return id;
}

void KBestSolver::release(std::uint32_t id) {
  free_.push_back(id);
}

double KBestSolver::worst_bound(std::size_t capacity) const {
  if (queue_.size() < capacity) return kInfinity;
  return queue_.max().cost;
}

bool KBestSolver::offer(std::uint32_t id, std::size_t capacity) {
  const double cost = pool_[id].cost;
  if (queue_.size() >= capacity) {
    if (capacity == 0 || cost >= queue_.max().cost) {
      release(id);
      return false;
    }
    release(queue_.pop_max().node);
  }
  queue_.push({cost, seq_++, id});
  stats_.peak_queue = std::max(stats_.peak_queue, queue_.size());
  return true;
}

void KBestSolver::verify(const ProblemNode& node) {
  if (!config_.check_duals) return;
  ++stats_.dual_checks;
  Matching m = Matching::from_rows(matrix_->cols(), node.row_to);
  auto mask = active_mask(node);
  if (auto err = check_duals(*matrix_, node.duals, m, {mask, node.forbidden})) {
    throw std::logic_error("dual invariant violated: " + *err);
  }
}

void KBestSolver::expand(std::uint32_t parent_id, std::size_t capacity) {
  const SparseCostMatrix& C = *matrix_;
  // Copy out what the loop needs: pool_ may reallocate while children are
  // allocated.
  const std::vector<Index> parent_rows = pool_[parent_id].row_to;
  const std::vector<char> parent_fixed = pool_[parent_id].fixed;
  const std::vector<ForbiddenPair> parent_forbidden = pool_[parent_id].forbidden;
  const DualState parent_duals = pool_[parent_id].duals;
  const double parent_cost = pool_[parent_id].cost;
  const std::size_t hypothesis = pool_[parent_id].hypothesis;

  scratch_ = Matching::from_rows(C.cols(), parent_rows);
  mask_.assign(parent_rows.size(), 0);
  for (std::size_t r = 0; r < parent_rows.size(); ++r) {
    mask_[r] = parent_rows[r] != kUnassigned && parent_fixed[r] == 0;
  }
  const auto order = order_rows(C, parent_duals, scratch_, mask_, parent_forbidden, parent_cost, config_.lookahead);

  for (Index t : order) {
    const Index old = parent_rows[static_cast<std::size_t>(t)];
    scratch_.row_to[static_cast<std::size_t>(t)] = kUnassigned;
    if (old >= 0) scratch_.col_to[static_cast<std::size_t>(old)] = kMiss;

    const double bound = config_.early_stop ? worst_bound(capacity) - parent_cost : kInfinity;
    Index targets[1] = {old};
    const PathResult& path = ssp_.search().run(config_.search_kind(), parent_duals, scratch_, t, targets, bound,
                                               {mask_, parent_forbidden, {t, old}});
    if (path.status == PathStatus::found) {
      ++stats_.nodes_solved;
      const double cost = parent_cost + path.distance;
      if (queue_.size() < capacity || cost < queue_.max().cost) {
        if (queue_.size() >= capacity) release(queue_.pop_max().node);
        std::uint32_t id = allocate();
        ProblemNode& child = pool_[id];
        Matching m = scratch_;
        augment(m, path);
        child.duals = parent_duals;
        update_duals(C, child.duals, path, m);
        child.row_to = std::move(m.row_to);
        child.fixed.resize(parent_rows.size());
        for (std::size_t r = 0; r < parent_rows.size(); ++r) {
          child.fixed[r] = parent_rows[r] != kUnassigned && mask_[r] == 0;
        }
        child.forbidden = child_forbidden(parent_forbidden, mask_, {t, old});
        child.cost = cost;
        child.lower_bound = cost;
        child.hypothesis = hypothesis;
        child.pending_row = -1;
        child.solved = true;
        verify(child);
        offer(id, capacity);
      }
    } else if (path.status == PathStatus::pruned) {
      ++stats_.nodes_pruned;
    } else {
      ++stats_.nodes_infeasible;
    }

    scratch_.row_to[static_cast<std::size_t>(t)] = old;
    if (old >= 0) scratch_.col_to[static_cast<std::size_t>(old)] = t;
    mask_[static_cast<std::size_t>(t)] = 0;
  }
}

OutputEntry KBestSolver::emit(const ProblemNode& node, const HypothesisSet& hypotheses) const {
  OutputEntry e;
  e.parent = node.hypothesis;
  e.total_cost = node.cost;
  e.assoc.row_to.resize(node.row_to.size());
  for (std::size_t r = 0; r < node.row_to.size(); ++r) {
    e.assoc.row_to[r] = node.row_to[r] == kUnassigned ? kMiss : node.row_to[r];
  }
  e.assoc.cost = association_nll(*matrix_, e.assoc.row_to);
  e.assoc.parent_hypothesis = node.hypothesis;
  (void)hypotheses;
  return e;
}

OutputSet KBestSolver::solve(std::size_t k) {
  HypothesisSet single;
  single.num_objects = matrix_->rows();
  single.add(all_rows(matrix_->rows()), 0.0);
  return solve(single, k);
}

OutputSet KBestSolver::solve(const HypothesisSet& hypotheses, std::size_t k) {
  if (k == 0) throw InvalidInput("K must be at least 1");
  hypotheses.validate();
  if (hypotheses.num_objects > matrix_->rows()) {
    throw InvalidInput("hypotheses reference more objects than the matrix has rows");
  }
  stats_ = {};
  queue_.clear();
  queue_.reserve(k + 1);
  pool_.clear();
  free_.clear();
  seq_ = 0;

  const SearchKind kind = config_.search_kind();
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    const double prior = hypotheses.priors[h];
    SolveRequest req;
    req.rows = hypotheses.members[h];
    req.kind = kind;
    req.bound = config_.early_stop ? worst_bound(k) - prior : kInfinity;
    auto sol = ssp_.solve(req);
    if (!sol) {
      ++stats_.nodes_pruned;
      continue;
    }
    ++stats_.nodes_solved;
    const double cost = prior + sol->assoc.cost;
    if (queue_.size() >= k && cost >= queue_.max().cost) continue;
    if (queue_.size() >= k) release(queue_.pop_max().node);
    std::uint32_t id = allocate();
    ProblemNode& node = pool_[id];
    node.row_to = std::move(sol->matching.row_to);
    node.duals = std::move(sol->duals);
    node.fixed.assign(node.row_to.size(), 0);
    node.forbidden.clear();
    node.cost = cost;
    node.lower_bound = cost;
    node.hypothesis = h;
    node.pending_row = -1;
    node.solved = true;
    verify(node);
    offer(id, k);
  }

  OutputSet out;
  out.entries.reserve(k);
  while (out.size() < k && !queue_.empty()) {
    std::uint32_t id = queue_.pop_min().node;
    out.entries.push_back(emit(pool_[id], hypotheses));
    const std::size_t capacity = k - out.size();
    if (capacity > 0) {
      while (queue_.size() > capacity) release(queue_.pop_max().node);
      expand(id, capacity);
    }
    release(id);
  }
  return out;
}

OutputSet kbest_single(const SparseCostMatrix& matrix, std::size_t k, KBestConfig config) {
  KBestSolver solver(matrix, config);
  return solver.solve(k);
}

OutputSet kbest_mimo(const SparseCostMatrix& matrix, const HypothesisSet& hypotheses, std::size_t k,
                     KBestConfig config) {
  KBestSolver solver(matrix, config);
  return solver.solve(hypotheses, k);
}

}  // namespace fastassoc
