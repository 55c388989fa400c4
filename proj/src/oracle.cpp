#include "fastassoc/oracle.hpp"

#include <algorithm>
#include <limits>

namespace fastassoc {

std::uint64_t association_count(Index rows, Index cols) {
  // term_k = C(M,k) C(N,k) k! built incrementally:
  // term_{k+1} = term_k * (M-k)(N-k)/(k+1)
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  long double term = 1.0L;
  long double total = 1.0L;
  for (Index k = 0; k < std::min(rows, cols); ++k) {
    term = term * static_cast<long double>(rows - k) * static_cast<long double>(cols - k) / static_cast<long double>(k + 1);
    total += term;
    if (total >= static_cast<long double>(kMax)) return kMax;
  }
  return static_cast<std::uint64_t>(total + 0.5L);
}

EnumerationResult enumerate_all(const SparseCostMatrix& matrix) {
  if (association_count(matrix.rows(), matrix.cols()) > kEnumerationLimit) {
    throw TooLarge("instance too large to enumerate");
  }
  EnumerationResult out;
  const Index M = matrix.rows();
  std::vector<Index> row_to(static_cast<std::size_t>(M), kMiss);
  std::vector<bool> used(static_cast<std::size_t>(matrix.cols()), false);

  auto recurse = [&](auto&& self, Index row, double cost) -> void {
    if (row == M) {
      out.associations.push_back(Association{row_to, cost, std::nullopt});
      return;
    }
    for (const auto& e : matrix.row(row)) {
      if (used[static_cast<std::size_t>(e.col)]) continue;
      used[static_cast<std::size_t>(e.col)] = true;
      row_to[static_cast<std::size_t>(row)] = e.col;
      self(self, row + 1, cost + e.cost);
      used[static_cast<std::size_t>(e.col)] = false;
    }
    row_to[static_cast<std::size_t>(row)] = kMiss;
    self(self, row + 1, cost);
  };
  recurse(recurse, 0, 0.0);
  out.count = out.associations.size();
  return out;
}

OutputSet kbest_bruteforce(const SparseCostMatrix& matrix, std::size_t k) {
  if (k == 0) throw InvalidInput("K must be at least 1");
  auto all = enumerate_all(matrix);
  std::stable_sort(all.associations.begin(), all.associations.end(),
                   [](const Association& a, const Association& b) { return a.cost < b.cost; });
  OutputSet out;
  for (std::size_t i = 0; i < std::min(k, all.associations.size()); ++i) {
    Association a = std::move(all.associations[i]);
    a.parent_hypothesis = 0;
    out.entries.push_back(OutputEntry{std::move(a), 0, 0.0});
    out.entries.back().total_cost = out.entries.back().assoc.cost;
  }
  return out;
}

}  // namespace fastassoc
