#pragma once

#include <cstdint>
#include <vector>

#include "fastassoc/kbest.hpp"
#include "fastassoc/types.hpp"

namespace fastassoc {

/// Brute-force ground truth for small instances.
struct EnumerationResult {
  std::vector<Association> associations;
  std::size_t count = 0;
};

inline constexpr std::uint64_t kEnumerationLimit = 10'000'000;

/// sum_k C(M,k) C(N,k) k!, the number of miss-enabled associations of a
/// dense M x N matrix. Saturates at UINT64_MAX.
std::uint64_t association_count(Index rows, Index cols);

/// Every valid association exactly once, in recursive row-wise order (each
/// row tries its allowed unused columns in increasing order, then the miss).
/// Throws TooLarge when the dense count bound exceeds kEnumerationLimit.
EnumerationResult enumerate_all(const SparseCostMatrix& matrix);

/// enumerate_all sorted by cost (stable), truncated to K.
OutputSet kbest_bruteforce(const SparseCostMatrix& matrix, std::size_t k);

}  // namespace fastassoc
