#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fastassoc/kbest.hpp"
#include "fastassoc/types.hpp"

namespace fastassoc {

/// SplitMix64 step. Used to derive independent per-trial seeds:
/// trial t of a run seeded with s uses split_seed(s, t).
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

struct SampleSummary {
  /// Unique sampled associations (row_to) with their visit counts.
  std::map<std::vector<Index>, std::size_t> visits;
  std::size_t total_samples = 0;
  /// Lowest NLL among the unique samples.
  double best_cost = 0.0;
  /// sum over unique samples of exp(-(NLL - best_cost)).
  double likelihood_ratio = 0.0;
};

/// Gibbs sampler over valid associations. Starts from all-miss and sweeps
/// the rows in index order; each row redraws among the miss (weight 1) and
/// its stored, currently unoccupied columns (weight exp(-C_ij)). One
/// association is recorded per sweep. Throws InvalidInput when
/// n_samples == 0.
SampleSummary gibbs_sample(const SparseCostMatrix& matrix, std::size_t n_samples, std::uint64_t seed);

/// sum_k exp(-(c_k - ref)) over the given costs.
double likelihood_ratio(std::span<const double> costs, double ref);

/// Ratio of an output set's total likelihood to that of its first entry.
double likelihood_ratio(const OutputSet& set);

}  // namespace fastassoc
