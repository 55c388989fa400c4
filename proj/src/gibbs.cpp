#include "fastassoc/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fastassoc/cost.hpp"

namespace fastassoc {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  return splitmix64(state);
}

SampleSummary gibbs_sample(const SparseCostMatrix& matrix, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidInput("n_samples must be at least 1");
  const Index M = matrix.rows();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Index> row_to(static_cast<std::size_t>(M), kMiss);
  std::vector<char> occupied(static_cast<std::size_t>(matrix.cols()), 0);
  std::vector<double> weights;
  std::vector<Index> choices;

  SampleSummary out;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (Index r = 0; r < M; ++r) {
      Index cur = row_to[static_cast<std::size_t>(r)];
      if (cur >= 0) occupied[static_cast<std::size_t>(cur)] = 0;
      weights.assign(1, 1.0);
      choices.assign(1, kMiss);
      double total = 1.0;
      for (const auto& e : matrix.row(r)) {
        if (occupied[static_cast<std::size_t>(e.col)]) continue;
        double w = std::exp(-e.cost);
        weights.push_back(w);
        choices.push_back(e.col);
        total += w;
      }
      double x = unit(rng) * total;
      std::size_t pick = 0;
      while (pick + 1 < weights.size() && x >= weights[pick]) {
        x -= weights[pick];
        ++pick;
      }
      Index next = choices[pick];
      row_to[static_cast<std::size_t>(r)] = next;
      if (next >= 0) occupied[static_cast<std::size_t>(next)] = 1;
    }
    ++out.visits[row_to];
  }
  out.total_samples = n_samples;

  std::vector<double> costs;
  costs.reserve(out.visits.size());
  for (const auto& [assoc, count] : out.visits) costs.push_back(association_nll(matrix, assoc));
  out.best_cost = *std::min_element(costs.begin(), costs.end());
  out.likelihood_ratio = likelihood_ratio(costs, out.best_cost);
  return out;
}

double likelihood_ratio(std::span<const double> costs, double ref) {
  double sum = 0.0;
  for (double c : costs) sum += std::exp(-(c - ref));
  return sum;
}

double likelihood_ratio(const OutputSet& set) {
  if (set.empty()) return 0.0;
  auto costs = set.costs();
  return likelihood_ratio(costs, costs.front());
}

}  // namespace fastassoc
