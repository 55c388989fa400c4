#include "fastassoc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "fastassoc/gibbs.hpp"
#include "fastassoc/ssp.hpp"

namespace fastassoc {

SparseCostMatrix gen_random_dense(Index size, std::uint64_t seed) {
  if (size < 1) throw InvalidInput("size must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, -1.0);
  std::vector<double> values(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  for (double& v : values) v = dist(rng);
  return SparseCostMatrix::from_dense(size, size, values);
}

namespace {

// Entries of row i ordered by (cost, col).
std::vector<SparseCostMatrix::Entry> ranked(const SparseCostMatrix& m, Index i) {
  auto row = m.row(i);
  std::vector<SparseCostMatrix::Entry> out(row.begin(), row.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
  return out;
}

std::set<std::vector<Index>> solution_set(const OutputSet& s) {
  std::set<std::vector<Index>> out;
  for (const auto& e : s.entries) out.insert(e.assoc.row_to);
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SparseCostMatrix gate_matrix(const SparseCostMatrix& matrix, Index S) {
  if (S < 1) throw InvalidInput("gate must keep at least one pair per row");
  std::vector<std::vector<SparseCostMatrix::Entry>> rows(static_cast<std::size_t>(matrix.rows()));
  for (Index i = 0; i < matrix.rows(); ++i) {
    auto r = ranked(matrix, i);
    if (static_cast<Index>(r.size()) > S) r.resize(static_cast<std::size_t>(S));
    std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.col < b.col; });
    rows[static_cast<std::size_t>(i)] = std::move(r);
  }
  return SparseCostMatrix::from_rows(matrix.cols(), rows);
}

Index min_sufficient_gate(const SparseCostMatrix& matrix, std::size_t k) {
  auto dense = kbest_single(matrix, k, KBestConfig::v3());
  // Rank of each pair within its row; S must cover every pair used.
  Index s = 1;
  for (Index i = 0; i < matrix.rows(); ++i) {
    auto r = ranked(matrix, i);
    for (const auto& e : dense.entries) {
      Index c = e.assoc.row_to[static_cast<std::size_t>(i)];
      if (c < 0) continue;
      auto it = std::find_if(r.begin(), r.end(), [c](const auto& x) { return x.col == c; });
      s = std::max(s, static_cast<Index>(it - r.begin()) + 1);
    }
  }
  const auto want = solution_set(dense);
  for (; s < matrix.cols(); ++s) {
    if (solution_set(kbest_single(gate_matrix(matrix, s), k, KBestConfig::v4())) == want) return s;
  }
  return std::max<Index>(1, matrix.cols());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

TimingStats summarize(std::vector<double> ms) {
  TimingStats s;
  s.samples = ms.size();
  if (ms.empty()) return s;
  std::sort(ms.begin(), ms.end());
  s.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  const std::size_t n = ms.size();
  s.median_ms = n % 2 == 1 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  // nearest-rank percentile
  std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_ms = ms[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

void BenchConfig::validate() const {
  if (sizes.empty()) throw InvalidInput("at least one size is required");
  for (Index s : sizes)
    if (s < 1) throw InvalidInput("sizes must be at least 1");
  if (k < 1) throw InvalidInput("K must be at least 1");
  if (trials < 1) throw InvalidInput("trials must be at least 1");
  if (gate < 1) throw InvalidInput("gate must be at least 1");
  for (int v : versions)
    if (v < 1 || v > 4) throw InvalidInput("versions must be in 1..4");
}

std::uint64_t instance_seed(std::uint64_t seed, Index size, std::size_t trial) {
  return split_seed(seed, static_cast<std::uint64_t>(size) * 1000003ULL + trial);
}

KBestConfig version_config(int version) {
  switch (version) {
    case 1: return KBestConfig::v1();
    case 2: return KBestConfig::v2();
    case 3: return KBestConfig::v3();
    case 4: return KBestConfig::v4();
    default: throw InvalidInput("unknown version " + std::to_string(version));
  }
}

std::vector<DenseBenchRow> run_dense_bench(const BenchConfig& config) {
  config.validate();
  // warm caches and the allocator once per version
  for (int v : config.versions) {
    auto w = gen_random_dense(20, 0);
    kbest_single(v == 4 ? gate_matrix(w, config.gate) : w, 10, version_config(v));
  }
  std::vector<DenseBenchRow> rows;
  for (Index size : config.sizes) {
    std::vector<std::set<std::vector<Index>>> reference(config.trials);
    for (std::size_t vi = 0; vi < config.versions.size(); ++vi) {
      const int v = config.versions[vi];
      std::vector<double> ms(config.trials);
      std::vector<char> same(config.trials, 1);
      parallel_for(config.trials, config.threads, [&](std::size_t t) {
        auto m = gen_random_dense(size, instance_seed(config.seed, size, t));
        if (v == 4) m = gate_matrix(m, std::min(config.gate, size));
        auto t0 = std::chrono::steady_clock::now();
        auto out = kbest_single(m, config.k, version_config(v));
        ms[t] = elapsed_ms(t0);
        auto set = solution_set(out);
        if (vi == 0) {
          reference[t] = std::move(set);
        } else {
          same[t] = set == reference[t];
        }
      });
      DenseBenchRow row;
      row.size = size;
      row.version = v;
      row.time = summarize(ms);
      row.same_solutions = std::all_of(same.begin(), same.end(), [](char c) { return c != 0; });
      rows.push_back(row);
    }
  }
  return rows;
}

ChainedProblem make_chain(Index size, std::size_t k, std::uint64_t seed) {
  ChainedProblem p;
  p.stage1 = gen_random_dense(size, split_seed(seed, 1));
  p.stage1_out = kbest_single(p.stage1, k, KBestConfig::v3());
  std::set<std::pair<Index, Index>> pairs;
  for (const auto& e : p.stage1_out.entries) {
    for (Index r = 0; r < size; ++r) {
      Index c = e.assoc.row_to[static_cast<std::size_t>(r)];
      if (c >= 0) pairs.emplace(r, c);
    }
  }
  p.pairs.assign(pairs.begin(), pairs.end());
  const Index rows2 = static_cast<Index>(p.pairs.size());

  std::mt19937_64 rng(split_seed(seed, 2));
  std::uniform_real_distribution<double> dist(-2.0, -1.0);
  std::vector<double> values(static_cast<std::size_t>(rows2) * static_cast<std::size_t>(size));
  for (double& v : values) v = dist(rng);
  p.stage2 = SparseCostMatrix::from_dense(rows2, size, values);

  p.hypotheses.num_objects = rows2;
  for (const auto& e : p.stage1_out.entries) {
    std::vector<Index> members;
    for (Index r = 0; r < size; ++r) {
      Index c = e.assoc.row_to[static_cast<std::size_t>(r)];
      if (c < 0) continue;
      auto it = std::lower_bound(p.pairs.begin(), p.pairs.end(), std::pair<Index, Index>{r, c});
      members.push_back(static_cast<Index>(it - p.pairs.begin()));
    }
    std::sort(members.begin(), members.end());
    p.hypotheses.add(std::move(members), e.total_cost);
  }
  return p;
}

std::vector<MimoBenchRow> run_mimo_bench(const BenchConfig& config) {
  config.validate();
  std::vector<MimoBenchRow> rows;
  for (Index size : config.sizes) {
    std::vector<double> ms(config.trials);
    std::vector<std::size_t> rows2(config.trials);
    std::vector<std::size_t> live(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      auto chain = make_chain(size, config.k, instance_seed(config.seed, size, t));
      KBestSolver solver(chain.stage2, KBestConfig::v3());
      auto t0 = std::chrono::steady_clock::now();
      solver.solve(chain.hypotheses, config.k);
      ms[t] = elapsed_ms(t0);
      rows2[t] = chain.pairs.size();
      live[t] = solver.stats().peak_live_nodes;
    });
    MimoBenchRow row;
    row.size = size;
    row.stage2_rows = *std::max_element(rows2.begin(), rows2.end());
    row.time = summarize(ms);
    row.peak_live_nodes = *std::max_element(live.begin(), live.end());
    rows.push_back(row);
  }
  return rows;
}

std::vector<GibbsBenchRow> run_gibbs_bench(const BenchConfig& config) {
  config.validate();
  const Index size = config.sizes.front();
  std::vector<GibbsBenchRow> rows;
  auto run = [&](const std::string& method, std::size_t count) {
    std::vector<double> ms(config.trials);
    std::vector<double> ratio(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      auto m = gen_random_dense(size, instance_seed(config.seed, size, t));
      auto t0 = std::chrono::steady_clock::now();
      if (method == "deterministic") {
        auto out = kbest_single(m, count, KBestConfig::v3());
        ms[t] = elapsed_ms(t0);
        ratio[t] = likelihood_ratio(out);
      } else {
        auto s = gibbs_sample(m, count, split_seed(instance_seed(config.seed, size, t), count));
        ms[t] = elapsed_ms(t0);
        ratio[t] = s.likelihood_ratio;
      }
    });
    GibbsBenchRow row;
    row.method = method;
    row.count = count;
    row.mean_ratio = std::accumulate(ratio.begin(), ratio.end(), 0.0) / static_cast<double>(ratio.size());
    row.time = summarize(ms);
    rows.push_back(row);
  };
  for (std::size_t k : config.det_k) run("deterministic", k);
  for (std::size_t n : config.samples) run("gibbs", n);
  return rows;
}

std::vector<GateSweepRow> run_gate_sweep(const BenchConfig& config) {
  config.validate();
  std::vector<GateSweepRow> rows;
  for (Index size : config.sizes) {
    std::vector<GateSweepRow> part(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      auto m = gen_random_dense(size, instance_seed(config.seed, size, t));
      part[t] = {size, t, min_sufficient_gate(m, config.k)};
    });
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<DenseBenchRow>& rows) {
  out << "size,version,mean_ms,median_ms,p95_ms,trials,same_solutions\n";
  for (const auto& r : rows) {
    out << r.size << ",v" << r.version << ',' << r.time.mean_ms << ',' << r.time.median_ms << ',' << r.time.p95_ms
        << ',' << r.time.samples << ',' << (r.same_solutions ? 1 : 0) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<MimoBenchRow>& rows) {
  out << "size,stage2_rows,mean_ms,median_ms,p95_ms,trials,peak_live_nodes\n";
  for (const auto& r : rows) {
    out << r.size << ',' << r.stage2_rows << ',' << r.time.mean_ms << ',' << r.time.median_ms << ',' << r.time.p95_ms
        << ',' << r.time.samples << ',' << r.peak_live_nodes << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<GibbsBenchRow>& rows) {
  out << "method,count,mean_ratio,mean_ms,median_ms,p95_ms,trials\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.count << ',' << r.mean_ratio << ',' << r.time.mean_ms << ',' << r.time.median_ms << ','
        << r.time.p95_ms << ',' << r.time.samples << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<GateSweepRow>& rows) {
  out << "size,trial,s_star\n";
  for (const auto& r : rows) out << r.size << ',' << r.trial << ',' << r.s_star << '\n';
}

}  // namespace fastassoc
