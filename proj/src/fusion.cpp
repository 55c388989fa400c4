#include "fastassoc/fusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "fastassoc/bench.hpp"
#include "fastassoc/gibbs.hpp"

namespace fastassoc {

namespace {

// Density of N(0, 2 sigma^2) at delta: the difference of two noisy
// observations of the same coordinate.
double diff_density(double delta, double sigma) {
  const double var = 2.0 * sigma * sigma;
  return std::exp(-0.5 * delta * delta / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double sq_mahalanobis(double delta, double sigma) { return delta * delta / (2.0 * sigma * sigma); }

// Density of unpaired sensor-1 (or sensor-2) measurements: objects missed by
// the other sensor plus false positives.
double stage1_clutter(const FusionParams& p) {
  return p.density() * p.p_detect * (1.0 - p.p_detect) + p.fp_rate;
}

// Density of sensor-3 measurements explained by no candidate.
double stage2_clutter(const FusionParams& p) {
  return p.density() * (1.0 - p.p_detect) * (1.0 - p.p_detect) * p.p_detect + p.fp_rate;
}

}  // namespace

std::array<double, 2> project(const std::array<double, 3>& point, int sensor) {
  const auto& d = kSensorDims.at(static_cast<std::size_t>(sensor));
  return {point[static_cast<std::size_t>(d[0])], point[static_cast<std::size_t>(d[1])]};
}

Scene simulate_scene(std::uint64_t seed, const FusionParams& params) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, params.sigma);
  std::bernoulli_distribution detect(params.p_detect);
  std::poisson_distribution<int> false_count(params.fp_rate);

  Scene scene;
  scene.objects.resize(static_cast<std::size_t>(params.objects));
  for (auto& o : scene.objects) o = {unit(rng), unit(rng), unit(rng)};
  for (int s = 0; s < 3; ++s) {
    auto& frame = scene.frames[static_cast<std::size_t>(s)];
    for (Index i = 0; i < params.objects; ++i) {
      if (!detect(rng)) continue;
      auto z = project(scene.objects[static_cast<std::size_t>(i)], s);
      frame.push_back({z[0] + noise(rng), z[1] + noise(rng), i});
    }
    const int fp = false_count(rng);
    for (int k = 0; k < fp; ++k) frame.push_back({unit(rng), unit(rng), -1});
    std::shuffle(frame.begin(), frame.end(), rng);
  }
  return scene;
}

SparseCostMatrix stage1_costs(const std::vector<Measurement>& frame1, const std::vector<Measurement>& frame2,
                              const FusionParams& p) {
  const double miss = std::log(stage1_clutter(p));
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < frame1.size(); ++i) {
    for (std::size_t j = 0; j < frame2.size(); ++j) {
      const double delta = frame1[i].a - frame2[j].a;
      if (sq_mahalanobis(delta, p.sigma) > p.gate) continue;
      const double like = p.density() * p.p_detect * p.p_detect * diff_density(delta, p.sigma);
      t.push_back({static_cast<Index>(i), static_cast<Index>(j), -std::log(like) + 2.0 * miss});
    }
  }
  return SparseCostMatrix::from_triplets(static_cast<Index>(frame1.size()), static_cast<Index>(frame2.size()),
                                         std::move(t));
}

double singleton_existence(const FusionParams& p) {
  const double real = p.density() * p.p_detect * (1.0 - p.p_detect);
  return real / stage1_clutter(p);
}

Stage2Problem build_stage2(const Scene& scene, const OutputSet& stage1, const FusionParams& p) {
  const auto& f1 = scene.frames[0];
  const auto& f2 = scene.frames[1];
  const auto& f3 = scene.frames[2];

  std::vector<std::vector<Candidate>> per_hyp;
  std::vector<Candidate> all;
  for (const auto& e : stage1.entries) {
    std::vector<Candidate> cands;
    std::vector<char> used(f2.size(), 0);
    for (std::size_t i = 0; i < f1.size(); ++i) {
      Index j = e.assoc.row_to[i];
      cands.push_back({static_cast<Index>(i), j});
      if (j >= 0) used[static_cast<std::size_t>(j)] = 1;
    }
    for (std::size_t j = 0; j < f2.size(); ++j) {
      if (!used[j]) cands.push_back({-1, static_cast<Index>(j)});
    }
    all.insert(all.end(), cands.begin(), cands.end());
    per_hyp.push_back(std::move(cands));
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  Stage2Problem out;
  out.candidates = all;
  const double r_single = singleton_existence(p);
  for (const auto& c : all) out.existence.push_back(c.m1 >= 0 && c.m2 >= 0 ? 1.0 : r_single);

  const double clutter = std::log(stage2_clutter(p));
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < all.size(); ++r) {
    const Candidate& c = all[r];
    const double ex = out.existence[r];
    for (std::size_t k = 0; k < f3.size(); ++k) {
      double m2 = 0.0;
      double f = 1.0;
      if (c.m1 >= 0) {
        double dy = f1[static_cast<std::size_t>(c.m1)].b - f3[k].a;
        m2 += sq_mahalanobis(dy, p.sigma);
        f *= diff_density(dy, p.sigma);
      }
      if (c.m2 >= 0) {
        double dz = f2[static_cast<std::size_t>(c.m2)].b - f3[k].b;
        m2 += sq_mahalanobis(dz, p.sigma);
        f *= diff_density(dz, p.sigma);
      }
      if (m2 > p.gate) continue;
      double cost = -std::log(ex * p.p_detect * f) + std::log(1.0 - ex * p.p_detect) + clutter;
      t.push_back({static_cast<Index>(r), static_cast<Index>(k), cost});
    }
  }
  out.costs = SparseCostMatrix::from_triplets(static_cast<Index>(all.size()), static_cast<Index>(f3.size()),
                                              std::move(t));

  // Stage-2 costs are relative to every candidate going undetected; that
  // baseline differs between hypotheses, so it goes into the prior.
  out.hypotheses.num_objects = static_cast<Index>(all.size());
  for (std::size_t h = 0; h < per_hyp.size(); ++h) {
    std::vector<Index> members;
    double prior = stage1.entries[h].total_cost;
    for (const auto& c : per_hyp[h]) {
      auto idx = static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), c) - all.begin());
      members.push_back(static_cast<Index>(idx));
      prior -= std::log(1.0 - out.existence[idx] * p.p_detect);
    }
    std::sort(members.begin(), members.end());
    out.hypotheses.add(std::move(members), prior);
  }
  return out;
}

OutputSet stage2_update(const Stage2Problem& problem, std::size_t k, KBestConfig config) {
  return kbest_mimo(problem.costs, problem.hypotheses, k, config);
}

std::vector<TrackCandidate> existence_and_report(const Scene& scene, const Stage2Problem& problem,
                                                 const OutputSet& final_set, const FusionParams& p) {
  if (final_set.empty()) return {};
  const double best = final_set.entries.front().total_cost;
  double norm = 0.0;
  for (const auto& e : final_set.entries) norm += std::exp(-(e.total_cost - best));

  auto tracks_of = [&](const OutputEntry& e, auto&& visit) {
    for (Index r : problem.hypotheses.members[e.parent]) {
      const Candidate& c = problem.candidates[static_cast<std::size_t>(r)];
      Index m3 = e.assoc.row_to[static_cast<std::size_t>(r)];
      const double r0 = problem.existence[static_cast<std::size_t>(r)];
      // undetected by sensor 3: posterior of existing given no detection
      double ex = m3 >= 0 ? 1.0 : r0 * (1.0 - p.p_detect) / (1.0 - r0 * p.p_detect);
      visit(std::array<Index, 3>{c.m1, c.m2, m3}, ex);
    }
    // Sensor-3 measurements left over have existence far below 0.5 and are
    // never reported.
  };

  std::map<std::array<Index, 3>, double> marginal;
  for (const auto& e : final_set.entries) {
    const double w = std::exp(-(e.total_cost - best)) / norm;
    tracks_of(e, [&](const std::array<Index, 3>& key, double ex) { marginal[key] += w * ex; });
  }

  std::vector<TrackCandidate> out;
  tracks_of(final_set.entries.front(), [&](const std::array<Index, 3>& key, double) {
    double ex = std::min(1.0, marginal[key]);
    if (ex <= 0.5) return;
    TrackCandidate t;
    t.meas = key;
    t.existence = ex;
    std::array<double, 3> sum{};
    std::array<int, 3> n{};
    for (int s = 0; s < 3; ++s) {
      if (key[static_cast<std::size_t>(s)] < 0) continue;
      const auto& z = scene.frames[static_cast<std::size_t>(s)][static_cast<std::size_t>(key[static_cast<std::size_t>(s)])];
      const auto& d = kSensorDims[static_cast<std::size_t>(s)];
      sum[static_cast<std::size_t>(d[0])] += z.a;
      sum[static_cast<std::size_t>(d[1])] += z.b;
      ++n[static_cast<std::size_t>(d[0])];
      ++n[static_cast<std::size_t>(d[1])];
    }
    for (std::size_t d = 0; d < 3; ++d) t.position[d] = n[d] > 0 ? sum[d] / n[d] : 0.5;
    out.push_back(t);
  });
  return out;
}

FusionScore score_run(const std::vector<TrackCandidate>& reported, const Scene& scene) {
  std::map<std::array<Index, 3>, bool> truth;  // measurement set -> recovered
  std::vector<std::array<Index, 3>> sets(scene.objects.size(), {-1, -1, -1});
  for (std::size_t s = 0; s < 3; ++s) {
    const auto& frame = scene.frames[s];
    for (std::size_t k = 0; k < frame.size(); ++k) {
      if (frame[k].object >= 0) sets[static_cast<std::size_t>(frame[k].object)][s] = static_cast<Index>(k);
    }
  }
  for (const auto& m : sets) {
    if (m[0] < 0 && m[1] < 0 && m[2] < 0) continue;  // never observed
    truth[m] = false;
  }
  std::size_t wrong = 0;
  for (const auto& t : reported) {
    auto it = truth.find(t.meas);
    if (it == truth.end()) {
      ++wrong;
    } else {
      it->second = true;
    }
  }
  FusionScore score;
  std::size_t missed = 0;
  for (const auto& [m, found] : truth) missed += found ? 0 : 1;
  score.fnr = truth.empty() ? 0.0 : static_cast<double>(missed) / static_cast<double>(truth.size());
  score.fpr = reported.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(reported.size());
  return score;
}

FusionRun run_fusion(const Scene& scene, std::size_t k, const FusionParams& params) {
  FusionRun run;
  auto t0 = std::chrono::steady_clock::now();
  auto c1 = stage1_costs(scene.frames[0], scene.frames[1], params);
  auto out1 = kbest_single(c1, k, KBestConfig::v4());
  auto problem = build_stage2(scene, out1, params);
  auto out2 = stage2_update(problem, k);
  run.reported = existence_and_report(scene, problem, out2, params);
  run.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  run.score = score_run(run.reported, scene);
  run.stage2_rows = problem.candidates.size();
  return run;
}

std::vector<FusionRow> run_fusion_sweep(const std::vector<std::size_t>& k_list, std::size_t trials,
                                        std::uint64_t seed, unsigned threads, const FusionParams& params) {
  if (k_list.empty() || trials == 0) throw InvalidInput("need at least one K and one trial");
  for (std::size_t k : k_list)
    if (k == 0) throw InvalidInput("K must be at least 1");
  std::vector<FusionRow> rows;
  for (std::size_t k : k_list) {
    std::vector<FusionRun> runs(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
      runs[t] = run_fusion(simulate_scene(split_seed(seed, t), params), k, params);
    });
    FusionRow row;
    row.k = k;
    const double n = static_cast<double>(trials);
    for (const auto& r : runs) {
      row.mean_fnr += r.score.fnr / n;
      row.mean_fpr += r.score.fpr / n;
      row.mean_ms += r.ms / n;
    }
    if (trials > 1) {
      double vf = 0.0;
      double vp = 0.0;
      for (const auto& r : runs) {
        vf += (r.score.fnr - row.mean_fnr) * (r.score.fnr - row.mean_fnr);
        vp += (r.score.fpr - row.mean_fpr) * (r.score.fpr - row.mean_fpr);
      }
      row.se_fnr = std::sqrt(vf / (n - 1.0) / n);
      row.se_fpr = std::sqrt(vp / (n - 1.0) / n);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fastassoc
