#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "fastassoc/kbest.hpp"
#include "fastassoc/types.hpp"

namespace fastassoc {

struct FusionParams {
  Index objects = 100;
  double p_detect = 0.995;
  double sigma = 0.001;
  /// False positives per sensor per scene, uniform over the unit square.
  double fp_rate = 0.25;
  /// Squared Mahalanobis gate.
  double gate = 25.0;
  /// Object density per unit volume used in the likelihood ratios.
  double density() const { return static_cast<double>(objects); }
};

/// One 2D detection; `object` is the generating object or -1 for a false
/// positive. The tracker never reads `object`.
struct Measurement {
  double a = 0.0;
  double b = 0.0;
  Index object = -1;
};

/// Sensor s sees the coordinate pair kSensorDims[s] of each object.
inline constexpr std::array<std::array<int, 2>, 3> kSensorDims{{{0, 1}, {0, 2}, {1, 2}}};

struct Scene {
  std::vector<std::array<double, 3>> objects;
  std::array<std::vector<Measurement>, 3> frames;
};

std::array<double, 2> project(const std::array<double, 3>& point, int sensor);

Scene simulate_scene(std::uint64_t seed, const FusionParams& params = {});

/// Rows are sensor-1 measurements, columns sensor-2 measurements, matched on
/// the shared first coordinate.
SparseCostMatrix stage1_costs(const std::vector<Measurement>& frame1, const std::vector<Measurement>& frame2,
                              const FusionParams& params = {});

/// A stage-2 row: a sensor-1/sensor-2 pair or a singleton (other index -1).
struct Candidate {
  Index m1 = -1;
  Index m2 = -1;
  friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

struct Stage2Problem {
  std::vector<Candidate> candidates;
  /// Prior existence of each candidate before sensor 3.
  std::vector<double> existence;
  SparseCostMatrix costs;
  HypothesisSet hypotheses;
};

/// Existence probability of a sensor-1 or sensor-2 singleton.
double singleton_existence(const FusionParams& params = {});

/// Builds the second-stage problem: rows are every pair and singleton in
/// the stage-1 hypotheses, columns sensor-3 measurements.
Stage2Problem build_stage2(const Scene& scene, const OutputSet& stage1, const FusionParams& params = {});

OutputSet stage2_update(const Stage2Problem& problem, std::size_t k, KBestConfig config = KBestConfig::v4());

struct TrackCandidate {
  /// Measurement index per sensor, -1 when absent.
  std::array<Index, 3> meas{-1, -1, -1};
  std::array<double, 3> position{};
  double existence = 0.0;
};

/// Marginal existence of every track in the best output hypothesis; returns
/// those above 0.5.
std::vector<TrackCandidate> existence_and_report(const Scene& scene, const Stage2Problem& problem,
                                                 const OutputSet& final_set, const FusionParams& params = {});

struct FusionScore {
  double fnr = 0.0;
  double fpr = 0.0;
};
FusionScore score_run(const std::vector<TrackCandidate>& reported, const Scene& scene);

struct FusionRun {
  std::vector<TrackCandidate> reported;
  FusionScore score;
  double ms = 0.0;
  std::size_t stage2_rows = 0;
};
/// Both stages with K hypotheses on one scene.
FusionRun run_fusion(const Scene& scene, std::size_t k, const FusionParams& params = {});

struct FusionRow {
  std::size_t k = 0;
  double mean_fnr = 0.0;
  double mean_fpr = 0.0;
  double se_fnr = 0.0;
  double se_fpr = 0.0;
  double mean_ms = 0.0;
};
/// Scenes are seeded per trial and shared across the K list.
std::vector<FusionRow> run_fusion_sweep(const std::vector<std::size_t>& k_list, std::size_t trials,
                                        std::uint64_t seed, unsigned threads = 1, const FusionParams& params = {});

}  // namespace fastassoc
