/// @file detector.hpp
/// @brief Subsample and perturbation shift tests.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shiftscope/distances.hpp"
#include "shiftscope/embedding.hpp"
#include "shiftscope/rng.hpp"
#include "shiftscope/stats.hpp"
#include "shiftscope/topology.hpp"

namespace shiftscope {

enum class Metric { kEnergy, kLocalEnergy, kSwp };

const char* to_string(Metric m) noexcept;
/// "energy", "local-energy" or "swp"; anything else throws ConfigError.
Metric parse_metric(std::string_view name);

struct MetricConfig {
  Metric kind = Metric::kLocalEnergy;
  /// Neighborhood size of the local energy statistic.
  std::size_t k = 5;
  distances::LocalEnergyVariant variant = distances::LocalEnergyVariant::kCrossLocal;
  /// Persistence settings for swp. The seed is replaced per evaluation.
  RipsConfig rips{};
  std::size_t slices = 50;

  void validate() const;
};

/// Distance between two sets under `cfg`. `rng` only matters for swp, where
/// it seeds the H1 subsample of both clouds.
double evaluate_metric(const EmbeddingSet& x, const EmbeddingSet& y, const MetricConfig& cfg,
                       const RngSeed& rng);

struct DetectorConfig {
  MetricConfig metric{};
  std::size_t subsample_size = 1000;
  std::size_t samples_per_run = 15;
  std::size_t runs = 20;
  double alpha = 0.05;
  RngSeed seed{};
  /// Worker threads; 0 picks the hardware concurrency. Results do not
  /// depend on this value.
  std::size_t threads = 0;

  void validate() const;
};

enum class Aggregator { kMedian, kMean };

const char* to_string(Aggregator a) noexcept;

struct PerturbConfig {
  /// Ascending Gaussian noise sigmas.
  std::vector<double> grid = default_grid();
  /// Neighbor count of the kNN recall criterion.
  std::size_t criterion_k = 10;
  double threshold = 0.80;
  std::size_t samples_per_level = 3;
  Aggregator aggregator = Aggregator::kMedian;
  RngSeed seed{};
  /// Evaluate every grid level instead of stopping at the first failure.
  bool full_curve = false;
  std::size_t threads = 0;

  /// Ten log-spaced levels from 0.01 to 1.0.
  static std::vector<double> default_grid();
  void validate() const;
};

struct DistanceSamples {
  std::vector<double> d_xx;
  std::vector<double> d_xy;
};

struct RunResult {
  DistanceSamples samples;
  WelchResult test;
  Decision decision = Decision::kNo;
  /// Sum of metric evaluation times of this run.
  double elapsed_seconds = 0.0;
};

struct ShiftReport {
  Decision decision = Decision::kNo;
  FitScore fit;
  double p5_p = 0.0;
  double p95_p = 0.0;
  double d_xx_p5 = 0.0;
  double d_xx_p95 = 0.0;
  double d_xy_p5 = 0.0;
  double d_xy_p95 = 0.0;
  /// Wall time of the whole test.
  double elapsed_seconds = 0.0;
  double mean_run_seconds = 0.0;
  std::vector<RunResult> runs;
  DetectorConfig config;
};

struct CriterionLevel {
  double level = 0.0;
  /// Per-draw kNN recall values and their median.
  std::vector<double> values;
  double median = 0.0;
};

struct PerturbationReport {
  Decision decision = Decision::kNo;
  /// Last grid index whose criterion stays at or above the threshold.
  std::optional<std::size_t> p_star_index;
  std::optional<double> p_star_level;
  std::vector<CriterionLevel> criteria_curve;
  double d_star = 0.0;
  std::vector<double> d_star_samples;
  double d_xy = 0.0;
  double elapsed_seconds = 0.0;
  std::vector<std::string> warnings;
  MetricConfig metric;
  PerturbConfig config;
};

namespace detector {

/// Every run draws samples_per_run disjoint reference pairs and as many
/// independent reference/candidate pairs, tests them with Welch's t-test and
/// says Yes when p < alpha and the cross distances are larger on average.
/// The overall decision is the majority over runs.
ShiftReport subsample_shift_test(const EmbeddingSet& x, const EmbeddingSet& y,
                                 const DetectorConfig& cfg);

/// Finds the largest noise level whose kNN recall stays at or above the
/// threshold, calibrates a distance threshold from perturbed copies at that
/// level and says Yes when metric(x, y) exceeds it.
PerturbationReport perturbation_shift_test(const EmbeddingSet& x, const EmbeddingSet& y,
                                           const MetricConfig& metric, const PerturbConfig& cfg);

}  // namespace detector
}  // namespace shiftscope
