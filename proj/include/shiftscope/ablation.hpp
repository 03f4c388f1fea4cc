/// @file ablation.hpp
/// @brief Sample size x label shift sweep of the subsample shift test.

#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "shiftscope/detector.hpp"
#include "shiftscope/embedding.hpp"

namespace shiftscope {

struct AblationConfig {
  std::vector<std::size_t> sample_sizes{25, 50, 100};
  /// Dirichlet concentrations, one shift magnitude each. Infinity means no
  /// shift; small values give strongly skewed class mixtures.
  std::vector<double> concentrations{std::numeric_limits<double>::infinity(),
                                     1000.0, 100.0, 30.0, 10.0, 3.0, 1.0, 0.3, 0.1};
  std::size_t reps = 100;
  std::size_t samples_per_run = 15;
  double alpha = 0.05;
  MetricConfig metric{};
  RngSeed seed{};
  std::size_t threads = 0;

  void validate() const;
};

struct AblationRow {
  std::size_t sample_size = 0;
  double concentration = 0.0;
  /// Mean over reps of the L2 distance between the class proportions of the
  /// reference and candidate sets.
  double label_dist_l2 = 0.0;
  double positive_rate = 0.0;
  /// Mean over reps of the mean reference/candidate distance.
  double mean_metric = 0.0;
  /// Mean held-out accuracy on the candidate of a nearest-centroid classifier
  /// with class priors, fit on the reference.
  double accuracy = 0.0;
  std::size_t reps = 0;
};

namespace ablation {

/// For every concentration and rep: split the labeled set into halves, give
/// each half an independent Dirichlet class mixture, then run one subsample
/// test run per sample size on the resulting pair. Rows are ordered by
/// sample size, then concentration.
std::vector<AblationRow> run(const EmbeddingSet& labeled, const AblationConfig& cfg);

/// Accuracy on `test` of the rule argmax_c -|z - mu_c|^2 / (2 s^2) + log pi_c
/// with centroids, priors and pooled per-coordinate variance s^2 from `train`.
double centroid_accuracy(const EmbeddingSet& train, const EmbeddingSet& test);

/// Header sample_size,concentration,label_dist_l2,positive_rate,mean_metric,
/// accuracy,reps.
std::string format_csv(const std::vector<AblationRow>& rows);

}  // namespace ablation
}  // namespace shiftscope
