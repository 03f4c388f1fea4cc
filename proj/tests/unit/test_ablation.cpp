#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shiftscope/ablation.hpp"
#include "shiftscope/embedding.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/sampling.hpp"

using namespace shiftscope;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EmbeddingSet labeled_set() {
  return embedio::l2_normalize(sampling::gaussian_clusters(10, 100, 16, 6.0, {21, 0})).set;
}

AblationConfig small_config() {
  AblationConfig cfg;
  cfg.sample_sizes = {10, 15};
  cfg.concentrations = {kInf, 1.0, 0.1};
  cfg.reps = 6;
  cfg.samples_per_run = 6;
  cfg.metric.kind = Metric::kEnergy;
  cfg.seed = {5, 0};
  return cfg;
}

}  // namespace

TEST(AblationConfig, Validation) {
  AblationConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_TRUE(std::isinf(cfg.concentrations.front()));
  cfg.concentrations = {1.0, 0.0};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.sample_sizes = {};
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.reps = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Ablation, RowsOrderedAndBounded) {
  const AblationConfig cfg = small_config();
  const auto rows = ablation::run(labeled_set(), cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].sample_size, cfg.sample_sizes[i / 3]);
    EXPECT_EQ(rows[i].concentration, cfg.concentrations[i % 3]);
    EXPECT_EQ(rows[i].reps, 6u);
    EXPECT_GE(rows[i].positive_rate, 0.0);
    EXPECT_LE(rows[i].positive_rate, 1.0);
    EXPECT_GE(rows[i].accuracy, 0.0);
    EXPECT_LE(rows[i].accuracy, 1.0);
    EXPECT_GE(rows[i].label_dist_l2, 0.0);
  }
  // Label statistics do not depend on the sample size.
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].label_dist_l2, rows[i + 3].label_dist_l2);
    EXPECT_EQ(rows[i].accuracy, rows[i + 3].accuracy);
  }
}

TEST(Ablation, ShiftMagnitudeOrdering) {
  const auto rows = ablation::run(labeled_set(), small_config());
  // Infinite concentration keeps both halves balanced.
  EXPECT_LT(rows[0].label_dist_l2, 1e-12);
  EXPECT_LT(rows[0].label_dist_l2, rows[1].label_dist_l2);
  EXPECT_LT(rows[1].label_dist_l2, rows[2].label_dist_l2);
  EXPECT_LE(rows[0].positive_rate, rows[5].positive_rate);
  EXPECT_GT(rows[5].positive_rate, 0.5);
}

TEST(Ablation, DeterministicAcrossThreads) {
  AblationConfig cfg = small_config();
  cfg.threads = 1;
  const std::string a = ablation::format_csv(ablation::run(labeled_set(), cfg));
  cfg.threads = 3;
  EXPECT_EQ(a, ablation::format_csv(ablation::run(labeled_set(), cfg)));
}

TEST(Ablation, CsvShape) {
  AblationRow row;
  row.sample_size = 25;
  row.concentration = kInf;
  row.label_dist_l2 = 0.5;
  row.positive_rate = 0.25;
  row.mean_metric = 0.125;
  row.accuracy = 1.0;
  row.reps = 100;
  EXPECT_EQ(ablation::format_csv({row}),
            "sample_size,concentration,label_dist_l2,positive_rate,mean_metric,accuracy,reps\n"
            "25,inf,0.5,0.25,0.125,1,100\n");
}

TEST(CentroidAccuracy, SeparatedClustersArePerfect) {
  const EmbeddingSet train = sampling::gaussian_clusters(4, 50, 8, 20.0, {1, 0});
  const EmbeddingSet test = sampling::gaussian_clusters(4, 50, 8, 20.0, {2, 0});
  EXPECT_EQ(ablation::centroid_accuracy(train, test), 1.0);
}

TEST(CentroidAccuracy, PriorsBreakOverlap) {
  // Two identical classes: the prior alone decides, so every point goes to
  // the majority class of the training set.
  const EmbeddingSet base = sampling::gaussian_clusters(2, 60, 4, 0.0, {3, 0});
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < base.rows(); ++i) {
    if (base.labels()[i] == 0 || i % 3 == 0) keep.push_back(i);
  }
  const EmbeddingSet train = base.select(keep);
  const EmbeddingSet test = sampling::gaussian_clusters(2, 60, 4, 0.0, {4, 0});
  const double acc = ablation::centroid_accuracy(train, test);
  EXPECT_GT(acc, 0.5);
  EXPECT_LE(acc, 1.0);
  EXPECT_THROW(ablation::centroid_accuracy(train, oracle::from_rows({{0, 0}})), Error);
}
