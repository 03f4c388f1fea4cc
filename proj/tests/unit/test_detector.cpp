#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shiftscope/detector.hpp"
#include "shiftscope/embedding.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/sampling.hpp"

using namespace shiftscope;

namespace {

EmbeddingSet clusters(std::size_t per_class, std::uint64_t seed, double sep = 6.0) {
  return embedio::l2_normalize(sampling::gaussian_clusters(10, per_class, 32, sep, {seed, 0})).set;
}

DetectorConfig small_config(Metric metric, std::size_t m = 60) {
  DetectorConfig cfg;
  cfg.metric.kind = metric;
  cfg.subsample_size = m;
  cfg.samples_per_run = 8;
  cfg.runs = 6;
  cfg.seed = {3, 0};
  return cfg;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Metric, NamesRoundTrip) {
  for (Metric m : {Metric::kEnergy, Metric::kLocalEnergy, Metric::kSwp}) {
    EXPECT_EQ(parse_metric(to_string(m)), m);
  }
  EXPECT_EQ(code_of([] { parse_metric("cosine"); }), ErrorCode::kConfig);
}

TEST(Config, Validation) {
  DetectorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha = 1.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kConfig);
  cfg = {};
  cfg.samples_per_run = 1;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kConfig);
  cfg = {};
  cfg.runs = 0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kConfig);
  cfg = {};
  cfg.metric.k = 2000;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kConfig);

  PerturbConfig p;
  EXPECT_EQ(p.grid.size(), 10u);
  EXPECT_EQ(p.grid.front(), 0.01);
  EXPECT_EQ(p.grid.back(), 1.0);
  EXPECT_NO_THROW(p.validate());
  p.grid = {0.1, 0.05};
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kConfig);
  p = {};
  p.threshold = 0.0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kConfig);
}

TEST(Subsample, SizePreconditions) {
  const EmbeddingSet x = clusters(10, 1);  // 100 rows
  const EmbeddingSet y = clusters(5, 2);   // 50 rows
  EXPECT_EQ(code_of([&] { detector::subsample_shift_test(x, y, small_config(Metric::kEnergy, 51)); }),
            ErrorCode::kSampleTooLarge);
  EXPECT_EQ(code_of([&] { detector::subsample_shift_test(y, x, small_config(Metric::kEnergy, 30)); }),
            ErrorCode::kSampleTooLarge);
  const EmbeddingSet z = oracle::from_rows({{0, 0}, {1, 1}});
  EXPECT_EQ(code_of([&] { detector::subsample_shift_test(x, z, small_config(Metric::kEnergy, 2)); }),
            ErrorCode::kDimension);
}

TEST(Subsample, ReportShapeAndRanges) {
  const EmbeddingSet x = clusters(20, 1);
  const ShiftReport r = detector::subsample_shift_test(x, x, small_config(Metric::kEnergy));
  ASSERT_EQ(r.runs.size(), 6u);
  for (const RunResult& run : r.runs) {
    EXPECT_EQ(run.samples.d_xx.size(), 8u);
    EXPECT_EQ(run.samples.d_xy.size(), 8u);
    EXPECT_GE(run.test.p, 0.0);
    EXPECT_LE(run.test.p, 1.0);
  }
  EXPECT_EQ(r.fit.yes + r.fit.no, 6u);
  EXPECT_LE(r.p5_p, r.p95_p);
  EXPECT_LE(r.d_xx_p5, r.d_xx_p95);
  EXPECT_GE(r.fit.score, 0.5);
}

TEST(Subsample, SameSetIsNoShift) {
  const EmbeddingSet x = clusters(20, 4);
  for (Metric m : {Metric::kEnergy, Metric::kLocalEnergy, Metric::kSwp}) {
    DetectorConfig cfg = small_config(m);
    cfg.runs = 20;
    EXPECT_EQ(detector::subsample_shift_test(x, x, cfg).decision, Decision::kNo) << to_string(m);
  }
}

TEST(Subsample, DomainShiftIsDetected) {
  const EmbeddingSet all = clusters(40, 5);
  const auto [a, b] = sampling::domain_split(all, {0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  for (Metric m : {Metric::kEnergy, Metric::kLocalEnergy}) {
    const ShiftReport r = detector::subsample_shift_test(a, b, small_config(m, 50));
    EXPECT_EQ(r.decision, Decision::kYes) << to_string(m);
    EXPECT_EQ(r.fit.score, 1.0) << to_string(m);
    EXPECT_LT(r.p95_p, 0.01) << to_string(m);
  }
}

// Centroids sit on permuted basis vectors, so the halves {0-4} and {5-9} are
// isometric in law and their diagrams are identically distributed.
TEST(Subsample, SwpIsBlindToIsometricHalves) {
  const EmbeddingSet all = clusters(40, 5);
  const auto [a, b] = sampling::domain_split(all, {0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  DetectorConfig cfg = small_config(Metric::kSwp, 50);
  cfg.runs = 20;
  EXPECT_EQ(detector::subsample_shift_test(a, b, cfg).decision, Decision::kNo);
}

TEST(Subsample, SwpSeesClusterCount) {
  const EmbeddingSet all = clusters(40, 5);
  const auto [a, b] = sampling::domain_split(all, {0, 1}, {2, 3, 4, 5, 6, 7, 8, 9});
  const ShiftReport r = detector::subsample_shift_test(a, b, small_config(Metric::kSwp, 40));
  EXPECT_EQ(r.decision, Decision::kYes);
  EXPECT_LT(r.p95_p, 0.01);
}

TEST(Subsample, DirectionGuardRejectsSmallerCrossDistances) {
  // The local energy cross terms of overlapping samples of one set collapse
  // to zero-distance matches, so D_xy < D_xx can be highly significant.
  const EmbeddingSet x = clusters(20, 6);
  DetectorConfig cfg = small_config(Metric::kLocalEnergy, 90);
  const ShiftReport r = detector::subsample_shift_test(x, x, cfg);
  bool saw_guard = false;
  for (const RunResult& run : r.runs) {
    if (run.test.p < cfg.alpha && run.test.mean_b < run.test.mean_a) {
      saw_guard = true;
      EXPECT_EQ(run.decision, Decision::kNo);
    }
  }
  EXPECT_TRUE(saw_guard);
}

TEST(Subsample, DeterministicAcrossThreadCounts) {
  const EmbeddingSet x = clusters(20, 7);
  const EmbeddingSet y = clusters(20, 8, 5.0);
  DetectorConfig cfg = small_config(Metric::kSwp, 40);
  cfg.threads = 1;
  const ShiftReport a = detector::subsample_shift_test(x, y, cfg);
  cfg.threads = 4;
  const ShiftReport b = detector::subsample_shift_test(x, y, cfg);
  for (std::size_t r = 0; r < a.runs.size(); ++r) {
    EXPECT_EQ(a.runs[r].samples.d_xx, b.runs[r].samples.d_xx);
    EXPECT_EQ(a.runs[r].samples.d_xy, b.runs[r].samples.d_xy);
  }
  cfg.seed = {4, 0};
  const ShiftReport c = detector::subsample_shift_test(x, y, cfg);
  EXPECT_NE(a.runs[0].samples.d_xx, c.runs[0].samples.d_xx);
}

TEST(Subsample, NullWithoutSeparationRarelyFires) {
  // separation 0: every class shares one distribution, so class-disjoint
  // halves are two samples of the same law.
  const EmbeddingSet all = embedio::l2_normalize(
      sampling::gaussian_clusters(10, 100, 32, 0.0, {9, 0})).set;
  const auto [a, b] = sampling::domain_split(all, {0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  DetectorConfig cfg = small_config(Metric::kEnergy, 100);
  cfg.runs = 20;
  const ShiftReport r = detector::subsample_shift_test(a, b, cfg);
  EXPECT_GE(static_cast<double>(r.fit.no) / 20.0, 0.9);
  EXPECT_EQ(r.decision, Decision::kNo);
}

TEST(Perturbation, SelfComparisonIsNo) {
  const EmbeddingSet x = clusters(30, 10);
  MetricConfig m;
  m.kind = Metric::kEnergy;
  const PerturbationReport r = detector::perturbation_shift_test(x, x, m, PerturbConfig{});
  EXPECT_EQ(r.decision, Decision::kNo);
  EXPECT_NEAR(r.d_xy, 0.0, 1e-12);
  EXPECT_LE(r.d_xy, r.d_star);
  EXPECT_LE(r.criteria_curve.size(), 10u);
}

TEST(Perturbation, CrossingInvariantAndDomainShift) {
  const EmbeddingSet all = clusters(40, 11);
  const auto [a, b] = sampling::domain_split(all, {0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  for (Metric kind : {Metric::kEnergy, Metric::kLocalEnergy}) {
    MetricConfig m;
    m.kind = kind;
    PerturbConfig cfg;
    cfg.seed = {2, 0};
    const PerturbationReport r = detector::perturbation_shift_test(a, b, m, cfg);
    EXPECT_EQ(r.decision, Decision::kYes) << to_string(kind);
    ASSERT_TRUE(r.p_star_index.has_value());
    const std::size_t p = *r.p_star_index;
    for (std::size_t i = 0; i <= p; ++i) EXPECT_GE(r.criteria_curve[i].median, cfg.threshold);
    if (p + 1 < cfg.grid.size()) {
      ASSERT_EQ(r.criteria_curve.size(), p + 2);
      EXPECT_LT(r.criteria_curve[p + 1].median, cfg.threshold);
    }
    EXPECT_EQ(r.p_star_level, cfg.grid[p]);
    EXPECT_EQ(r.d_star_samples.size(), 3u);
  }
}

TEST(Perturbation, FullCurveIsMonotone) {
  const EmbeddingSet x = clusters(30, 12);
  MetricConfig m;
  m.kind = Metric::kEnergy;
  PerturbConfig cfg;
  cfg.full_curve = true;
  const PerturbationReport r = detector::perturbation_shift_test(x, x, m, cfg);
  ASSERT_EQ(r.criteria_curve.size(), 10u);
  for (std::size_t i = 1; i < 10; ++i) {
    EXPECT_LE(r.criteria_curve[i].median, r.criteria_curve[i - 1].median);
  }
}

TEST(Perturbation, NoPassingLevelWarnsAndUsesZero) {
  const EmbeddingSet x = clusters(10, 13);
  const EmbeddingSet y = clusters(10, 14);
  MetricConfig m;
  m.kind = Metric::kEnergy;
  PerturbConfig cfg;
  cfg.grid = {0.5, 1.0};
  cfg.threshold = 1.0;
  const PerturbationReport r = detector::perturbation_shift_test(x, y, m, cfg);
  EXPECT_FALSE(r.p_star_index.has_value());
  EXPECT_EQ(r.d_star, 0.0);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.decision, r.d_xy > 0.0 ? Decision::kYes : Decision::kNo);
}

TEST(Perturbation, LargeReferenceWarns) {
  const EmbeddingSet x = sampling::gaussian_clusters(1, 10000, 2, 0.0, {15, 0});
  const EmbeddingSet y = sampling::gaussian_clusters(1, 50, 2, 0.0, {16, 0});
  MetricConfig m;
  m.kind = Metric::kEnergy;
  PerturbConfig cfg;
  cfg.grid = {0.01};
  cfg.samples_per_level = 1;
  const PerturbationReport r = detector::perturbation_shift_test(x, y, m, cfg);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("10000"), std::string::npos);
}

TEST(Perturbation, MeanAggregator) {
  const EmbeddingSet x = clusters(20, 17);
  MetricConfig m;
  m.kind = Metric::kEnergy;
  PerturbConfig cfg;
  cfg.aggregator = Aggregator::kMean;
  const PerturbationReport r = detector::perturbation_shift_test(x, x, m, cfg);
  double mean = 0.0;
  for (double v : r.d_star_samples) mean += v / 3.0;
  EXPECT_NEAR(r.d_star, mean, 1e-15);
}
