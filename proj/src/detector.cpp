#include "shiftscope/detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "parallel.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/sampling.hpp"
#include "summation.hpp"

namespace shiftscope {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_same_dim(const EmbeddingSet& x, const EmbeddingSet& y) {
  if (x.dim() != y.dim()) {
    throw Error(ErrorCode::kDimension, "reference has d=" + std::to_string(x.dim()) +
                                           ", candidate has d=" + std::to_string(y.dim()));
  }
}

}  // namespace

const char* to_string(Metric m) noexcept {
  switch (m) {
    case Metric::kEnergy:
      return "energy";
    case Metric::kLocalEnergy:
      return "local-energy";
    case Metric::kSwp:
      return "swp";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "energy") return Metric::kEnergy;
  if (name == "local-energy") return Metric::kLocalEnergy;
  if (name == "swp") return Metric::kSwp;
  throw Error(ErrorCode::kConfig, "unknown metric '" + std::string(name) + "'");
}

const char* to_string(Aggregator a) noexcept {
  return a == Aggregator::kMedian ? "median" : "mean";
}

void MetricConfig::validate() const {
  if (kind == Metric::kLocalEnergy && k == 0) throw Error(ErrorCode::kConfig, "k must be >= 1");
  if (kind == Metric::kSwp) {
    rips.validate();
    if (slices == 0) throw Error(ErrorCode::kConfig, "slices must be >= 1");
  }
}

double evaluate_metric(const EmbeddingSet& x, const EmbeddingSet& y, const MetricConfig& cfg,
                       const RngSeed& rng) {
  switch (cfg.kind) {
    case Metric::kEnergy:
      return distances::energy_statistic(x, y);
    case Metric::kLocalEnergy:
      return distances::local_energy_statistic(x, y, cfg.k, cfg.variant);
    case Metric::kSwp: {
      RipsConfig rips = cfg.rips;
      rips.seed = rng;
      return topology::swp_distance(x, y, rips, cfg.slices);
    }
  }
  throw Error(ErrorCode::kConfig, "unknown metric");
}

void DetectorConfig::validate() const {
  metric.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kConfig, "alpha must be in (0,1)");
  if (subsample_size < 2) throw Error(ErrorCode::kConfig, "subsample size must be >= 2");
  if (samples_per_run < 2) throw Error(ErrorCode::kConfig, "samples per run must be >= 2");
  if (runs < 1) throw Error(ErrorCode::kConfig, "runs must be >= 1");
  if (metric.kind == Metric::kLocalEnergy && metric.k > subsample_size) {
    throw Error(ErrorCode::kConfig, "local energy k exceeds the subsample size");
  }
}

std::vector<double> PerturbConfig::default_grid() {
  std::vector<double> grid(10);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = std::pow(10.0, -2.0 + 2.0 * static_cast<double>(i) / 9.0);
  }
  grid.front() = 0.01;
  grid.back() = 1.0;
  return grid;
}

void PerturbConfig::validate() const {
  if (grid.empty()) throw Error(ErrorCode::kConfig, "perturbation grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw Error(ErrorCode::kConfig, "grid levels must be positive and finite");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::kConfig, "grid must be strictly ascending");
    }
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "threshold must be in (0,1]");
  }
  if (samples_per_level < 1) throw Error(ErrorCode::kConfig, "samples per level must be >= 1");
  if (criterion_k < 1) throw Error(ErrorCode::kConfig, "criterion k must be >= 1");
}

namespace detector {

ShiftReport subsample_shift_test(const EmbeddingSet& x, const EmbeddingSet& y,
                                 const DetectorConfig& cfg) {
  cfg.validate();
  require_same_dim(x, y);
  const std::size_t m = cfg.subsample_size;
  if (2 * m > x.rows()) {
    throw Error(ErrorCode::kSampleTooLarge,
                "reference needs at least 2m = " + std::to_string(2 * m) + " rows, has " +
                    std::to_string(x.rows()));
  }
  if (m > y.rows()) {
    throw Error(ErrorCode::kSampleTooLarge, "candidate needs at least m = " + std::to_string(m) +
                                                " rows, has " + std::to_string(y.rows()));
  }
  const auto start = Clock::now();
  const std::size_t n = cfg.samples_per_run;

  // Task t covers run t / (2n); even offsets are reference pairs, odd
  // offsets cross pairs.
  const std::size_t tasks = cfg.runs * n * 2;
  std::vector<double> values(tasks);
  std::vector<double> times(tasks);
  detail::parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t run = t / (2 * n);
    const std::size_t i = (t % (2 * n)) / 2;
    const bool cross = t % 2 == 1;
    const RngSeed rng = cfg.seed.child(run);
    const auto t0 = Clock::now();
    if (cross) {
      const EmbeddingSet xs = sampling::subsample(x, m, rng.child(1, i));
      const EmbeddingSet ys = sampling::subsample(y, m, rng.child(2, i));
      values[t] = evaluate_metric(xs, ys, cfg.metric, rng.child(4, i));
    } else {
      const auto [a, b] = sampling::disjoint_pair(x, m, rng.child(0, i));
      values[t] = evaluate_metric(a, b, cfg.metric, rng.child(3, i));
    }
    times[t] = seconds_since(t0);
  });

  ShiftReport report;
  report.config = cfg;
  report.runs.resize(cfg.runs);
  std::vector<Decision> decisions;
  std::vector<double> p_values;
  std::vector<double> pooled_xx;
  std::vector<double> pooled_xy;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    RunResult& run = report.runs[r];
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t base = r * 2 * n + 2 * i;
      run.samples.d_xx.push_back(values[base]);
      run.samples.d_xy.push_back(values[base + 1]);
      run.elapsed_seconds += times[base] + times[base + 1];
    }
    run.test = stats::welch_t_test(run.samples.d_xx, run.samples.d_xy);
    // Welch's t is (mean_xx - mean_xy)/se, so a shift away from the
    // reference shows up as mean_b > mean_a.
    run.decision = run.test.p < cfg.alpha && run.test.mean_b > run.test.mean_a ? Decision::kYes
                                                                               : Decision::kNo;
    decisions.push_back(run.decision);
    p_values.push_back(run.test.p);
    pooled_xx.insert(pooled_xx.end(), run.samples.d_xx.begin(), run.samples.d_xx.end());
    pooled_xy.insert(pooled_xy.end(), run.samples.d_xy.begin(), run.samples.d_xy.end());
    report.mean_run_seconds += run.elapsed_seconds;
  }
  report.mean_run_seconds /= static_cast<double>(cfg.runs);
  report.fit = stats::fit_score(decisions);
  report.decision = report.fit.decision;
  report.p5_p = stats::percentile(p_values, 5.0);
  report.p95_p = stats::percentile(p_values, 95.0);
  report.d_xx_p5 = stats::percentile(pooled_xx, 5.0);
  report.d_xx_p95 = stats::percentile(pooled_xx, 95.0);
  report.d_xy_p5 = stats::percentile(pooled_xy, 5.0);
  report.d_xy_p95 = stats::percentile(pooled_xy, 95.0);
  report.elapsed_seconds = seconds_since(start);
  return report;
}

PerturbationReport perturbation_shift_test(const EmbeddingSet& x, const EmbeddingSet& y,
                                           const MetricConfig& metric, const PerturbConfig& cfg) {
  metric.validate();
  cfg.validate();
  require_same_dim(x, y);
  if (cfg.criterion_k >= x.rows()) {
    throw Error(ErrorCode::kKTooLarge, "criterion k must be smaller than the reference size");
  }
  const auto start = Clock::now();
  PerturbationReport report;
  report.metric = metric;
  report.config = cfg;
  if (x.rows() >= 10000) {
    report.warnings.push_back("reference has " + std::to_string(x.rows()) +
                              " rows; the perturbation test is meant for fewer than 10000");
  }

  const NeighborIndex reference = distances::self_knn(x, cfg.criterion_k);
  const std::size_t draws = cfg.samples_per_level;
  // Draw j reuses the same noise stream at every level, so the curve moves
  // with sigma alone.
  std::optional<std::size_t> first_failure;
  for (std::size_t level = 0; level < cfg.grid.size(); ++level) {
    CriterionLevel point{cfg.grid[level], std::vector<double>(draws), 0.0};
    detail::parallel_for(draws, cfg.threads, [&](std::size_t j) {
      const EmbeddingSet noisy = sampling::gaussian_perturb(x, point.level, cfg.seed.child(0, j));
      point.values[j] = distances::knn_recall(reference, distances::self_knn(noisy, cfg.criterion_k));
    });
    point.median = median(point.values);
    report.criteria_curve.push_back(std::move(point));
    if (report.criteria_curve.back().median < cfg.threshold && !first_failure) {
      first_failure = level;
      if (!cfg.full_curve) break;
    }
  }

  if (!first_failure) {
    report.p_star_index = cfg.grid.size() - 1;
  } else if (*first_failure > 0) {
    report.p_star_index = *first_failure - 1;
  }

  if (report.p_star_index) {
    const double sigma = cfg.grid[*report.p_star_index];
    report.p_star_level = sigma;
    report.d_star_samples.resize(draws);
    detail::parallel_for(draws, cfg.threads, [&](std::size_t j) {
      const EmbeddingSet noisy = sampling::gaussian_perturb(x, sigma, cfg.seed.child(1, j));
      report.d_star_samples[j] = evaluate_metric(x, noisy, metric, cfg.seed.child(2, j));
    });
    report.d_star = cfg.aggregator == Aggregator::kMedian
                        ? median(report.d_star_samples)
                        : detail::compensated_mean(report.d_star_samples);
  } else {
    report.d_star = 0.0;
    report.warnings.push_back(
        "kNN recall is below the threshold at the smallest noise level; using D* = 0");
  }

  report.d_xy = evaluate_metric(x, y, metric, cfg.seed.child(3));
  report.decision = report.d_xy > report.d_star ? Decision::kYes : Decision::kNo;
  report.elapsed_seconds = seconds_since(start);
  return report;
}

}  // namespace detector
}  // namespace shiftscope
