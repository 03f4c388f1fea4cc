#include "shiftscope/ablation.hpp"

#include <charconv>
#include <cmath>

#include "parallel.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/sampling.hpp"
#include "summation.hpp"

namespace shiftscope {

void AblationConfig::validate() const {
  metric.validate();
  if (sample_sizes.empty() || concentrations.empty()) {
    throw Error(ErrorCode::kConfig, "ablation needs sample sizes and concentrations");
  }
  for (std::size_t m : sample_sizes) {
    if (m < 2) throw Error(ErrorCode::kConfig, "sample sizes must be >= 2");
  }
  for (double c : concentrations) {
    if (!(c > 0.0)) throw Error(ErrorCode::kConfig, "concentrations must be positive");
  }
  if (reps < 1) throw Error(ErrorCode::kConfig, "reps must be >= 1");
  if (samples_per_run < 2) throw Error(ErrorCode::kConfig, "samples per run must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kConfig, "alpha must be in (0,1)");
}

namespace ablation {

namespace {

struct RepResult {
  double l2 = 0.0;
  double accuracy = 0.0;
  std::vector<bool> positive;
  std::vector<double> mean_metric;
};

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

double centroid_accuracy(const EmbeddingSet& train, const EmbeddingSet& test) {
  const std::size_t classes = std::max(sampling::num_classes(train), sampling::num_classes(test));
  const std::size_t d = train.dim();
  if (test.dim() != d) throw Error(ErrorCode::kDimension, "dimension mismatch");
  std::vector<double> centroids(classes * d, 0.0);
  std::vector<std::size_t> counts(classes, 0);
  const auto labels = train.labels();
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    ++counts[c];
    const auto row = train.row(i);
    for (std::size_t k = 0; k < d; ++k) centroids[c * d + k] += row[k];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t k = 0; k < d; ++k) centroids[c * d + k] /= static_cast<double>(counts[c]);
  }
  auto sq = [&](std::span<const double> z, std::size_t c) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = z[k] - centroids[c * d + k];
      s += t * t;
    }
    return s;
  };
  detail::CompensatedSum spread;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    spread.add(sq(train.row(i), static_cast<std::size_t>(labels[i])));
  }
  const double var = std::max(spread.value() / static_cast<double>(train.rows() * d), 1e-300);

  std::size_t correct = 0;
  const auto truth = test.labels();
  for (std::size_t i = 0; i < test.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (counts[c] == 0) continue;
      const double prior = static_cast<double>(counts[c]) / static_cast<double>(train.rows());
      const double score = -sq(test.row(i), c) / (2.0 * var) + std::log(prior);
      if (score > best) {
        best = score;
        pick = c;
      }
    }
    if (static_cast<std::int64_t>(pick) == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.rows());
}

std::vector<AblationRow> run(const EmbeddingSet& labeled, const AblationConfig& cfg) {
  cfg.validate();
  const std::size_t classes = sampling::num_classes(labeled);
  const std::size_t levels = cfg.concentrations.size();
  const std::size_t sizes = cfg.sample_sizes.size();
  std::vector<RepResult> results(levels * cfg.reps);

  detail::parallel_for(results.size(), cfg.threads, [&](std::size_t t) {
    const std::size_t level = t / cfg.reps;
    const std::size_t rep = t % cfg.reps;
    const RngSeed rng = cfg.seed.child(level, rep);
    const auto [half_a, half_b] = sampling::split_halves(labeled, rng.child(0));
    const double conc = cfg.concentrations[level];
    const ClassMixture mix_x = sampling::dirichlet_mixture(classes, conc, rng.child(1));
    const ClassMixture mix_y = sampling::dirichlet_mixture(classes, conc, rng.child(2));
    const EmbeddingSet x = sampling::apply_class_mixture(half_a, mix_x, rng.child(3));
    const EmbeddingSet y = sampling::apply_class_mixture(half_b, mix_y, rng.child(4));

    RepResult& out = results[t];
    const auto px = sampling::class_proportions(x, classes);
    const auto py = sampling::class_proportions(y, classes);
    double l2 = 0.0;
    for (std::size_t c = 0; c < classes; ++c) l2 += (px[c] - py[c]) * (px[c] - py[c]);
    out.l2 = std::sqrt(l2);
    out.accuracy = centroid_accuracy(x, y);

    for (std::size_t s = 0; s < sizes; ++s) {
      const std::size_t m = cfg.sample_sizes[s];
      const RngSeed run_rng = rng.child(5, s);
      std::vector<double> d_xx(cfg.samples_per_run);
      std::vector<double> d_xy(cfg.samples_per_run);
      for (std::size_t i = 0; i < cfg.samples_per_run; ++i) {
        const auto [a, b] = sampling::disjoint_pair(x, m, run_rng.child(0, i));
        d_xx[i] = evaluate_metric(a, b, cfg.metric, run_rng.child(3, i));
        const EmbeddingSet xs = sampling::subsample(x, m, run_rng.child(1, i));
        const EmbeddingSet ys = sampling::subsample(y, m, run_rng.child(2, i));
        d_xy[i] = evaluate_metric(xs, ys, cfg.metric, run_rng.child(4, i));
      }
      const WelchResult w = stats::welch_t_test(d_xx, d_xy);
      out.positive.push_back(w.p < cfg.alpha && w.mean_b > w.mean_a);
      out.mean_metric.push_back(w.mean_b);
    }
  });

  std::vector<AblationRow> rows;
  for (std::size_t s = 0; s < sizes; ++s) {
    for (std::size_t level = 0; level < levels; ++level) {
      AblationRow row;
      row.sample_size = cfg.sample_sizes[s];
      row.concentration = cfg.concentrations[level];
      row.reps = cfg.reps;
      detail::CompensatedSum l2, metric, acc;
      std::size_t positives = 0;
      for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        const RepResult& r = results[level * cfg.reps + rep];
        l2.add(r.l2);
        acc.add(r.accuracy);
        metric.add(r.mean_metric[s]);
        positives += r.positive[s] ? 1 : 0;
      }
      const auto reps = static_cast<double>(cfg.reps);
      row.label_dist_l2 = l2.value() / reps;
      row.accuracy = acc.value() / reps;
      row.mean_metric = metric.value() / reps;
      row.positive_rate = static_cast<double>(positives) / reps;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "sample_size,concentration,label_dist_l2,positive_rate,mean_metric,accuracy,reps\n";
  for (const AblationRow& r : rows) {
    out += std::to_string(r.sample_size) + ',' + number(r.concentration) + ',' +
           number(r.label_dist_l2) + ',' + number(r.positive_rate) + ',' +
           number(r.mean_metric) + ',' + number(r.accuracy) + ',' + std::to_string(r.reps) + '\n';
  }
  return out;
}

}  // namespace ablation
}  // namespace shiftscope
