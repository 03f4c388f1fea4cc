#include "shiftscope/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "shiftscope/error.hpp"

namespace shiftscope {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngSeed RngSeed::child(std::uint64_t tag) const noexcept {
  return {seed, splitmix64(stream ^ splitmix64(tag + 0x632BE59BD9B4E019ULL))};
}

Engine RngSeed::engine() const {
  return Engine(splitmix64(seed ^ splitmix64(stream)));
}

void ClassMixture::validate() const {
  if (fractions.empty()) throw Error(ErrorCode::kConfig, "class mixture is empty");
  bool any_positive = false;
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::kConfig, "class fractions must lie in [0,1]");
    }
    any_positive |= f > 0.0;
  }
  if (!any_positive) throw Error(ErrorCode::kConfig, "class mixture keeps no class");
}

namespace sampling {

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, const RngSeed& rng) {
  if (m > n) {
    throw Error(ErrorCode::kSampleTooLarge, "cannot draw " + std::to_string(m) +
                                                " rows without replacement from " +
                                                std::to_string(n));
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Engine engine = rng.engine();
  // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
  for (std::size_t i = 0; i < m; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(engine)]);
  }
  pool.resize(m);
  return pool;
}

EmbeddingSet subsample(const EmbeddingSet& set, std::size_t m, const RngSeed& rng) {
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "subsample size must be >= 1");
  const auto indices = sample_indices(set.rows(), m, rng);
  return set.select(indices);
}

std::pair<EmbeddingSet, EmbeddingSet> disjoint_pair(const EmbeddingSet& set, std::size_t m,
                                                    const RngSeed& rng) {
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "subsample size must be >= 1");
  if (2 * m > set.rows()) {
    throw Error(ErrorCode::kSampleTooLarge, "disjoint pair of size " + std::to_string(m) +
                                                " needs " + std::to_string(2 * m) +
                                                " rows, set has " + std::to_string(set.rows()));
  }
  const auto indices = sample_indices(set.rows(), 2 * m, rng);
  const std::span<const std::size_t> all(indices);
  return {set.select(all.first(m)), set.select(all.subspan(m))};
}

std::size_t num_classes(const EmbeddingSet& set) {
  if (!set.has_labels()) {
    throw Error(ErrorCode::kLabelsRequired, "operation requires a labeled embedding set");
  }
  const auto labels = set.labels();
  return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

std::vector<double> class_proportions(const EmbeddingSet& set, std::size_t classes) {
  if (!set.has_labels()) {
    throw Error(ErrorCode::kLabelsRequired, "operation requires a labeled embedding set");
  }
  std::vector<double> p(classes, 0.0);
  for (std::int64_t l : set.labels()) {
    if (static_cast<std::size_t>(l) < classes) p[static_cast<std::size_t>(l)] += 1.0;
  }
  for (double& v : p) v /= static_cast<double>(set.rows());
  return p;
}

EmbeddingSet apply_class_mixture(const EmbeddingSet& set, const ClassMixture& mix,
                                 const RngSeed& rng) {
  if (!set.has_labels()) {
    throw Error(ErrorCode::kLabelsRequired, "class mixture requires a labeled embedding set");
  }
  mix.validate();
  const auto labels = set.labels();
  std::vector<std::vector<std::size_t>> by_class(mix.fractions.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    if (c >= mix.fractions.size()) {
      throw Error(ErrorCode::kConfig, "label " + std::to_string(c) +
                                          " has no entry in the class mixture");
    }
    by_class[c].push_back(i);
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const auto& members = by_class[c];
    if (members.empty()) continue;
    const double want = std::ceil(mix.fractions[c] * static_cast<double>(members.size()));
    const auto keep = std::min(members.size(), static_cast<std::size_t>(want));
    for (std::size_t pos : sample_indices(members.size(), keep, rng.child(c))) {
      kept.push_back(members[pos]);
    }
  }
  if (kept.empty()) throw Error(ErrorCode::kConfig, "class mixture removed every row");
  std::sort(kept.begin(), kept.end());
  return set.select(kept);
}

std::pair<EmbeddingSet, EmbeddingSet> domain_split(const EmbeddingSet& set,
                                                   const std::set<std::int64_t>& classes_a,
                                                   const std::set<std::int64_t>& classes_b) {
  if (!set.has_labels()) {
    throw Error(ErrorCode::kLabelsRequired, "domain split requires a labeled embedding set");
  }
  for (std::int64_t c : classes_a) {
    if (classes_b.count(c)) {
      throw Error(ErrorCode::kInvalidSplit,
                  "class " + std::to_string(c) + " appears on both sides of the split");
    }
  }
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  const auto labels = set.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (classes_a.count(labels[i])) a.push_back(i);
    if (classes_b.count(labels[i])) b.push_back(i);
  }
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kInvalidSplit, "domain split leaves one side empty");
  }
  return {set.select(a), set.select(b)};
}

ClassMixture dirichlet_mixture(std::size_t num_classes, double concentration,
                               const RngSeed& rng) {
  if (num_classes < 2) throw Error(ErrorCode::kConfig, "Dirichlet mixture needs >= 2 classes");
  if (!(concentration > 0.0)) {
    throw Error(ErrorCode::kConfig, "Dirichlet concentration must be positive");
  }
  ClassMixture mix{std::vector<double>(num_classes, 1.0)};
  if (std::isinf(concentration)) return mix;

  Engine engine = rng.engine();
  boost::random::gamma_distribution<double> gamma(concentration, 1.0);
  for (double& f : mix.fractions) f = gamma(engine);
  const double top = *std::max_element(mix.fractions.begin(), mix.fractions.end());
  if (top <= 0.0) {
    // Every gamma draw underflowed; the limit of the normalized draw is a
    // single class holding all mass.
    std::fill(mix.fractions.begin(), mix.fractions.end(), 0.0);
    boost::random::uniform_int_distribution<std::size_t> pick(0, num_classes - 1);
    mix.fractions[pick(engine)] = 1.0;
    return mix;
  }
  for (double& f : mix.fractions) f /= top;
  // Exact 1.0 for the argmax regardless of rounding in the division.
  *std::max_element(mix.fractions.begin(), mix.fractions.end()) = 1.0;
  return mix;
}

EmbeddingSet gaussian_clusters(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                               double separation, const RngSeed& rng) {
  if (num_classes == 0 || per_class == 0 || dim == 0) {
    throw Error(ErrorCode::kConfig, "cluster counts and dimension must be >= 1");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw Error(ErrorCode::kConfig, "cluster separation must be finite and >= 0");
  }
  const std::size_t n = num_classes * per_class;
  std::vector<double> data(n * dim);
  std::vector<std::int64_t> labels(n);
  Engine engine = rng.engine();
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t p = 0; p < per_class; ++p) {
      const std::size_t r = c * per_class + p;
      double* row = data.data() + r * dim;
      for (std::size_t j = 0; j < dim; ++j) row[j] = normal(engine);
      row[c % dim] += separation;
      labels[r] = static_cast<std::int64_t>(c);
    }
  }
  return EmbeddingSet(std::move(data), n, dim, std::move(labels), "clusters");
}

EmbeddingSet gaussian_perturb(const EmbeddingSet& set, double sigma, const RngSeed& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kConfig, "noise sigma must be finite and >= 0");
  }
  if (sigma == 0.0) return set;
  std::vector<double> data(set.data().begin(), set.data().end());
  Engine engine = rng.engine();
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : data) v += sigma * normal(engine);
  std::optional<std::vector<std::int64_t>> labels;
  if (set.has_labels()) labels.emplace(set.labels().begin(), set.labels().end());
  return EmbeddingSet(std::move(data), set.rows(), set.dim(), std::move(labels), set.name());
}

std::pair<EmbeddingSet, EmbeddingSet> split_halves(const EmbeddingSet& set, const RngSeed& rng) {
  if (set.rows() < 2) throw Error(ErrorCode::kSampleTooLarge, "cannot halve fewer than 2 rows");
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
  auto split_group = [&](const std::vector<std::size_t>& members, const RngSeed& stream) {
    const auto order = sample_indices(members.size(), members.size(), stream);
    const std::size_t half = members.size() / 2;
    for (std::size_t k = 0; k < order.size(); ++k) {
      (k < half ? a : b).push_back(members[order[k]]);
    }
  };
  if (set.has_labels()) {
    std::vector<std::vector<std::size_t>> by_class(num_classes(set));
    const auto labels = set.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (!by_class[c].empty()) split_group(by_class[c], rng.child(c));
    }
  } else {
    std::vector<std::size_t> all(set.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    split_group(all, rng);
  }
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::kSampleTooLarge, "split leaves one half empty");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {set.select(a), set.select(b)};
}

std::pair<EmbeddingSet, EmbeddingSet> subpopulation_shift(const EmbeddingSet& set,
                                                          const ClassMixture& reference_mix,
                                                          const ClassMixture& candidate_mix,
                                                          const RngSeed& rng) {
  auto [ref, cand] = split_halves(set, rng.child(0));
  return {apply_class_mixture(ref, reference_mix, rng.child(1)),
          apply_class_mixture(cand, candidate_mix, rng.child(2))};
}

std::pair<EmbeddingSet, EmbeddingSet> subpopulation_shift(const EmbeddingSet& set,
                                                          double fraction,
                                                          const RngSeed& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kConfig, "subpopulation fraction must lie in [0,1]");
  }
  const std::size_t classes = num_classes(set);
  if (classes < 2) throw Error(ErrorCode::kConfig, "subpopulation shift needs >= 2 classes");
  // Random division of the labels into two groups.
  const auto order = sample_indices(classes, classes, rng.child(3));
  ClassMixture ref_mix{std::vector<double>(classes, 1.0)};
  ClassMixture cand_mix{std::vector<double>(classes, 1.0)};
  for (std::size_t k = 0; k < classes; ++k) {
    (k < classes / 2 ? ref_mix : cand_mix).fractions[order[k]] = fraction;
  }
  return subpopulation_shift(set, ref_mix, cand_mix, rng);
}

}  // namespace sampling
}  // namespace shiftscope
