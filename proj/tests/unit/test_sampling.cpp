#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shiftscope/distances.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/sampling.hpp"

using namespace shiftscope;

namespace {

std::multiset<std::vector<double>> row_multiset(const EmbeddingSet& s) {
  std::multiset<std::vector<double>> out;
  for (std::size_t i = 0; i < s.rows(); ++i) out.emplace(s.row(i).begin(), s.row(i).end());
  return out;
}

// Row i holds the value i, so a sample tells which rows were drawn.
EmbeddingSet indexed(std::size_t n, std::size_t classes = 0) {
  std::vector<double> v(n);
  std::vector<std::int64_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = static_cast<double>(i);
    labels[i] = classes ? static_cast<std::int64_t>(i % classes) : 0;
  }
  if (classes == 0) return EmbeddingSet(std::move(v), n, 1);
  return EmbeddingSet(std::move(v), n, 1, std::move(labels));
}

std::set<std::size_t> ids(const EmbeddingSet& s) {
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < s.rows(); ++i) out.insert(static_cast<std::size_t>(s.row(i)[0]));
  return out;
}

std::map<std::int64_t, std::size_t> class_counts(const EmbeddingSet& s) {
  std::map<std::int64_t, std::size_t> out;
  for (std::int64_t l : s.labels()) ++out[l];
  return out;
}

}  // namespace

TEST(Rng, ChildStreamsAreDistinctAndStable) {
  const RngSeed root{42, 0};
  EXPECT_EQ(root.child(3), root.child(3));
  EXPECT_NE(root.child(3), root.child(4));
  EXPECT_NE(root.child(1, 2), root.child(2, 1));
  auto a = root.child(7).engine();
  auto b = root.child(7).engine();
  EXPECT_EQ(a(), b());
}

TEST(Subsample, FullDrawIsPermutation) {
  std::mt19937_64 gen(1);
  const EmbeddingSet s = oracle::random_set(gen, 30, 4);
  EXPECT_EQ(row_multiset(sampling::subsample(s, 30, {9, 0})), row_multiset(s));
}

TEST(Subsample, Deterministic) {
  const EmbeddingSet s = indexed(100);
  EXPECT_EQ(sampling::subsample(s, 10, {5, 1}), sampling::subsample(s, 10, {5, 1}));
  EXPECT_NE(sampling::subsample(s, 10, {5, 1}), sampling::subsample(s, 10, {5, 2}));
}

TEST(Subsample, UniformSingleDraws) {
  std::array<int, 4> freq{};
  for (std::uint64_t t = 0; t < 10000; ++t) {
    ++freq[sampling::sample_indices(4, 1, RngSeed{77, 0}.child(t))[0]];
  }
  for (int f : freq) {
    EXPECT_GE(f / 10000.0, 0.22);
    EXPECT_LE(f / 10000.0, 0.28);
  }
}

TEST(Subsample, TooLarge) {
  try {
    sampling::subsample(indexed(5), 6, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSampleTooLarge);
  }
}

TEST(DisjointPair, ExactPartitionAtHalf) {
  const EmbeddingSet s = indexed(20);
  const auto [a, b] = sampling::disjoint_pair(s, 10, {3, 0});
  std::set<std::size_t> all = ids(a);
  for (std::size_t i : ids(b)) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 20u);
}

TEST(DisjointPair, NeverOverlapsAndCoversAll) {
  const EmbeddingSet s = indexed(100);
  std::set<std::size_t> seen;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto [a, b] = sampling::disjoint_pair(s, 10, RngSeed{11, 0}.child(t));
    const auto ia = ids(a);
    const auto ib = ids(b);
    for (std::size_t i : ia) EXPECT_EQ(ib.count(i), 0u);
    seen.insert(ia.begin(), ia.end());
    seen.insert(ib.begin(), ib.end());
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_THROW(sampling::disjoint_pair(s, 51, {}), Error);
}

TEST(ClassMixture, IdentityAndRemoval) {
  const EmbeddingSet s = indexed(40, 4);
  EXPECT_EQ(row_multiset(sampling::apply_class_mixture(s, {{1, 1, 1, 1}}, {1, 0})),
            row_multiset(s));
  const EmbeddingSet without2 = sampling::apply_class_mixture(s, {{1, 1, 0, 1}}, {1, 0});
  EXPECT_EQ(class_counts(without2).count(2), 0u);
  EXPECT_EQ(without2.rows(), 30u);
}

TEST(ClassMixture, TenPercentKeepsTen) {
  const EmbeddingSet s = indexed(200, 2);
  const auto counts = class_counts(sampling::apply_class_mixture(s, {{0.1, 1.0}}, {4, 0}));
  EXPECT_EQ(counts.at(0), 10u);
  EXPECT_EQ(counts.at(1), 100u);
  // ceil(0.15 * 100) = 15
  EXPECT_EQ(class_counts(sampling::apply_class_mixture(s, {{0.15, 1.0}}, {4, 0})).at(0), 15u);
}

TEST(ClassMixture, KeepsOriginalOrderAndValidates) {
  const EmbeddingSet s = indexed(50, 5);
  const EmbeddingSet t = sampling::apply_class_mixture(s, {{0.5, 0.5, 0.5, 0.5, 0.5}}, {2, 0});
  for (std::size_t i = 1; i < t.rows(); ++i) EXPECT_LT(t.row(i - 1)[0], t.row(i)[0]);
  EXPECT_THROW(sampling::apply_class_mixture(s, {{1.5, 1, 1, 1, 1}}, {}), Error);
  EXPECT_THROW(sampling::apply_class_mixture(indexed(5), {{1.0}}, {}), Error);
}

TEST(DomainSplit, DisjointLabels) {
  const EmbeddingSet s = indexed(100, 10);
  const auto [a, b] = sampling::domain_split(s, {0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  for (std::int64_t l : a.labels()) EXPECT_LT(l, 5);
  for (std::int64_t l : b.labels()) EXPECT_GE(l, 5);
  EXPECT_LE(a.rows() + b.rows(), s.rows());
  try {
    sampling::domain_split(s, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSplit);
  }
  EXPECT_THROW(sampling::domain_split(s, {0, 1}, {1, 2}), Error);
  try {
    sampling::domain_split(indexed(10), {0}, {1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelsRequired);
  }
}

TEST(Dirichlet, MaxIsOneAndDeterministic) {
  for (double alpha : {0.1, 1.0, 10.0}) {
    const ClassMixture m = sampling::dirichlet_mixture(10, alpha, {3, 0});
    EXPECT_EQ(*std::max_element(m.fractions.begin(), m.fractions.end()), 1.0);
    EXPECT_EQ(m.fractions, sampling::dirichlet_mixture(10, alpha, {3, 0}).fractions);
  }
  const ClassMixture inf = sampling::dirichlet_mixture(4, INFINITY, {});
  EXPECT_EQ(inf.fractions, (std::vector<double>{1, 1, 1, 1}));
  EXPECT_THROW(sampling::dirichlet_mixture(4, 0.0, {}), Error);
}

TEST(Dirichlet, LargeConcentrationIsNearlyUniform) {
  for (std::uint64_t t = 0; t < 100; ++t) {
    const ClassMixture m = sampling::dirichlet_mixture(10, 1e6, RngSeed{5, 0}.child(t));
    // Fractions are p_c / max p; proportions are fractions / sum.
    double sum = 0.0;
    for (double f : m.fractions) sum += f;
    const auto [lo, hi] = std::minmax_element(m.fractions.begin(), m.fractions.end());
    EXPECT_LT((*hi - *lo) / sum, 0.05);
  }
}

TEST(Clusters, ShapeAndLabels) {
  const EmbeddingSet s = sampling::gaussian_clusters(10, 7, 16, 6.0, {1, 0});
  EXPECT_EQ(s.rows(), 70u);
  EXPECT_EQ(s.dim(), 16u);
  EXPECT_EQ(sampling::num_classes(s), 10u);
  EXPECT_EQ(s.labels()[69], 9);
}

TEST(Clusters, WellSeparatedClassesAreNearestCentroidSeparable) {
  const std::size_t classes = 10;
  const std::size_t d = 16;
  const EmbeddingSet train = sampling::gaussian_clusters(classes, 200, d, 10.0, {1, 0});
  const EmbeddingSet test = sampling::gaussian_clusters(classes, 200, d, 10.0, {2, 0});
  std::vector<std::vector<double>> centroid(classes, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < train.rows(); ++i) {
    for (std::size_t k = 0; k < d; ++k) centroid[train.labels()[i]][k] += train.row(i)[k] / 200.0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.rows(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < classes; ++c) {
      const double dc = oracle::dist(test.row(i), centroid[c]);
      if (dc < best_d) {
        best_d = dc;
        best = c;
      }
    }
    correct += static_cast<std::int64_t>(best) == test.labels()[i];
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(test.rows()), 0.99);
}

TEST(Perturb, ZeroSigmaIsIdentity) {
  std::mt19937_64 gen(3);
  const EmbeddingSet s = oracle::random_set(gen, 10, 5);
  EXPECT_EQ(sampling::gaussian_perturb(s, 0.0, {1, 0}), s);
  EXPECT_THROW(sampling::gaussian_perturb(s, -1.0, {1, 0}), Error);
}

TEST(Perturb, DisplacementMatchesChiMean) {
  const std::size_t n = 10000;
  const std::size_t d = 128;
  const EmbeddingSet zero(std::vector<double>(n * d, 0.0), n, d);
  const double sigma = 0.3;
  const EmbeddingSet noisy = sampling::gaussian_perturb(zero, sigma, {12, 0});
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += oracle::dist(noisy.row(i), zero.row(i));
  const double mean = total / static_cast<double>(n);
  EXPECT_NEAR(mean / (sigma * std::sqrt(static_cast<double>(d))), 1.0, 0.05);
}

TEST(Perturb, SameStreamScalesWithSigma) {
  std::mt19937_64 gen(4);
  const EmbeddingSet s = oracle::random_set(gen, 20, 6);
  const EmbeddingSet a = sampling::gaussian_perturb(s, 0.1, {8, 0});
  const EmbeddingSet b = sampling::gaussian_perturb(s, 0.2, {8, 0});
  for (std::size_t i = 0; i < s.data().size(); ++i) {
    EXPECT_NEAR(b.data()[i] - s.data()[i], 2.0 * (a.data()[i] - s.data()[i]), 1e-12);
  }
}

TEST(Perturb, RecallNonIncreasingOverGrid) {
  const EmbeddingSet s = sampling::gaussian_clusters(10, 40, 32, 6.0, {6, 0});
  double previous = 1.0;
  for (int i = 0; i < 10; ++i) {
    const double sigma = std::pow(10.0, -2.0 + 2.0 * i / 9.0);
    std::vector<double> values;
    for (std::uint64_t j = 0; j < 3; ++j) {
      values.push_back(distances::knn_recall(
          s, sampling::gaussian_perturb(s, sigma, RngSeed{7, 0}.child(j)), 10));
    }
    std::sort(values.begin(), values.end());
    EXPECT_LE(values[1], previous + 1e-12) << "sigma " << sigma;
    previous = values[1];
  }
}

TEST(SplitHalves, PerClassFloor) {
  const EmbeddingSet s = indexed(35, 5);  // 7 per class
  const auto [a, b] = sampling::split_halves(s, {2, 0});
  for (const auto& [label, count] : class_counts(a)) EXPECT_EQ(count, 3u) << label;
  for (const auto& [label, count] : class_counts(b)) EXPECT_EQ(count, 4u) << label;
  auto all = ids(a);
  for (std::size_t i : ids(b)) EXPECT_TRUE(all.insert(i).second);
  const auto [u, v] = sampling::split_halves(indexed(9), {2, 0});
  EXPECT_EQ(u.rows(), 4u);
  EXPECT_EQ(v.rows(), 5u);
}

TEST(SubpopulationShift, RandomHalvesAtTenPercent) {
  const EmbeddingSet s = indexed(2000, 10);  // 200 per class
  const auto [ref, cand] = sampling::subpopulation_shift(s, 0.1, {3, 0});
  const auto rc = class_counts(ref);
  const auto cc = class_counts(cand);
  std::size_t reduced_ref = 0;
  std::size_t reduced_cand = 0;
  for (std::int64_t c = 0; c < 10; ++c) {
    const bool r = rc.at(c) == 10;
    const bool k = cc.at(c) == 10;
    EXPECT_NE(r, k) << "class " << c << " must be reduced on exactly one side";
    reduced_ref += r;
    reduced_cand += k;
  }
  EXPECT_EQ(reduced_ref, 5u);
  EXPECT_EQ(reduced_cand, 5u);
  for (std::size_t i : ids(ref)) EXPECT_EQ(ids(cand).count(i), 0u);
}

TEST(SubpopulationShift, ExplicitMixtures) {
  const EmbeddingSet s = indexed(400, 2);
  const auto [ref, cand] = sampling::subpopulation_shift(s, {{1.0, 1.0}}, {{0.1, 1.0}}, {1, 0});
  EXPECT_EQ(class_counts(ref).at(0), 100u);
  EXPECT_EQ(class_counts(cand).at(0), 10u);
  EXPECT_EQ(class_counts(cand).at(1), 100u);
}
