/// @file distances.hpp
/// @brief Euclidean distance kernels, energy statistics and kNN recall.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shiftscope/embedding.hpp"

namespace shiftscope {

/// Dense row-major matrix of Euclidean distances between the rows of two
/// sets. `square_self` marks a set-against-itself matrix (symmetric, zero
/// diagonal).
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool square_self = false;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values.data() + i * cols, cols};
  }
};

/// Per-row k nearest columns, ascending distance, ties to the lower index.
struct NeighborIndex {
  std::size_t rows = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::span<const std::size_t> neighbors(std::size_t i) const noexcept {
    return {indices.data() + i * k, k};
  }
  std::span<const double> neighbor_distances(std::size_t i) const noexcept {
    return {distances.data() + i * k, k};
  }
};

namespace distances {

/// Reference kernel. Symmetric bit-for-bit: euclidean(a,b) == euclidean(b,a).
double euclidean(std::span<const double> a, std::span<const double> b);

DistanceMatrix pairwise_euclidean(const EmbeddingSet& a, const EmbeddingSet& b);
/// Self-distance matrix with an exact zero diagonal and mirrored entries.
DistanceMatrix pairwise_euclidean(const EmbeddingSet& a);

/// k smallest columns per row. With `exclude_self` the matrix must be square
/// and column i is skipped for row i.
NeighborIndex knn(const DistanceMatrix& dist, std::size_t k, bool exclude_self);

/// Exact kNN of every row of `set` among the other rows of `set`, computed
/// row by row without materializing the n x n matrix.
NeighborIndex self_knn(const EmbeddingSet& set, std::size_t k);

/// Squared energy distance with V-statistic within-set means:
///   2 mean|x-y| - mean|x-x'| - mean|y-y'|
/// Symmetric in its arguments bit-for-bit.
double energy_statistic(const EmbeddingSet& x, const EmbeddingSet& y);

enum class LocalEnergyVariant {
  /// Neighborhood restriction on the cross terms only; within-set terms are
  /// full V-statistic means.
  kCrossLocal,
  /// Within-set terms also restricted to each point's k nearest neighbors in
  /// its own set (self excluded).
  kAllLocal,
};

/// Local energy statistic: each point's mean distance to its k nearest
/// neighbors in the other set, averaged per side and summed, minus the
/// within-set terms. Requires 1 <= k <= min(|x|, |y|).
double local_energy_statistic(const EmbeddingSet& x, const EmbeddingSet& y, std::size_t k,
                              LocalEnergyVariant variant = LocalEnergyVariant::kCrossLocal);

/// Mean over points of |N_k^ref(i) ∩ N_k^eval(i)| / k, self excluded on both
/// sides. Row i of `evaluation` must be the transformed row i of `reference`.
double knn_recall(const EmbeddingSet& reference, const EmbeddingSet& evaluation, std::size_t k);
/// Same with precomputed neighbor sets (both from self_knn with the same k).
double knn_recall(const NeighborIndex& reference, const NeighborIndex& evaluation);

}  // namespace distances
}  // namespace shiftscope
