/// @file topology.hpp
/// @brief Vietoris-Rips persistence diagrams and sliced Wasserstein distance.

#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shiftscope/embedding.hpp"
#include "shiftscope/rng.hpp"

namespace shiftscope {

struct PersistencePair {
  double birth = 0.0;
  double death = std::numeric_limits<double>::infinity();

  bool essential() const noexcept { return death == std::numeric_limits<double>::infinity(); }
  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
  int dimension = 0;
  std::vector<PersistencePair> points;
};

struct RipsConfig {
  /// 0 (components) or 1 (components and loops).
  int max_dimension = 1;
  /// Filtration cut-off; unset means the enclosing radius of the cloud.
  std::optional<double> max_edge_length;
  /// Larger clouds are subsampled to this many points before H1.
  std::size_t h1_point_cap = 400;
  /// Seed for the H1 subsample. Two clouds compared with the same seed and
  /// the same rows get identical subsamples.
  RngSeed seed{};

  void validate() const;
};

namespace topology {

/// H0 bars from the minimum spanning tree: n-1 pairs (0, w) in ascending w,
/// then the essential (0, inf).
PersistenceDiagram rips_h0(const EmbeddingSet& points);

/// H1 bars of the Rips filtration with non-zero persistence, sorted by
/// (birth, death). Clouds above cfg.h1_point_cap are subsampled first.
PersistenceDiagram rips_h1(const EmbeddingSet& points, const RipsConfig& cfg);

/// Smallest over points of the largest distance to any other point. At this
/// scale the Rips complex is a cone, so no loop survives past it.
double enclosing_radius(const EmbeddingSet& points);

PersistenceDiagram drop_essential(const PersistenceDiagram& diagram);

/// Diagrams for dimensions 0..cfg.max_dimension, essentials kept.
std::vector<PersistenceDiagram> rips_diagrams(const EmbeddingSet& points, const RipsConfig& cfg);

/// Mean over `slices` directions in [-pi/2, pi/2) (bin midpoints) of the L1
/// distance between sorted projections of the diagonally augmented diagrams.
/// Throws InfiniteBarError on an essential point.
double sliced_wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b,
                          std::size_t slices = 50);

/// Sum over dimensions of the sliced Wasserstein distance between the
/// diagrams of x and y, essentials dropped.
double swp_distance(const EmbeddingSet& x, const EmbeddingSet& y, const RipsConfig& cfg,
                    std::size_t slices = 50);

/// CSV with header dimension,birth,death; essential deaths are written INF.
std::string format_diagrams_csv(std::span<const PersistenceDiagram> diagrams);

}  // namespace topology
}  // namespace shiftscope
