/// @file sampling.hpp
/// @brief Seeded subsampling, synthetic shifts, synthetic clusters, noise.
///
/// Every function here is a pure function of its arguments and the RngSeed.

#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "shiftscope/embedding.hpp"
#include "shiftscope/rng.hpp"

namespace shiftscope {

/// Per-class keep fractions in [0,1], indexed by label. Not a probability
/// vector: 1.0 keeps every point of that class.
struct ClassMixture {
  std::vector<double> fractions;

  void validate() const;
};

namespace sampling {

/// m distinct indices out of [0, n), uniformly without replacement, in draw
/// order. Throws SampleTooLarge when m > n.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, const RngSeed& rng);

EmbeddingSet subsample(const EmbeddingSet& set, std::size_t m, const RngSeed& rng);

/// Two size-m samples sharing no row. Requires 2m <= n.
std::pair<EmbeddingSet, EmbeddingSet> disjoint_pair(const EmbeddingSet& set, std::size_t m,
                                                    const RngSeed& rng);

/// Keeps a uniform random ceil(fraction_c * count_c) points of every class c,
/// preserving the original row order of the kept points.
EmbeddingSet apply_class_mixture(const EmbeddingSet& set, const ClassMixture& mix,
                                 const RngSeed& rng);

/// Rows with labels in `classes_a` and rows with labels in `classes_b`.
/// The class sets must be disjoint and both outputs non-empty.
std::pair<EmbeddingSet, EmbeddingSet> domain_split(const EmbeddingSet& set,
                                                   const std::set<std::int64_t>& classes_a,
                                                   const std::set<std::int64_t>& classes_b);

/// Symmetric Dirichlet(concentration) draw rescaled so the largest fraction
/// is exactly 1. An infinite concentration yields all ones (no shift).
ClassMixture dirichlet_mixture(std::size_t num_classes, double concentration, const RngSeed& rng);

/// Class c ~ N(separation * e_{c mod d}, I_d); rows are grouped by class.
EmbeddingSet gaussian_clusters(std::size_t num_classes, std::size_t per_class, std::size_t dim,
                               double separation, const RngSeed& rng);

/// Adds i.i.d. N(0, sigma^2) noise to every coordinate; rows are not
/// re-normalized and keep their index. For a fixed `rng` the noise is
/// sigma * Z with the same Z for every sigma.
EmbeddingSet gaussian_perturb(const EmbeddingSet& set, double sigma, const RngSeed& rng);

/// Random partition into two halves. Unlabeled sets give floor(n/2) rows to
/// the first half; labeled sets are split per class (floor(count_c/2) to the
/// first half) so both halves keep the class balance.
std::pair<EmbeddingSet, EmbeddingSet> split_halves(const EmbeddingSet& set, const RngSeed& rng);

/// Number of classes (max label + 1). Throws LabelsRequired when unlabeled.
std::size_t num_classes(const EmbeddingSet& set);

/// Class proportions of a labeled set over `classes` labels.
std::vector<double> class_proportions(const EmbeddingSet& set, std::size_t classes);

/// Subpopulation shift: the labels are randomly divided into two groups;
/// the reference keeps group A at `fraction`, the candidate keeps group B at
/// `fraction`. The input is first split into two disjoint halves.
std::pair<EmbeddingSet, EmbeddingSet> subpopulation_shift(const EmbeddingSet& set,
                                                          double fraction,
                                                          const RngSeed& rng);

/// Same as above with explicit per-class fractions for each side.
std::pair<EmbeddingSet, EmbeddingSet> subpopulation_shift(const EmbeddingSet& set,
                                                          const ClassMixture& reference_mix,
                                                          const ClassMixture& candidate_mix,
                                                          const RngSeed& rng);

}  // namespace sampling
}  // namespace shiftscope
