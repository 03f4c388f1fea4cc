#include "shiftscope/distances.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <utility>

#include "shiftscope/error.hpp"
#include "summation.hpp"

namespace shiftscope::distances {

namespace {

inline double squared_distance(const double* a, const double* b, std::size_t d) noexcept {
  double s = 0.0;
#pragma omp simd reduction(+ : s)
  for (std::size_t k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// One row of `a` against four consecutive rows of `b` (row stride d).
inline void squared_distance_x4(const double* a, const double* b, std::size_t d,
                                double* out) noexcept {
  const double* b0 = b;
  const double* b1 = b + d;
  const double* b2 = b + 2 * d;
  const double* b3 = b + 3 * d;
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
#pragma omp simd reduction(+ : s0, s1, s2, s3)
  for (std::size_t k = 0; k < d; ++k) {
    const double v = a[k];
    const double t0 = v - b0[k];
    const double t1 = v - b1[k];
    const double t2 = v - b2[k];
    const double t3 = v - b3[k];
    s0 += t0 * t0;
    s1 += t1 * t1;
    s2 += t2 * t2;
    s3 += t3 * t3;
  }
  out[0] = s0;
  out[1] = s1;
  out[2] = s2;
  out[3] = s3;
}

// Two rows of `a` (stride d) against four consecutive rows of `b`.
inline void squared_distance_2x4(const double* a, const double* b, std::size_t d,
                                 double* out0, double* out1) noexcept {
  const double* a0 = a;
  const double* a1 = a + d;
  const double* b0 = b;
  const double* b1 = b + d;
  const double* b2 = b + 2 * d;
  const double* b3 = b + 3 * d;
  double s00 = 0.0, s01 = 0.0, s02 = 0.0, s03 = 0.0;
  double s10 = 0.0, s11 = 0.0, s12 = 0.0, s13 = 0.0;
#pragma omp simd reduction(+ : s00, s01, s02, s03, s10, s11, s12, s13)
  for (std::size_t k = 0; k < d; ++k) {
    const double u = a0[k];
    const double v = a1[k];
    const double c0 = b0[k];
    const double c1 = b1[k];
    const double c2 = b2[k];
    const double c3 = b3[k];
    s00 += (u - c0) * (u - c0);
    s01 += (u - c1) * (u - c1);
    s02 += (u - c2) * (u - c2);
    s03 += (u - c3) * (u - c3);
    s10 += (v - c0) * (v - c0);
    s11 += (v - c1) * (v - c1);
    s12 += (v - c2) * (v - c2);
    s13 += (v - c3) * (v - c3);
  }
  out0[0] = s00;
  out0[1] = s01;
  out0[2] = s02;
  out0[3] = s03;
  out1[0] = s10;
  out1[1] = s11;
  out1[2] = s12;
  out1[3] = s13;
}

// Distances from rows a and a+d to rows [begin, end) of `b`.
void row_pair_distances(const double* a, const double* b, std::size_t begin, std::size_t end,
                        std::size_t d, double* out0, double* out1) noexcept {
  std::size_t j = begin;
  double* o0 = out0;
  double* o1 = out1;
  for (; j + 4 <= end; j += 4, o0 += 4, o1 += 4) {
    squared_distance_2x4(a, b + j * d, d, o0, o1);
    for (int t = 0; t < 4; ++t) {
      o0[t] = std::sqrt(o0[t]);
      o1[t] = std::sqrt(o1[t]);
    }
  }
  for (; j < end; ++j, ++o0, ++o1) {
    *o0 = std::sqrt(squared_distance(a, b + j * d, d));
    *o1 = std::sqrt(squared_distance(a + d, b + j * d, d));
  }
}

// Distances from row `a` to rows [begin, end) of `b`, written to out[0..).
void row_distances(const double* a, const double* b, std::size_t begin, std::size_t end,
                   std::size_t d, double* out) noexcept {
  std::size_t j = begin;
  double* o = out;
  for (; j + 4 <= end; j += 4, o += 4) {
    squared_distance_x4(a, b + j * d, d, o);
    o[0] = std::sqrt(o[0]);
    o[1] = std::sqrt(o[1]);
    o[2] = std::sqrt(o[2]);
    o[3] = std::sqrt(o[3]);
  }
  for (; j < end; ++j, ++o) *o = std::sqrt(squared_distance(a, b + j * d, d));
}

// Calls f(i, dists, first_col, count) for every row i of `a`, with dists[t]
// the distance to column first_col + t of `b`. With `upper` only columns
// j > i are visited (a and b are then the same set). Rows go in pairs
// through the blocked kernel; buffers are resized as needed.
template <class F>
void for_each_row(const double* a, std::size_t na, const double* b, std::size_t nb,
                  std::size_t d, bool upper, std::vector<double>& buf0,
                  std::vector<double>& buf1, F&& f) {
  buf0.resize(nb);
  buf1.resize(nb);
  std::size_t i = 0;
  for (; i + 2 <= na; i += 2) {
    const std::size_t first = upper ? i + 1 : 0;
    row_pair_distances(a + i * d, b, first, nb, d, buf0.data(), buf1.data());
    f(i, buf0.data(), first, nb - first);
    if (upper) {
      f(i + 1, buf1.data() + 1, first + 1, nb - first - 1);
    } else {
      f(i + 1, buf1.data(), first, nb - first);
    }
  }
  if (i < na) {
    const std::size_t first = upper ? i + 1 : 0;
    row_distances(a + i * d, b, first, nb, d, buf0.data());
    f(i, buf0.data(), first, nb - first);
  }
}

void require_same_dim(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimension, "dimension mismatch: " + std::to_string(a.dim()) +
                                           " vs " + std::to_string(b.dim()));
  }
}

// Fixed orientation for symmetric statistics so f(x,y) and f(y,x) run the
// exact same floating-point operations.
bool should_swap(const EmbeddingSet& x, const EmbeddingSet& y) {
  if (x.rows() != y.rows()) return y.rows() < x.rows();
  const auto dx = x.data();
  const auto dy = y.data();
  return std::lexicographical_compare(dy.begin(), dy.end(), dx.begin(), dx.end());
}

// Sum over unordered pairs i<j of |x_i - x_j|.
double within_pair_sum(const EmbeddingSet& x, std::vector<double>& buffer) {
  const double* base = x.data().data();
  std::vector<double> second;
  detail::CompensatedSum total;
  for_each_row(base, x.rows(), base, x.rows(), x.dim(), true, buffer, second,
               [&](std::size_t, const double* dist, std::size_t, std::size_t count) {
                 double row = 0.0;
                 for (std::size_t t = 0; t < count; ++t) row += dist[t];
                 total.add(row);
               });
  return total.value();
}

// V-statistic mean over all n^2 ordered pairs, self pairs included.
double within_mean(const EmbeddingSet& x, std::vector<double>& buffer) {
  const double n = static_cast<double>(x.rows());
  return 2.0 * within_pair_sum(x, buffer) / (n * n);
}

double cross_mean(const EmbeddingSet& x, const EmbeddingSet& y, std::vector<double>& buffer) {
  std::vector<double> second;
  detail::CompensatedSum total;
  for_each_row(x.data().data(), x.rows(), y.data().data(), y.rows(), x.dim(), false, buffer,
               second, [&](std::size_t, const double* dist, std::size_t, std::size_t count) {
                 double row = 0.0;
                 for (std::size_t t = 0; t < count; ++t) row += dist[t];
                 total.add(row);
               });
  return total.value() / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
}

// Ascending (distance, index) order: the tie-break rule used by every kNN.
struct Candidate {
  double distance;
  std::size_t index;
  bool operator<(const Candidate& o) const noexcept {
    return distance < o.distance || (distance == o.distance && index < o.index);
  }
};

// Writes the k best of `candidates` (in order) to the output row.
void take_k(std::vector<Candidate>& candidates, std::size_t k, std::size_t* indices,
            double* dists) {
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end());
  for (std::size_t t = 0; t < k; ++t) {
    indices[t] = candidates[t].index;
    dists[t] = candidates[t].distance;
  }
}

// Running k smallest values, kept sorted ascending; slot k-1 is the bound.
class SmallestK {
 public:
  SmallestK(std::size_t count, std::size_t k)
      : k_(k), values_(count * k, kInf) {}

  void offer(std::size_t slot, double v) noexcept {
    double* row = values_.data() + slot * k_;
    if (!(v < row[k_ - 1])) return;
    std::size_t pos = k_ - 1;
    while (pos > 0 && row[pos - 1] > v) {
      row[pos] = row[pos - 1];
      --pos;
    }
    row[pos] = v;
  }

  void reset() noexcept { std::fill(values_.begin(), values_.end(), kInf); }

  double sum(std::size_t slot) const noexcept {
    const double* row = values_.data() + slot * k_;
    double s = 0.0;
    for (std::size_t t = 0; t < k_; ++t) s += row[t];
    return s;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  std::size_t k_;
  std::vector<double> values_;
};

// Mean over rows of the mean distance to the k nearest other rows.
double local_within_mean(const EmbeddingSet& x, std::size_t k) {
  const NeighborIndex nn = self_knn(x, k);
  detail::CompensatedSum total;
  for (std::size_t i = 0; i < nn.rows; ++i) {
    double s = 0.0;
    for (double v : nn.neighbor_distances(i)) s += v;
    total.add(s / static_cast<double>(k));
  }
  return total.value() / static_cast<double>(nn.rows);
}

}  // namespace

double euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimension, "dimension mismatch in euclidean()");
  }
  return std::sqrt(squared_distance(a.data(), b.data(), a.size()));
}

DistanceMatrix pairwise_euclidean(const EmbeddingSet& a, const EmbeddingSet& b) {
  require_same_dim(a, b);
  DistanceMatrix out{a.rows(), b.rows(), false, std::vector<double>(a.rows() * b.rows())};
  for (std::size_t i = 0; i < a.rows(); ++i) {
    row_distances(a.row(i).data(), b.data().data(), 0, b.rows(), a.dim(),
                  out.values.data() + i * out.cols);
  }
  return out;
}

DistanceMatrix pairwise_euclidean(const EmbeddingSet& a) {
  const std::size_t n = a.rows();
  DistanceMatrix out{n, n, true, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double* row = out.values.data() + i * n;
    row_distances(a.row(i).data(), a.data().data(), i + 1, n, a.dim(), row + i + 1);
    for (std::size_t j = i + 1; j < n; ++j) out.values[j * n + i] = row[j];
  }
  return out;
}

NeighborIndex knn(const DistanceMatrix& dist, std::size_t k, bool exclude_self) {
  if (exclude_self && dist.rows != dist.cols) {
    throw Error(ErrorCode::kInvalidArgument, "exclude_self needs a square self-distance matrix");
  }
  const std::size_t available = dist.cols - (exclude_self ? 1 : 0);
  if (k == 0 || k > available) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " but only " +
                                           std::to_string(available) + " candidates per row");
  }
  NeighborIndex out{dist.rows, k, std::vector<std::size_t>(dist.rows * k),
                    std::vector<double>(dist.rows * k)};
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < dist.rows; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < dist.cols; ++j) {
      if (exclude_self && j == i) continue;
      candidates.push_back({dist(i, j), j});
    }
    take_k(candidates, k, out.indices.data() + i * k, out.distances.data() + i * k);
  }
  return out;
}

NeighborIndex self_knn(const EmbeddingSet& set, std::size_t k) {
  const std::size_t n = set.rows();
  if (k == 0 || k >= n) {
    throw Error(ErrorCode::kKTooLarge, "k=" + std::to_string(k) + " needs at least k+1 rows, set has " +
                                           std::to_string(n));
  }
  const std::size_t d = set.dim();
  NeighborIndex out{n, k, std::vector<std::size_t>(n * k), std::vector<double>(n * k)};
  std::vector<double> buffer;
  std::vector<double> second;
  std::vector<Candidate> candidates(n - 1);
  const double* base = set.data().data();
  for_each_row(base, n, base, n, d, false, buffer, second,
               [&](std::size_t i, const double* dist, std::size_t, std::size_t) {
                 std::size_t c = 0;
                 for (std::size_t j = 0; j < n; ++j) {
                   if (j != i) candidates[c++] = {dist[j], j};
                 }
                 // nth_element first: only the k best need ordering.
                 const auto kth = candidates.begin() + static_cast<std::ptrdiff_t>(k - 1);
                 std::nth_element(candidates.begin(), kth, candidates.end());
                 std::sort(candidates.begin(), kth + 1);
                 for (std::size_t t = 0; t < k; ++t) {
                   out.indices[i * k + t] = candidates[t].index;
                   out.distances[i * k + t] = candidates[t].distance;
                 }
               });
  return out;
}

double energy_statistic(const EmbeddingSet& x_in, const EmbeddingSet& y_in) {
  require_same_dim(x_in, y_in);
  const bool swap = should_swap(x_in, y_in);
  const EmbeddingSet& x = swap ? y_in : x_in;
  const EmbeddingSet& y = swap ? x_in : y_in;
  std::vector<double> buffer;
  const double cross = cross_mean(x, y, buffer);
  const double wx = within_mean(x, buffer);
  const double wy = within_mean(y, buffer);
  return 2.0 * cross - (wx + wy);
}

double local_energy_statistic(const EmbeddingSet& x_in, const EmbeddingSet& y_in, std::size_t k,
                              LocalEnergyVariant variant) {
  require_same_dim(x_in, y_in);
  if (k == 0 || k > std::min(x_in.rows(), y_in.rows())) {
    throw Error(ErrorCode::kKTooLarge,
                "local energy k=" + std::to_string(k) + " exceeds min set size " +
                    std::to_string(std::min(x_in.rows(), y_in.rows())));
  }
  const bool swap = should_swap(x_in, y_in);
  const EmbeddingSet& x = swap ? y_in : x_in;
  const EmbeddingSet& y = swap ? x_in : y_in;
  const std::size_t n = x.rows();
  const std::size_t m = y.rows();
  const std::size_t d = x.dim();

  // One pass over the cross distances feeds both directions: row-wise
  // selection for x -> N_k(x) in Y and running column minima for y -> N_k(y)
  // in X.
  std::vector<double> buffer;
  std::vector<double> second;
  SmallestK columns(m, k);
  SmallestK row(1, k);
  detail::CompensatedSum x_side;
  for_each_row(x.data().data(), n, y.data().data(), m, d, false, buffer, second,
               [&](std::size_t, const double* dist, std::size_t, std::size_t) {
                 row.reset();
                 for (std::size_t j = 0; j < m; ++j) {
                   columns.offer(j, dist[j]);
                   row.offer(0, dist[j]);
                 }
                 x_side.add(row.sum(0) / static_cast<double>(k));
               });
  detail::CompensatedSum y_side;
  for (std::size_t j = 0; j < m; ++j) y_side.add(columns.sum(j) / static_cast<double>(k));

  const double cross = x_side.value() / static_cast<double>(n) +
                       y_side.value() / static_cast<double>(m);
  double within = 0.0;
  if (variant == LocalEnergyVariant::kCrossLocal) {
    within = within_mean(x, buffer) + within_mean(y, buffer);
  } else {
    if (k >= n || k >= m) {
      throw Error(ErrorCode::kKTooLarge, "all-local variant needs k < both set sizes");
    }
    within = local_within_mean(x, k) + local_within_mean(y, k);
  }
  return cross - within;
}

double knn_recall(const NeighborIndex& reference, const NeighborIndex& evaluation) {
  if (reference.rows != evaluation.rows || reference.k != evaluation.k) {
    throw Error(ErrorCode::kIndexPairing, "neighbor indexes differ in size or k");
  }
  const std::size_t k = reference.k;
  detail::CompensatedSum total;
  std::vector<std::size_t> a(k);
  std::vector<std::size_t> b(k);
  for (std::size_t i = 0; i < reference.rows; ++i) {
    const auto ra = reference.neighbors(i);
    const auto rb = evaluation.neighbors(i);
    std::copy(ra.begin(), ra.end(), a.begin());
    std::copy(rb.begin(), rb.end(), b.begin());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t shared = 0;
    for (std::size_t p = 0, q = 0; p < k && q < k;) {
      if (a[p] == b[q]) {
        ++shared;
        ++p;
        ++q;
      } else if (a[p] < b[q]) {
        ++p;
      } else {
        ++q;
      }
    }
    total.add(static_cast<double>(shared) / static_cast<double>(k));
  }
  return total.value() / static_cast<double>(reference.rows);
}

double knn_recall(const EmbeddingSet& reference, const EmbeddingSet& evaluation, std::size_t k) {
  if (reference.rows() != evaluation.rows()) {
    throw Error(ErrorCode::kIndexPairing,
                "kNN recall needs index-paired sets, got " + std::to_string(reference.rows()) +
                    " and " + std::to_string(evaluation.rows()) + " rows");
  }
  if (k == 0 || k >= reference.rows()) {
    throw Error(ErrorCode::kKTooLarge, "kNN recall needs 1 <= k < n");
  }
  return knn_recall(self_knn(reference, k), self_knn(evaluation, k));
}

}  // namespace shiftscope::distances
