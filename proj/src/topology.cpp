#include "shiftscope/topology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <iterator>
#include <numeric>
#include <unordered_map>

#include "shiftscope/distances.hpp"
#include "shiftscope/error.hpp"
#include "shiftscope/sampling.hpp"

namespace shiftscope {

void RipsConfig::validate() const {
  if (max_dimension < 0 || max_dimension > 1) {
    throw Error(ErrorCode::kConfig, "max_dimension must be 0 or 1");
  }
  if (max_edge_length && !(*max_edge_length > 0.0)) {
    throw Error(ErrorCode::kConfig, "max_edge_length must be positive");
  }
  if (h1_point_cap < 3) throw Error(ErrorCode::kConfig, "h1_point_cap must be at least 3");
}

namespace topology {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Full symmetric distance table through the reference kernel, so every
// entry is bit-identical to distances::euclidean on the same pair.
class DistanceTable {
 public:
  explicit DistanceTable(const EmbeddingSet& set) : n_(set.rows()), values_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double v = distances::euclidean(set.row(i), set.row(j));
        values_[i * n_ + j] = v;
        values_[j * n_ + i] = v;
      }
    }
  }
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }
  const double* row(std::size_t i) const noexcept { return values_.data() + i * n_; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

// Filtration key: diameter first, then combinatorial index.
struct Simplex {
  double diameter;
  std::uint64_t index;

  friend bool operator==(const Simplex&, const Simplex&) = default;
  bool operator<(const Simplex& o) const noexcept {
    return diameter < o.diameter || (diameter == o.diameter && index < o.index);
  }
  bool operator>(const Simplex& o) const noexcept { return o < *this; }
};

struct Edge {
  double diameter;
  std::uint64_t index;
  std::uint32_t i;  // i > j
  std::uint32_t j;
};

constexpr std::uint64_t choose2(std::uint64_t a) noexcept { return a * (a - 1) / 2; }
constexpr std::uint64_t choose3(std::uint64_t a) noexcept { return a * (a - 1) * (a - 2) / 6; }

std::uint64_t triangle_index(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept {
  if (a < b) std::swap(a, b);
  if (b < c) std::swap(b, c);
  if (a < b) std::swap(a, b);
  return choose3(a) + choose2(b) + c;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) noexcept {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Coboundary reduction of the edge columns, processed from the last edge in
// the filtration to the first. Edges already known to kill a component are
// cleared up front.
class H1Reducer {
 public:
  H1Reducer(const DistanceTable& dist, double threshold) : dist_(dist), threshold_(threshold) {}

  std::vector<PersistencePair> run() {
    const std::size_t n = dist_.size();
    std::vector<Edge> edges;
    for (std::uint32_t i = 1; i < n; ++i) {
      for (std::uint32_t j = 0; j < i; ++j) {
        const double d = dist_(i, j);
        if (d <= threshold_) edges.push_back({d, choose2(i) + j, i, j});
      }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
      return Simplex{a.diameter, a.index} < Simplex{b.diameter, b.index};
    });

    std::vector<Edge> columns;
    UnionFind components(n);
    for (const Edge& e : edges) {
      if (!components.unite(e.i, e.j)) columns.push_back(e);
    }
    edge_lookup_.reserve(columns.size());
    for (const Edge& e : columns) edge_lookup_.emplace(e.index, e);

    std::vector<PersistencePair> bars;
    for (auto it = columns.rbegin(); it != columns.rend(); ++it) reduce(*it, bars);
    std::sort(bars.begin(), bars.end(), [](const PersistencePair& a, const PersistencePair& b) {
      return a.birth < b.birth || (a.birth == b.birth && a.death < b.death);
    });
    return bars;
  }

 private:
  template <class F>
  void for_each_coface(const Edge& e, F&& f) const {
    const std::size_t n = dist_.size();
    const double* ri = dist_.row(e.i);
    const double* rj = dist_.row(e.j);
    for (std::uint32_t k = 0; k < n; ++k) {
      if (k == e.i || k == e.j) continue;
      const double dk = std::max(ri[k], rj[k]);
      if (dk > threshold_) continue;
      f(Simplex{std::max(e.diameter, dk), triangle_index(e.i, e.j, k)});
    }
  }

  // For a fixed edge the triangle index grows with the third vertex, so an
  // ascending scan with a strict comparison on the diameter already
  // resolves ties by index.
  std::optional<Simplex> smallest_coface(const Edge& e) const {
    const std::size_t n = dist_.size();
    const double* ri = dist_.row(e.i);
    const double* rj = dist_.row(e.j);
    double best = kInf;
    std::size_t best_k = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == e.i || k == e.j) continue;
      const double dk = std::max(ri[k], rj[k]);
      if (dk <= threshold_ && dk < best) {
        best = dk;
        best_k = k;
        if (dk <= e.diameter) break;
      }
    }
    if (best_k == n) return std::nullopt;
    return Simplex{std::max(e.diameter, best), triangle_index(e.i, e.j, best_k)};
  }

  // Working column as a min-heap of cofaces; equal entries cancel in pairs.
  void push_coboundary(const Edge& e) {
    for_each_coface(e, [&](const Simplex& s) {
      heap_.push_back(s);
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
    });
  }

  Simplex pop() {
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    const Simplex top = heap_.back();
    heap_.pop_back();
    return top;
  }

  std::optional<Simplex> pivot() {
    while (!heap_.empty()) {
      const Simplex top = pop();
      if (!heap_.empty() && heap_.front() == top) {
        pop();
        continue;
      }
      heap_.push_back(top);
      std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
      return top;
    }
    return std::nullopt;
  }

  void record(const Edge& e, double death, std::vector<PersistencePair>& bars) const {
    if (death > e.diameter) bars.push_back({e.diameter, death});
  }

  void reduce(const Edge& e, std::vector<PersistencePair>& bars) {
    // Fast path: the smallest coface is not yet claimed by another column.
    const std::optional<Simplex> first = smallest_coface(e);
    if (!first) {
      bars.push_back({e.diameter, kInf});
      return;
    }
    if (!pivot_owner_.contains(first->index)) {
      pivot_owner_.emplace(first->index, e.index);
      record(e, first->diameter, bars);
      return;
    }

    heap_.clear();
    push_coboundary(e);
    std::vector<std::uint64_t> combination{e.index};
    while (const std::optional<Simplex> p = pivot()) {
      const auto owner = pivot_owner_.find(p->index);
      if (owner == pivot_owner_.end()) {
        pivot_owner_.emplace(p->index, e.index);
        if (combination.size() > 1) combinations_.emplace(e.index, cancel_pairs(combination));
        record(e, p->diameter, bars);
        return;
      }
      const auto stored = combinations_.find(owner->second);
      if (stored == combinations_.end()) {
        push_coboundary(edge_lookup_.at(owner->second));
        combination.push_back(owner->second);
      } else {
        for (std::uint64_t f : stored->second) {
          push_coboundary(edge_lookup_.at(f));
          combination.push_back(f);
        }
      }
    }
    bars.push_back({e.diameter, kInf});
  }

  // Z/2 sum of edge ids: ids appearing an even number of times cancel.
  static std::vector<std::uint64_t> cancel_pairs(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size();) {
      std::size_t j = i;
      while (j < v.size() && v[j] == v[i]) ++j;
      if ((j - i) % 2 == 1) out.push_back(v[i]);
      i = j;
    }
    return out;
  }

  const DistanceTable& dist_;
  double threshold_;
  std::unordered_map<std::uint64_t, Edge> edge_lookup_;
  std::unordered_map<std::uint64_t, std::uint64_t> pivot_owner_;
  // Edge combinations of the columns that needed reduction; every other
  // column is its own coboundary.
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> combinations_;
  std::vector<Simplex> heap_;
};

void append_double(std::string& out, double v) {
  if (v == kInf) {
    out += "INF";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

PersistenceDiagram rips_h0(const EmbeddingSet& points) {
  const std::size_t n = points.rows();
  PersistenceDiagram out{0, {}};
  out.points.reserve(n);
  // Dense Prim: O(n^2) distance evaluations, no matrix kept.
  std::vector<double> best(n, kInf);
  std::vector<bool> in_tree(n, false);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = distances::euclidean(points.row(current), points.row(j));
      if (d < best[j]) best[j] = d;
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = true;
    out.points.push_back({0.0, best[next]});
    current = next;
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const PersistencePair& a, const PersistencePair& b) { return a.death < b.death; });
  out.points.push_back({0.0, kInf});
  return out;
}

double enclosing_radius(const EmbeddingSet& points) {
  const std::size_t n = points.rows();
  double radius = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    double far = 0.0;
    for (std::size_t j = 0; j < n && far < radius; ++j) {
      far = std::max(far, distances::euclidean(points.row(i), points.row(j)));
    }
    radius = std::min(radius, far);
  }
  return n == 1 ? 0.0 : radius;
}

PersistenceDiagram rips_h1(const EmbeddingSet& points, const RipsConfig& cfg) {
  cfg.validate();
  PersistenceDiagram out{1, {}};
  if (points.rows() < 3) return out;
  const EmbeddingSet cloud = points.rows() > cfg.h1_point_cap
                                 ? sampling::subsample(points, cfg.h1_point_cap, cfg.seed)
                                 : points;
  const DistanceTable dist(cloud);
  double threshold = 0.0;
  if (cfg.max_edge_length) {
    threshold = *cfg.max_edge_length;
  } else {
    threshold = kInf;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      const double* r = dist.row(i);
      threshold = std::min(threshold, *std::max_element(r, r + dist.size()));
    }
  }
  out.points = H1Reducer(dist, threshold).run();
  return out;
}

PersistenceDiagram drop_essential(const PersistenceDiagram& diagram) {
  PersistenceDiagram out{diagram.dimension, {}};
  for (const PersistencePair& p : diagram.points) {
    if (!p.essential()) out.points.push_back(p);
  }
  return out;
}

std::vector<PersistenceDiagram> rips_diagrams(const EmbeddingSet& points, const RipsConfig& cfg) {
  cfg.validate();
  std::vector<PersistenceDiagram> out{rips_h0(points)};
  if (cfg.max_dimension >= 1) out.push_back(rips_h1(points, cfg));
  return out;
}

double sliced_wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b,
                          std::size_t slices) {
  if (slices == 0) throw Error(ErrorCode::kInvalidArgument, "slices must be at least 1");
  for (const auto* diagram : {&a, &b}) {
    for (const PersistencePair& p : diagram->points) {
      if (!std::isfinite(p.death)) {
        throw Error(ErrorCode::kInfiniteBar, "sliced Wasserstein needs finite diagrams");
      }
    }
  }
  // Each side gets the diagonal projections of the other side's points.
  const std::size_t total = a.points.size() + b.points.size();
  std::vector<std::pair<double, double>> left;
  std::vector<std::pair<double, double>> right;
  left.reserve(total);
  right.reserve(total);
  for (const PersistencePair& p : a.points) {
    left.emplace_back(p.birth, p.death);
    const double mid = 0.5 * (p.birth + p.death);
    right.emplace_back(mid, mid);
  }
  for (const PersistencePair& p : b.points) {
    right.emplace_back(p.birth, p.death);
    const double mid = 0.5 * (p.birth + p.death);
    left.emplace_back(mid, mid);
  }
  if (total == 0) return 0.0;

  std::vector<double> pl(total);
  std::vector<double> pr(total);
  double sum = 0.0;
  for (std::size_t m = 0; m < slices; ++m) {
    const double theta = -std::numbers::pi / 2 +
                         (static_cast<double>(m) + 0.5) * std::numbers::pi /
                             static_cast<double>(slices);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (std::size_t t = 0; t < total; ++t) {
      pl[t] = left[t].first * c + left[t].second * s;
      pr[t] = right[t].first * c + right[t].second * s;
    }
    std::sort(pl.begin(), pl.end());
    std::sort(pr.begin(), pr.end());
    double l1 = 0.0;
    for (std::size_t t = 0; t < total; ++t) l1 += std::abs(pl[t] - pr[t]);
    sum += l1;
  }
  return sum / static_cast<double>(slices);
}

double swp_distance(const EmbeddingSet& x, const EmbeddingSet& y, const RipsConfig& cfg,
                    std::size_t slices) {
  if (x.dim() != y.dim()) throw Error(ErrorCode::kDimension, "dimension mismatch");
  const auto dx = rips_diagrams(x, cfg);
  const auto dy = rips_diagrams(y, cfg);
  double total = 0.0;
  for (std::size_t dim = 0; dim < dx.size(); ++dim) {
    total += sliced_wasserstein(drop_essential(dx[dim]), drop_essential(dy[dim]), slices);
  }
  return total;
}

std::string format_diagrams_csv(std::span<const PersistenceDiagram> diagrams) {
  std::string out = "dimension,birth,death\n";
  for (const PersistenceDiagram& d : diagrams) {
    for (const PersistencePair& p : d.points) {
      out += std::to_string(d.dimension);
      out += ',';
      append_double(out, p.birth);
      out += ',';
      append_double(out, p.death);
      out += '\n';
    }
  }
  return out;
}

}  // namespace topology
}  // namespace shiftscope
