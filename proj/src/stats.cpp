#include "shiftscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "shiftscope/error.hpp"
#include "summation.hpp"

namespace shiftscope {

const char* to_string(Decision d) noexcept { return d == Decision::kYes ? "yes" : "no"; }

namespace stats {

namespace {

// Sample variance (n-1 denominator) around a precomputed mean.
double sample_variance(std::span<const double> v, double mean) {
  detail::CompensatedSum s;
  for (double x : v) s.add((x - mean) * (x - mean));
  return s.value() / static_cast<double>(v.size() - 1);
}

}  // namespace

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kInsufficientSamples, "t-test needs at least two values per side");
  }
  WelchResult r;
  r.mean_a = detail::compensated_mean(a);
  r.mean_b = detail::compensated_mean(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double qa = sample_variance(a, r.mean_a) / na;
  const double qb = sample_variance(b, r.mean_b) / nb;
  const double se2 = qa + qb;
  const double diff = r.mean_a - r.mean_b;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.p = 0.0;
    }
    return r;
  }
  r.t = diff / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  const boost::math::students_t dist(r.df);
  r.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))), 0.0, 1.0);
  return r;
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInsufficientSamples, "percentile of empty array");
  if (!(q >= 0.0 && q <= 100.0)) throw Error(ErrorCode::kInvalidArgument, "q must be in [0,100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

FitScore fit_score(std::span<const Decision> decisions) {
  if (decisions.empty()) throw Error(ErrorCode::kInsufficientSamples, "no decisions to score");
  FitScore f;
  for (Decision d : decisions) (d == Decision::kYes ? f.yes : f.no) += 1;
  f.decision = f.yes >= f.no ? Decision::kYes : Decision::kNo;
  f.score = static_cast<double>(std::max(f.yes, f.no)) / static_cast<double>(decisions.size());
  return f;
}

}  // namespace stats
}  // namespace shiftscope
