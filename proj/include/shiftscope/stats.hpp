/// @file stats.hpp
/// @brief Welch t-test, percentiles and the fit score.

#pragma once

#include <cstddef>
#include <span>

namespace shiftscope {

enum class Decision { kNo, kYes };

const char* to_string(Decision d) noexcept;

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

struct FitScore {
  double score = 0.0;
  std::size_t yes = 0;
  std::size_t no = 0;
  /// Majority decision; an exact tie counts as Yes.
  Decision decision = Decision::kNo;
};

namespace stats {

/// Two-sided Welch unequal-variance t-test with Welch-Satterthwaite degrees
/// of freedom. Zero variance on both sides gives p = 1 for equal means and
/// p = 0 otherwise. Needs at least two values per side.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Linear interpolation between order statistics at rank q/100 * (n-1).
double percentile(std::span<const double> values, double q);

FitScore fit_score(std::span<const Decision> decisions);

}  // namespace stats
}  // namespace shiftscope
