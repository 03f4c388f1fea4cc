#pragma once

#include <cmath>
#include <span>

namespace shiftscope::detail {

/// Neumaier compensated sum. Deterministic for a fixed insertion order.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) noexcept {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

inline double compensated_mean(std::span<const double> values) noexcept {
  return compensated_sum(values) / static_cast<double>(values.size());
}

}  // namespace shiftscope::detail
