#pragma once

#include <cmath>
#include <cstddef>

namespace lqnet {

// Welford accumulator. Feed values in a fixed order for reproducible output.
class RunningStat {
 public:
  void add(double value) {
    ++count_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (value - mean_);
  }

  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const {
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
  }
  // Standard error of the mean; zero when fewer than two samples.
  double standard_error() const {
    return count_ > 1 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
  }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Estimate {
  double estimate = 0.0;
  double se = 0.0;

  static Estimate of(const RunningStat& s) { return {s.mean(), s.standard_error()}; }

  // |estimate| <= k * se. A zero standard error requires an exact zero.
  bool within(double k) const { return std::abs(estimate) <= k * se; }
};

// Standard error of the difference of two independent estimates.
inline double combined_se(const Estimate& a, const Estimate& b) {
  return std::sqrt(a.se * a.se + b.se * b.se);
}

}  // namespace lqnet
