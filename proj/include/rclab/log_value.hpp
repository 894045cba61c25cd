#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace rclab {

/// Natural log of a positive scalar. Partition functions overflow doubles
/// long before the enumeration budgets are reached, so they live here.
struct LogValue {
  double log = -std::numeric_limits<double>::infinity();

  double value() const { return std::exp(log); }

  friend bool operator==(const LogValue&, const LogValue&) = default;
  friend auto operator<=>(const LogValue& a, const LogValue& b) { return a.log <=> b.log; }
};

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

/// Streaming log-sum-exp. Terms are summed relative to a running maximum;
/// the scale is only moved when a larger term arrives.
class LogSumExp {
 public:
  void add(double term) {
    if (term == -std::numeric_limits<double>::infinity()) return;
    if (term > max_) {
      sum_ = sum_ * std::exp(max_ - term) + 1.0;
      max_ = term;
    } else {
      sum_ += std::exp(term - max_);
    }
  }

  void merge(const LogSumExp& other) {
    if (other.sum_ == 0.0) return;
    if (sum_ == 0.0) {
      *this = other;
      return;
    }
    if (other.max_ > max_) {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    } else {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    }
  }

  double log() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

  LogValue result() const { return LogValue{log()}; }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// log(exp(a) + exp(b)) for exactly two terms, tolerant of +inf.
inline double lse2(double a, double b) {
  if (std::isinf(a) && a > 0) return a;
  if (std::isinf(b) && b > 0) return b;
  return log_add(a, b);
}

}  // namespace rclab
