#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attn {

// Nonnegative vector whose entries sum to 1.
class SimplexPoint {
 public:
  static constexpr double kSumTolerance = 1e-9;
  static constexpr double kRenormalizeLimit = 1e-6;

  // Accepts entries whose sum is within 1e-6 of 1 and renormalizes them.
  explicit SimplexPoint(std::vector<double> entries);

  // Normalizes arbitrary nonnegative weights. Throws DegenerateMarketError
  // when every weight is zero.
  static SimplexPoint normalized(std::vector<double> weights);

  // Softmax of log-weights with max subtraction; -inf maps to an exact zero.
  static SimplexPoint from_log_weights(std::span<const double> log_weights);

  static SimplexPoint uniform(std::size_t n);

  std::size_t dim() const { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  const std::vector<double>& values() const { return x_; }
  std::span<const double> span() const { return x_; }
  auto begin() const { return x_.begin(); }
  auto end() const { return x_.end(); }

  bool interior() const;
  double min_entry() const;

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  SimplexPoint() = default;
  std::vector<double> x_;
};

double max_abs_diff(std::span<const double> a, std::span<const double> b);
double l1_distance(std::span<const double> a, std::span<const double> b);

// log with the numerical floor used throughout the engine.
double safe_log(double x);
inline constexpr double kLogFloor = 1e-300;

}  // namespace attn
