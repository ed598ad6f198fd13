#include "attn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "attn/errors.hpp"

namespace attn {

namespace {
constexpr double kEpsilon = std::numeric_limits<double>::epsilon();
}

SimplexPoint::SimplexPoint(std::vector<double> entries) : x_(std::move(entries)) {
  if (x_.empty()) throw DomainError("simplex point must have at least one entry");
  double sum = 0.0;
  for (double e : x_) {
    if (!std::isfinite(e) || e < 0.0)
      throw DomainError("simplex entry must be finite and nonnegative, got " + std::to_string(e));
    sum += e;
  }
  if (std::abs(sum - 1.0) > kRenormalizeLimit)
    throw DomainError("simplex entries sum to " + std::to_string(sum) + ", expected 1");
  // Leave rounding-level sums alone so that parse/serialize round trips are stable.
  if (std::abs(sum - 1.0) > 4.0 * static_cast<double>(x_.size()) * kEpsilon)
    for (double& e : x_) e /= sum;
}

SimplexPoint SimplexPoint::normalized(std::vector<double> weights) {
  if (weights.empty()) throw DomainError("cannot normalize an empty weight vector");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw DomainError("weight must be finite and nonnegative, got " + std::to_string(w));
    sum += w;
  }
  if (!(sum > 0.0)) throw DegenerateMarketError("all weights are zero");
  if (!std::isfinite(sum)) throw DomainError("weight sum overflowed");
  SimplexPoint p;
  p.x_ = std::move(weights);
  for (double& e : p.x_) e /= sum;
  return p;
}

SimplexPoint SimplexPoint::from_log_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw DomainError("cannot normalize an empty weight vector");
  double top = -std::numeric_limits<double>::infinity();
  for (double l : log_weights) {
    if (std::isnan(l) || l == std::numeric_limits<double>::infinity())
      throw DomainError("log-weight must be finite or -inf");
    top = std::max(top, l);
  }
  if (top == -std::numeric_limits<double>::infinity())
    throw DegenerateMarketError("all weights are zero");
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
  return normalized(std::move(w));
}

SimplexPoint SimplexPoint::uniform(std::size_t n) {
  if (n == 0) throw DomainError("simplex point must have at least one entry");
  SimplexPoint p;
  p.x_.assign(n, 1.0 / static_cast<double>(n));
  return p;
}

bool SimplexPoint::interior() const {
  return std::all_of(x_.begin(), x_.end(), [](double e) { return e > 0.0; });
}

double SimplexPoint::min_entry() const { return *std::min_element(x_.begin(), x_.end()); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

}  // namespace attn
