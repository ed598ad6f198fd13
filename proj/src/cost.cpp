#include "attn/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attn/errors.hpp"
#include "attn/io.hpp"

namespace attn {

namespace {

constexpr int kBisectionCap = 200;
constexpr double kQuadratureTol = 1e-10;

void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError(std::string(what) + " must lie in [0,1], got " + format_double(x));
}

// Fritsch-Carlson end-point slope (three-point, shape preserving).
double edge_slope(double h0, double h1, double d0, double d1) {
  double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if (std::signbit(m) != std::signbit(d0) || m == 0.0) return 0.0;
  if (std::signbit(d0) != std::signbit(d1) && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
  return m;
}

struct Simpson {
  double a, b, fa, fm, fb, whole;
};

}  // namespace

TabulatedCost::TabulatedCost(std::vector<double> q, std::vector<double> dcost)
    : q_(std::move(q)), y_(std::move(dcost)) {
  std::vector<std::string> errs;
  if (q_.size() < 2) errs.push_back("tabulated cost needs at least two knots");
  if (q_.size() != y_.size()) errs.push_back("tabulated q and dcost lengths differ");
  if (!errs.empty()) throw ConfigError(errs);
  for (std::size_t i = 0; i < q_.size(); ++i)
    if (!std::isfinite(q_[i]) || !std::isfinite(y_[i]))
      throw ConfigError("tabulated cost knots must be finite");
  if (q_.front() != 0.0) errs.push_back("tabulated q must start at 0");
  if (q_.back() != 1.0) errs.push_back("tabulated q must end at 1");
  if (y_.front() != 0.0) errs.push_back("tabulated c'(0) must be 0");
  for (std::size_t i = 1; i < q_.size(); ++i) {
    if (!(q_[i] > q_[i - 1])) errs.push_back("tabulated q must increase strictly");
    if (!(y_[i] > y_[i - 1])) errs.push_back("tabulated c' must increase strictly (non-invertible)");
  }
  if (y_.back() < 1.0) errs.push_back("c'(1)=" + format_double(y_.back()) + " < 1");
  if (!errs.empty()) {
    errs.erase(std::unique(errs.begin(), errs.end()), errs.end());
    throw ConfigError(errs);
  }

  const std::size_t n = q_.size();
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = q_[i + 1] - q_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = d[0];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) continue;
      double w1 = 2.0 * h[i] + h[i - 1];
      double w2 = h[i] + 2.0 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
    m_[0] = edge_slope(h[0], h[1], d[0], d[1]);
    m_[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }

  cost_at_knot_.assign(n, 0.0);
  quotient_at_knot_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double mid = derivative(0.5 * (q_[i] + q_[i + 1]));
    cost_at_knot_[i + 1] = cost_at_knot_[i] + h[i] / 6.0 * (y_[i] + 4.0 * mid + y_[i + 1]);
    quotient_at_knot_[i + 1] =
        quotient_at_knot_[i] + segment_quotient_integral(q_[i], q_[i + 1]);
  }
}

std::size_t TabulatedCost::segment(double q) const {
  auto it = std::upper_bound(q_.begin(), q_.end(), q);
  std::size_t i = it == q_.begin() ? 0 : static_cast<std::size_t>(it - q_.begin()) - 1;
  return std::min(i, q_.size() - 2);
}

double TabulatedCost::derivative(double q) const {
  require_unit(q, "quality");
  std::size_t i = segment(q);
  double h = q_[i + 1] - q_[i];
  double t = (q - q_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
}

double TabulatedCost::second_derivative(double q) const {
  require_unit(q, "quality");
  std::size_t i = segment(q);
  double h = q_[i + 1] - q_[i];
  double t = (q - q_[i]) / h;
  double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (3 * t2 - 4 * t + 1) * h * m_[i] +
          (-6 * t2 + 6 * t) * y_[i + 1] + (3 * t2 - 2 * t) * h * m_[i + 1]) /
         h;
}

double TabulatedCost::cost(double q) const {
  require_unit(q, "quality");
  std::size_t i = segment(q);
  double a = q_[i];
  double w = q - a;
  // Simpson's rule is exact on the cubic segment.
  return cost_at_knot_[i] + w / 6.0 * (y_[i] + 4.0 * derivative(a + 0.5 * w) + derivative(q));
}

double TabulatedCost::inverse_derivative(double x) const {
  require_unit(x, "trial probability");
  if (x == 0.0) return 0.0;
  auto it = std::upper_bound(y_.begin(), y_.end(), x);
  std::size_t i = it == y_.begin() ? 0 : static_cast<std::size_t>(it - y_.begin()) - 1;
  i = std::min(i, y_.size() - 2);
  double lo = q_[i], hi = q_[i + 1];
  for (int iter = 0; iter < kBisectionCap; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    double f = derivative(mid) - x;
    if (f == 0.0) return mid;
    (f < 0.0 ? lo : hi) = mid;
  }
  double mid = 0.5 * (lo + hi);
  double residual = std::abs(derivative(mid) - x);
  if (residual > 1e-12) throw NumericError("bisection for zeta did not converge", residual);
  return mid;
}

double TabulatedCost::segment_quotient_integral(double lo, double hi) const {
  if (hi <= lo) return 0.0;
  auto f = [&](double u) { return u == 0.0 ? m_[0] : derivative(u) / u; };
  auto make = [&](double a, double b, double fa, double fb) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    return Simpson{a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb)};
  };
  double budget = kQuadratureTol * (hi - lo);
  double worst = 0.0;
  double total = 0.0;
  std::vector<std::pair<Simpson, int>> stack{{make(lo, hi, f(lo), f(hi)), 0}};
  while (!stack.empty()) {
    auto [s, depth] = stack.back();
    stack.pop_back();
    double m = 0.5 * (s.a + s.b);
    Simpson left = make(s.a, m, s.fa, s.fm);
    Simpson right = make(m, s.b, s.fm, s.fb);
    double diff = left.whole + right.whole - s.whole;
    double tol = budget * (s.b - s.a) / (hi - lo);
    if (std::abs(diff) <= 15.0 * tol || depth >= 50) {
      if (std::abs(diff) > 15.0 * tol) worst = std::max(worst, std::abs(diff) / 15.0);
      total += left.whole + right.whole + diff / 15.0;
      continue;
    }
    stack.push_back({right, depth + 1});
    stack.push_back({left, depth + 1});
  }
  if (worst > kQuadratureTol)
    throw NumericError("adaptive Simpson did not reach tolerance", worst);
  return total;
}

double TabulatedCost::derivative_over_u_integral(double q) const {
  require_unit(q, "quality");
  std::size_t i = segment(q);
  return quotient_at_knot_[i] + segment_quotient_integral(q_[i], q);
}

CostModel CostModel::power(double p, double k) {
  auto errs = power_cost_violations(p, k);
  if (!errs.empty()) throw ConfigError(errs);
  return CostModel(PowerCost{p, k});
}

CostModel CostModel::tabulated(std::vector<double> q, std::vector<double> dcost) {
  return CostModel(TabulatedCost(std::move(q), std::move(dcost)));
}

std::vector<std::string> power_cost_violations(double p, double k) {
  std::vector<std::string> errs;
  if (!(std::isfinite(p) && p > 0.0)) errs.push_back("p must be > 0, got " + format_double(p));
  if (!(std::isfinite(k) && k > 1.0)) errs.push_back("k must be > 1, got " + format_double(k));
  if (errs.empty() && k * p < 1.0) errs.push_back("c′(1)=" + format_double(k * p) + " < 1");
  return errs;
}

double CostModel::cost(double q) const {
  if (const auto* pw = as_power()) {
    require_unit(q, "quality");
    return pw->p * std::pow(q, pw->k);
  }
  return as_tabulated()->cost(q);
}

double CostModel::derivative(double q) const {
  if (const auto* pw = as_power()) {
    require_unit(q, "quality");
    return pw->k * pw->p * std::pow(q, pw->k - 1.0);
  }
  return as_tabulated()->derivative(q);
}

double CostModel::zeta(double x) const {
  if (const auto* pw = as_power()) {
    require_unit(x, "trial probability");
    return std::pow(x / (pw->k * pw->p), 1.0 / (pw->k - 1.0));
  }
  return as_tabulated()->inverse_derivative(x);
}

double CostModel::zeta_derivative(double x) const {
  if (const auto* pw = as_power()) {
    require_unit(x, "trial probability");
    if (x > 0.0) return zeta(x) / ((pw->k - 1.0) * x);
    if (pw->k < 2.0) return 0.0;
    if (pw->k == 2.0) return 1.0 / (2.0 * pw->p);
    return std::numeric_limits<double>::infinity();
  }
  double z = as_tabulated()->inverse_derivative(x);
  return 1.0 / as_tabulated()->second_derivative(z);
}

double CostModel::zeta_elasticity(double x) const {
  if (!(x > 0.0)) throw DomainError("elasticity needs x > 0");
  if (const auto* pw = as_power()) return 1.0 / (pw->k - 1.0);
  double z = as_tabulated()->inverse_derivative(x);
  return x / (z * as_tabulated()->second_derivative(z));
}

double CostModel::log_zeta_integral(double s) const {
  require_unit(s, "trial probability");
  if (s == 0.0) return 0.0;
  if (const auto* pw = as_power())
    return (s * std::log(s) - s - s * std::log(pw->k * pw->p)) / (pw->k - 1.0);
  double z = as_tabulated()->inverse_derivative(s);
  return s * std::log(z) - as_tabulated()->derivative_over_u_integral(z);
}

double CostModel::derivative_over_u_integral(double q) const {
  if (const auto* pw = as_power()) {
    require_unit(q, "quality");
    return pw->k * pw->p * std::pow(q, pw->k - 1.0) / (pw->k - 1.0);
  }
  return as_tabulated()->derivative_over_u_integral(q);
}

double cost_eval(const CostModel& model, double q) { return model.cost(q); }
double zeta(const CostModel& model, double x) { return model.zeta(x); }

}  // namespace attn
