#pragma once

#include <string>
#include <variant>
#include <vector>

namespace attn {

struct PowerCost {
  double p;
  double k;
};

// Monotone cubic (PCHIP) interpolation of knot samples of c'.
class TabulatedCost {
 public:
  // q must start at 0, end at 1 and increase strictly; dcost must start at 0,
  // increase strictly and end at a value >= 1.
  TabulatedCost(std::vector<double> q, std::vector<double> dcost);

  const std::vector<double>& knots() const { return q_; }
  const std::vector<double>& samples() const { return y_; }

  double cost(double q) const;
  double derivative(double q) const;
  double second_derivative(double q) const;
  double inverse_derivative(double x) const;
  // Integral of c'(u)/u over [0, q].
  double derivative_over_u_integral(double q) const;

 private:
  std::size_t segment(double q) const;
  double segment_quotient_integral(double lo, double hi) const;

  std::vector<double> q_, y_, m_;
  std::vector<double> cost_at_knot_, quotient_at_knot_;
};

class CostModel {
 public:
  static CostModel power(double p, double k);
  static CostModel tabulated(std::vector<double> q, std::vector<double> dcost);

  bool is_power() const { return std::holds_alternative<PowerCost>(kind_); }
  const PowerCost* as_power() const { return std::get_if<PowerCost>(&kind_); }
  const TabulatedCost* as_tabulated() const { return std::get_if<TabulatedCost>(&kind_); }

  double cost(double q) const;
  double derivative(double q) const;
  // zeta = inverse of c'.
  double zeta(double x) const;
  double zeta_derivative(double x) const;
  // x zeta'(x) / zeta(x), for x > 0.
  double zeta_elasticity(double x) const;
  // Integral of log zeta over [0, s], with the 0 log 0 = 0 convention.
  double log_zeta_integral(double s) const;
  // Integral of c'(u)/u over [0, q].
  double derivative_over_u_integral(double q) const;

 private:
  explicit CostModel(std::variant<PowerCost, TabulatedCost> kind) : kind_(std::move(kind)) {}
  std::variant<PowerCost, TabulatedCost> kind_;
};

// Messages for every violated invariant of Power(p, k); empty when valid.
std::vector<std::string> power_cost_violations(double p, double k);

double cost_eval(const CostModel& model, double q);
double zeta(const CostModel& model, double x);

}  // namespace attn
