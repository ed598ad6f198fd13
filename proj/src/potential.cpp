#include "attn/potential.hpp"

#include <cmath>
#include <limits>

#include "attn/errors.hpp"
#include "attn/parallel.hpp"

namespace attn {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check(const PotentialCoefficients& coef, std::size_t n, std::size_t n_costs) {
  if (coef.sigma.size() != n || n_costs != n) throw DomainError("dimension mismatch");
  for (double w : coef.sigma)
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("sigma must be positive and finite");
  if (!std::isfinite(coef.a) || !std::isfinite(coef.b))
    throw DomainError("potential coefficients must be finite");
}

std::size_t lattice_offset(int i, int R) { return static_cast<std::size_t>(i * (R + 1) - i * (i - 1) / 2); }

}  // namespace

PotentialCoefficients coefficients_for(const RankingPolicy& policy, double r) {
  MixedPolicy m = canonical(policy);
  return {m.mu.values(), r + m.alpha + m.beta, r + m.beta - 1.0};
}

double potential_value(const PotentialCoefficients& coef, std::span<const double> s,
                       std::span<const CostModel> costs) {
  check(coef, s.size(), costs.size());
  double total = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!(s[j] >= 0.0)) throw DomainError("potential argument must be nonnegative");
    double term = s[j] * std::log(coef.sigma[j]) + coef.b * xlogx(s[j]);
    if (coef.a != 0.0) term += coef.a * costs[j].log_zeta_integral(s[j]);
    total -= term;
  }
  return total;
}

double potential_value(const PotentialCoefficients& coef, const SimplexPoint& s,
                       std::span<const CostModel> costs) {
  return potential_value(coef, s.span(), costs);
}

std::vector<double> potential_gradient(const PotentialCoefficients& coef,
                                       std::span<const double> s,
                                       std::span<const CostModel> costs) {
  check(coef, s.size(), costs.size());
  std::vector<double> g(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!(s[j] > 0.0)) throw DomainError("gradient needs a strictly interior point");
    double lz = coef.a != 0.0 ? coef.a * std::log(costs[j].zeta(s[j])) : 0.0;
    g[j] = -(std::log(coef.sigma[j]) + lz + coef.b * (std::log(s[j]) + 1.0));
  }
  return g;
}

std::vector<double> potential_gradient(const PotentialCoefficients& coef, const SimplexPoint& s,
                                       std::span<const CostModel> costs) {
  return potential_gradient(coef, s.span(), costs);
}

PotentialDecomposition potential_decomposition(const PotentialCoefficients& coef,
                                               const SimplexPoint& s,
                                               std::span<const CostModel> costs) {
  check(coef, s.dim(), costs.size());
  PotentialDecomposition d{0.0, 0.0, 0.0, 0.0};
  for (std::size_t j = 0; j < s.dim(); ++j) {
    if (s[j] == 0.0) continue;
    double z = costs[j].zeta(s[j]);
    d.alignment += s[j] * (std::log(s[j]) - std::log(coef.sigma[j]));
    d.expected_log_quality += s[j] * std::log(z);
    d.entropy -= s[j] * std::log(s[j]);
    d.production_cost += costs[j].derivative_over_u_integral(z);
  }
  return d;
}

double recompose(const PotentialDecomposition& d, const PotentialCoefficients& coef) {
  return d.alignment - coef.a * d.expected_log_quality + (1.0 + coef.b) * d.entropy +
         coef.a * d.production_cost;
}

std::vector<bool> convexity_condition(const PotentialCoefficients& coef,
                                      std::span<const CostModel> costs, const SimplexPoint& s) {
  if (costs.size() != s.dim()) throw DomainError("dimension mismatch");
  // a s ζ' + b ζ = ζ (a e + b) with e the elasticity of ζ, and ζ > 0 inside.
  std::vector<bool> out(s.dim());
  for (std::size_t j = 0; j < s.dim(); ++j) {
    if (!(s[j] > 0.0)) throw DomainError("convexity condition needs an interior point");
    out[j] = coef.a * costs[j].zeta_elasticity(s[j]) + coef.b <= 0.0;
  }
  return out;
}

std::vector<bool> convexity_condition(std::span<const CostModel> costs, double r_eff,
                                      const SimplexPoint& s) {
  PotentialCoefficients coef{std::vector<double>(s.dim(), 1.0), r_eff, r_eff - 1.0};
  return convexity_condition(coef, costs, s);
}

std::optional<double> bregman_smoothness(const RankingPolicy& policy, double r) {
  MixedPolicy m = canonical(policy);
  if (r + m.alpha + m.beta < 0.0) return std::nullopt;
  if (r + m.beta >= 1.0) return std::nullopt;
  return 1.0 - r - m.beta;
}

std::optional<double> bregman_smoothness(const PotentialCoefficients& coef) {
  if (coef.a < 0.0 || coef.b >= 0.0) return std::nullopt;
  return -coef.b;
}

CustomisedPolicy customise_policy(const PotentialCoefficients& target, double eta, double r) {
  if (!(eta > 0.0)) throw DomainError("eta must be > 0");
  std::vector<double> lw(target.sigma.size());
  for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = eta * std::log(target.sigma[j]);
  return {eta * target.a - eta * target.b - 1.0, eta * target.b + 1.0 - r,
          SimplexPoint::from_log_weights(lw)};
}

CustomisedPolicy customise_policy_shifted(const PotentialCoefficients& target, double eta,
                                          double r) {
  CustomisedPolicy p = customise_policy(target, eta, r);
  p.alpha += eta;
  p.beta -= eta;
  return p;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DomainError("dimension mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) return std::numeric_limits<double>::infinity();
    total += p[j] * std::log(p[j] / q[j]);
  }
  return std::max(total, 0.0);
}

std::vector<LandscapeRow> landscape_grid(const PotentialCoefficients& coef,
                                         std::span<const CostModel> costs, int resolution) {
  if (coef.sigma.size() != 3 || costs.size() != 3)
    throw DomainError("landscape grid supports exactly 3 creators");
  if (resolution < 2) throw DomainError("resolution must be >= 2");
  const int R = resolution;
  std::vector<LandscapeRow> rows(lattice_offset(R + 1, R));
  for (int i = 0; i <= R; ++i)
    for (int j = 0; j <= R - i; ++j) {
      auto& row = rows[lattice_offset(i, R) + static_cast<std::size_t>(j)];
      row.index = {i, j, R - i - j};
      for (int c = 0; c < 3; ++c) row.point[static_cast<std::size_t>(c)] =
          static_cast<double>(row.index[static_cast<std::size_t>(c)]) / R;
    }
  parallel_for(rows.size(), [&](std::size_t idx) {
    auto& row = rows[idx];
    std::vector<double> x(3);
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) sum += x[c] = std::max(row.point[c], kLandscapeInset);
    for (double& e : x) e /= sum;
    row.value = potential_value(coef, std::span<const double>(x), costs);
  });
  return rows;
}

std::vector<std::size_t> lattice_local_minima(const std::vector<LandscapeRow>& grid,
                                              int resolution) {
  const int R = resolution;
  if (grid.size() != lattice_offset(R + 1, R)) throw DomainError("grid size does not match resolution");
  auto at = [&](int i, int j) { return grid[lattice_offset(i, R) + static_cast<std::size_t>(j)].value; };
  static constexpr int moves[6][2] = {{1, -1}, {-1, 1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<std::size_t> out;
  for (int i = 1; i < R; ++i)
    for (int j = 1; i + j < R; ++j) {
      double v = at(i, j);
      bool is_min = true;
      for (const auto& m : moves)
        if (!(v < at(i + m[0], j + m[1]))) is_min = false;
      if (is_min) out.push_back(lattice_offset(i, R) + static_cast<std::size_t>(j));
    }
  return out;
}

}  // namespace attn
