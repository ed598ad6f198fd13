#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "attn/cost.hpp"
#include "attn/policy.hpp"
#include "attn/simplex.hpp"

namespace attn {

// Phi(s) = -sum_j [ s_j log sigma_j + a ∫_0^{s_j} log zeta_j + b s_j log s_j ]
struct PotentialCoefficients {
  std::vector<double> sigma;
  double a;
  double b;
};

PotentialCoefficients coefficients_for(const RankingPolicy& policy, double r);

double potential_value(const PotentialCoefficients& coef, const SimplexPoint& s,
                       std::span<const CostModel> costs);
// Same formula on any vector in [0,1]^n, for finite-difference checks.
double potential_value(const PotentialCoefficients& coef, std::span<const double> s,
                       std::span<const CostModel> costs);

std::vector<double> potential_gradient(const PotentialCoefficients& coef, const SimplexPoint& s,
                                       std::span<const CostModel> costs);
std::vector<double> potential_gradient(const PotentialCoefficients& coef,
                                       std::span<const double> s,
                                       std::span<const CostModel> costs);

struct PotentialDecomposition {
  double alignment;             // sum s_j log(s_j / sigma_j)
  double expected_log_quality;  // sum s_j log zeta_j(s_j)
  double entropy;               // -sum s_j log s_j
  double production_cost;       // sum ∫_0^{zeta_j(s_j)} c_j'(u)/u du
};

PotentialDecomposition potential_decomposition(const PotentialCoefficients& coef,
                                               const SimplexPoint& s,
                                               std::span<const CostModel> costs);

// Phi = alignment - a ELQ + (1 + b) H + a PC.
double recompose(const PotentialDecomposition& d, const PotentialCoefficients& coef);

// Per creator: r_eff s ζ'(s) + (r_eff - 1) ζ(s) <= 0.
std::vector<bool> convexity_condition(std::span<const CostModel> costs, double r_eff,
                                      const SimplexPoint& s);
// Generic form for any coefficient pair: a s ζ'(s) + b ζ(s) <= 0.
std::vector<bool> convexity_condition(const PotentialCoefficients& coef,
                                      std::span<const CostModel> costs, const SimplexPoint& s);

// L such that Phi is L-smooth relative to negative entropy; nullopt when no
// bound is known.
std::optional<double> bregman_smoothness(const RankingPolicy& policy, double r);
std::optional<double> bregman_smoothness(const PotentialCoefficients& coef);

struct CustomisedPolicy {
  double alpha;
  double beta;
  SimplexPoint mu;
};

// PR + Mixed parameters whose step equals the rate-eta KL mirror step on Phi.
CustomisedPolicy customise_policy(const PotentialCoefficients& target, double eta, double r);
// The alternative map alpha = eta a - eta b + eta - 1, beta = eta b - eta + 1 - r.
// Kept for comparison only; it does not reproduce the rate-eta step.
CustomisedPolicy customise_policy_shifted(const PotentialCoefficients& target, double eta,
                                          double r);

// Returns +inf when p is not absolutely continuous w.r.t. q.
double kl_divergence(std::span<const double> p, std::span<const double> q);
inline double kl_divergence(const SimplexPoint& p, const SimplexPoint& q) {
  return kl_divergence(p.span(), q.span());
}

struct LandscapeRow {
  std::array<int, 3> index;
  std::array<double, 3> point;
  double value;
};

inline constexpr double kLandscapeInset = 1e-9;

// Rows ordered by (i, j) over the lattice {(i, j, R-i-j)/R}.
std::vector<LandscapeRow> landscape_grid(const PotentialCoefficients& coef,
                                         std::span<const CostModel> costs, int resolution);

// Interior rows whose value is strictly below all six lattice neighbours.
std::vector<std::size_t> lattice_local_minima(const std::vector<LandscapeRow>& grid,
                                              int resolution);

}  // namespace attn
