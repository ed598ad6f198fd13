#pragma once

#include <optional>
#include <span>
#include <vector>

#include "attn/config.hpp"
#include "attn/cost.hpp"
#include "attn/policy.hpp"
#include "attn/simplex.hpp"
#include "attn/state.hpp"

namespace attn {

// phi ∝ (q v)^(1/(1-r)): the trial-offer equilibrium reached within an epoch.
SimplexPoint popularity_update_er(const SimplexPoint& v, std::span<const double> q, double r);

// phi ∝ q v phi_prev^r: a single proportional-response step.
SimplexPoint popularity_update_pr(const SimplexPoint& v, std::span<const double> q,
                                  const SimplexPoint& phi_prev, double r);

// q_j = zeta_j(s_j).
std::vector<double> quality_update_br(const SimplexPoint& s, std::span<const CostModel> costs);

// v ∝ mu q^alpha phi^beta; Constant returns its stored v.
SimplexPoint visibility_update(const RankingPolicy& policy, std::span<const double> q,
                               const SimplexPoint& phi);

// s ∝ v phi^r.
SimplexPoint s_from_phi(const SimplexPoint& v, const SimplexPoint& phi, double r);

struct EpochTrace {
  MarketState before;
  MarketState after;
  RankingPolicy policy_used;
};

MarketState epoch_step(const MarketState& state, const MarketModel& model);
EpochTrace traced_epoch_step(const MarketState& state, const MarketModel& model);

// One epoch expressed directly on trial probabilities. s_prev is needed only
// for ER with alpha != 0.
SimplexPoint s_step_closed_form(const SimplexPoint& s, const std::optional<SimplexPoint>& s_prev,
                                const MarketModel& model);

// Whether s_step_closed_form needs the previous s.
bool needs_s_prev(const MarketModel& model);

// Rebuilds (phi, v, q) from s0 with s_prev := s0. Requires r + beta != 0.
MarketState initial_state(const SimplexPoint& s0, const MarketModel& model,
                          std::optional<std::vector<double>> q0 = std::nullopt);

// Rebuilds the (phi, v, q) state whose trial probabilities are s after an
// epoch that started from s_prev. Requires r + beta != 0.
MarketState state_from_s(const SimplexPoint& s, const SimplexPoint& s_prev,
                         const MarketModel& model, long epoch = 0);

// Starts from popularity and visibility; q0 defaults to zeta(s_from_phi(v0, phi0, r)).
MarketState state_from_phi(const SimplexPoint& phi0, const SimplexPoint& v0,
                           const MarketModel& model,
                           std::optional<std::vector<double>> q0 = std::nullopt);

// max_j |s_j - T(s)_j| where T is the memoryless fixed-point map
// s ∝ mu zeta(s)^(r+alpha+beta) s^(r+beta).
double tstome_residual(const SimplexPoint& s, const MarketModel& model);

inline constexpr double kBoundaryAbsorbed = 1e-15;
std::size_t boundary_absorbed_count(const SimplexPoint& s);

// e * log(x) with 0^0 = 1, 0^positive = 0 (as -inf) and the 1e-300 floor.
// Throws DomainError for 0 raised to a negative power.
double log_power(double x, double e);

}  // namespace attn
