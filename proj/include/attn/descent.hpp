#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "attn/config.hpp"
#include "attn/cost.hpp"
#include "attn/potential.hpp"
#include "attn/simplex.hpp"

namespace attn {

// x' ∝ x exp(-eta g), evaluated with the max exponent subtracted.
SimplexPoint md_step_kl(const SimplexPoint& x, std::span<const double> g, double eta);

// Weight on the current gradient in the two-step form of the ER update.
double momentum_theta(double r, double alpha, double beta);

// ER + Mixed as mirror descent with momentum:
//   log s' = log s - c1 g(s) - c2 g(s_prev) + c2 b (log s - log s_prev)
// with c1 = theta / (1-r), c2 = (1-theta) / (1-r), g = grad Phi_mix.
SimplexPoint md_momentum_step(const SimplexPoint& s, const SimplexPoint& s_prev,
                              const PotentialCoefficients& coef, std::span<const CostModel> costs,
                              double r, double alpha, double beta);

// The convex combination of the two gradients without the log-s momentum term,
// theta = (r+beta+alpha-(r+beta)alpha)/(r+beta+alpha). Exact only for alpha = 0
// or s_prev = s.
double naive_momentum_theta(double r, double alpha, double beta);
SimplexPoint md_momentum_step_naive(const SimplexPoint& s, const SimplexPoint& s_prev,
                                    const PotentialCoefficients& coef,
                                    std::span<const CostModel> costs, double r, double alpha,
                                    double beta);

enum class StopReason { MaxSteps, Converged, Boundary, NumericFailure };
const char* stop_reason_name(StopReason reason);

struct DescentOptions {
  double eta;
  long max_steps;
  double stop_tol = 0.0;  // 0 disables the early stop
  std::optional<SimplexPoint> reference;
  long keep_every = 1;
};

struct DescentReport {
  std::vector<long> kept_steps;
  std::vector<SimplexPoint> iterates;  // thinned, always includes first and last
  std::vector<double> potential;       // index t = 0..steps
  std::vector<double> kl_to_reference; // empty without a reference
  std::vector<double> max_delta;       // index t = 0..steps, entry 0 is 0
  StopReason reason = StopReason::MaxSteps;
  long steps = 0;
  SimplexPoint final_point;
};

DescentReport run_descent(const PotentialCoefficients& coef, std::span<const CostModel> costs,
                          const SimplexPoint& x0, const DescentOptions& options);

// Columns: step, phi, kl_to_ref, max_delta.
void write_descent_csv(std::ostream& out, const DescentReport& report);

struct EquivalenceReport {
  double max_deviation;
  double eta;
  bool momentum;
  int trials;
  bool pass;
};

// Random consistent states, one market epoch each, compared against the mirror
// step (rate 1 for PR, 1/(1-r) for ER, momentum form for ER with alpha != 0).
EquivalenceReport equivalence_check(const MarketModel& model, int n_trials, std::uint64_t seed);

// max_j |g_j - mean(g)|: zero exactly at interior stationary points.
double projected_gradient_residual(const PotentialCoefficients& coef,
                                   std::span<const CostModel> costs, const SimplexPoint& x);

struct LocalProbe {
  SimplexPoint x_star;
  double radius;
  double gamma;
  double kappa;
  std::optional<double> smoothness;  // L, when known
  double eta_bound;                  // min(2 gamma / kappa^2, 1 / L)
  double gradient_residual;
  bool regular;                      // gamma > 1e-8
};

inline constexpr int kProbeRadii = 8;
inline constexpr double kRegularGamma = 1e-8;

LocalProbe local_probe(const PotentialCoefficients& coef, std::span<const CostModel> costs,
                       const SimplexPoint& x_star, double radius, int n_chords,
                       std::uint64_t seed);

// Mirror descent at rate eta until the step falls below stop_tol.
SimplexPoint locate_minimiser(const PotentialCoefficients& coef, std::span<const CostModel> costs,
                              const SimplexPoint& x0, double eta, double stop_tol = 1e-13,
                              long max_steps = 2'000'000);

}  // namespace attn
