#include "attn/descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attn/dynamics.hpp"
#include "attn/errors.hpp"
#include "attn/io.hpp"
#include "attn/rng.hpp"

namespace attn {

SimplexPoint md_step_kl(const SimplexPoint& x, std::span<const double> g, double eta) {
  if (g.size() != x.dim()) throw DomainError("dimension mismatch");
  if (!(eta > 0.0)) throw DomainError("eta must be > 0");
  if (!x.interior()) throw DomainError("mirror step needs an interior point");
  for (double gj : g)
    if (!std::isfinite(gj)) throw NumericError("non-finite gradient", gj);
  // centre g first so a large common offset never reaches the exponent
  const double g_min = *std::min_element(g.begin(), g.end());
  std::vector<double> lw(x.dim());
  for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = std::log(x[j]) - eta * (g[j] - g_min);
  return SimplexPoint::from_log_weights(lw);
}

double momentum_theta(double r, double alpha, double beta) {
  return (r + beta + alpha - alpha * r) / (r + alpha + beta);
}

double naive_momentum_theta(double r, double alpha, double beta) {
  return (r + beta + alpha - (r + beta) * alpha) / (r + beta + alpha);
}

namespace {

void check_momentum_args(const SimplexPoint& s, const SimplexPoint& s_prev, double r, double alpha,
                         double beta) {
  if (!(r < 1.0)) throw DomainError("momentum form requires r<1");
  if (r + alpha + beta == 0.0) throw DomainError("momentum form requires r+alpha+beta != 0");
  if (s.dim() != s_prev.dim()) throw DomainError("dimension mismatch");
  if (!s.interior() || !s_prev.interior()) throw DomainError("momentum step needs interior points");
}

}  // namespace

SimplexPoint md_momentum_step(const SimplexPoint& s, const SimplexPoint& s_prev,
                              const PotentialCoefficients& coef, std::span<const CostModel> costs,
                              double r, double alpha, double beta) {
  check_momentum_args(s, s_prev, r, alpha, beta);
  const double theta = momentum_theta(r, alpha, beta);
  const double c1 = theta / (1.0 - r), c2 = (1.0 - theta) / (1.0 - r);
  auto g = potential_gradient(coef, s, costs);
  auto gp = potential_gradient(coef, s_prev, costs);
  std::vector<double> lw(s.dim());
  for (std::size_t j = 0; j < lw.size(); ++j) {
    double ls = std::log(s[j]), lp = std::log(s_prev[j]);
    lw[j] = ls - c1 * g[j] - c2 * gp[j] + c2 * coef.b * (ls - lp);
  }
  return SimplexPoint::from_log_weights(lw);
}

SimplexPoint md_momentum_step_naive(const SimplexPoint& s, const SimplexPoint& s_prev,
                                    const PotentialCoefficients& coef,
                                    std::span<const CostModel> costs, double r, double alpha,
                                    double beta) {
  check_momentum_args(s, s_prev, r, alpha, beta);
  const double theta = naive_momentum_theta(r, alpha, beta);
  auto g = potential_gradient(coef, s, costs);
  auto gp = potential_gradient(coef, s_prev, costs);
  std::vector<double> lw(s.dim());
  for (std::size_t j = 0; j < lw.size(); ++j)
    lw[j] = std::log(s[j]) - (theta * g[j] + (1.0 - theta) * gp[j]) / (1.0 - r);
  return SimplexPoint::from_log_weights(lw);
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::MaxSteps: return "max_steps";
    case StopReason::Converged: return "converged";
    case StopReason::Boundary: return "boundary";
    case StopReason::NumericFailure: return "numeric_failure";
  }
  return "unknown";
}

DescentReport run_descent(const PotentialCoefficients& coef, std::span<const CostModel> costs,
                          const SimplexPoint& x0, const DescentOptions& options) {
  if (!(options.eta > 0.0)) throw DomainError("eta must be > 0");
  if (!x0.interior()) throw DomainError("descent needs an interior start");
  const long keep = std::max(1L, options.keep_every);
  DescentReport rep{{}, {}, {}, {}, {}, StopReason::MaxSteps, 0, x0};
  auto record = [&](const SimplexPoint& x, double delta) {
    rep.potential.push_back(potential_value(coef, x, costs));
    if (options.reference) rep.kl_to_reference.push_back(kl_divergence(*options.reference, x));
    rep.max_delta.push_back(delta);
  };
  record(x0, 0.0);
  rep.kept_steps.push_back(0);
  rep.iterates.push_back(x0);

  SimplexPoint x = x0;
  for (long t = 1; t <= options.max_steps; ++t) {
    std::vector<double> g;
    try {
      g = potential_gradient(coef, x, costs);
    } catch (const DomainError&) {
      rep.reason = StopReason::Boundary;
      break;
    }
    bool finite = true;
    for (double e : g) finite = finite && std::isfinite(e);
    if (!finite) {
      rep.reason = StopReason::NumericFailure;
      break;
    }
    SimplexPoint next = md_step_kl(x, g, options.eta);
    double delta = max_abs_diff(next.span(), x.span());
    x = std::move(next);
    rep.steps = t;
    if (!x.interior()) {
      record(x, delta);
      rep.reason = StopReason::Boundary;
      break;
    }
    record(x, delta);
    if (t % keep == 0) {
      rep.kept_steps.push_back(t);
      rep.iterates.push_back(x);
    }
    if (options.stop_tol > 0.0 && delta < options.stop_tol) {
      rep.reason = StopReason::Converged;
      break;
    }
  }
  if (rep.kept_steps.back() != rep.steps) {
    rep.kept_steps.push_back(rep.steps);
    rep.iterates.push_back(x);
  }
  rep.final_point = x;
  return rep;
}

void write_descent_csv(std::ostream& out, const DescentReport& report) {
  CsvWriter csv(out);
  csv.header({"step", "phi", "kl_to_ref", "max_delta"});
  for (std::size_t t = 0; t < report.potential.size(); ++t) {
    csv.cell(static_cast<long long>(t)).cell(report.potential[t]);
    if (report.kl_to_reference.empty()) csv.cell("");
    else csv.cell(report.kl_to_reference[t]);
    csv.cell(report.max_delta[t]).end_row();
  }
}

EquivalenceReport equivalence_check(const MarketModel& model, int n_trials, std::uint64_t seed) {
  const std::size_t n = model.dim();
  const MixedPolicy p = model.mixed();
  const double r = model.r;
  const bool momentum = model.dynamic == Dynamic::ER && p.alpha != 0.0;
  const double eta = model.dynamic == Dynamic::ER ? 1.0 / (1.0 - r) : 1.0;
  const PotentialCoefficients coef = coefficients_for(model.policy, r);
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < n_trials; ++trial) {
    SimplexPoint phi = rng.dirichlet_ones(n);
    SimplexPoint s_prev = rng.dirichlet_ones(n);
    SimplexPoint v = visibility_update(model.policy, quality_update_br(s_prev, model.costs), phi);
    SimplexPoint s = s_from_phi(v, phi, r);
    MarketState state(phi, v, quality_update_br(s, model.costs), s, s_prev, 0, r);
    SimplexPoint market = epoch_step(state, model).s();
    SimplexPoint mirror =
        momentum ? md_momentum_step(s, s_prev, coef, model.costs, r, p.alpha, p.beta)
                 : md_step_kl(s, potential_gradient(coef, s, model.costs), eta);
    worst = std::max(worst, max_abs_diff(market.span(), mirror.span()));
  }
  return {worst, eta, momentum, n_trials, worst < 1e-10};
}

double projected_gradient_residual(const PotentialCoefficients& coef,
                                   std::span<const CostModel> costs, const SimplexPoint& x) {
  auto g = potential_gradient(coef, x, costs);
  double mean = 0.0;
  for (double e : g) mean += e;
  mean /= static_cast<double>(g.size());
  double worst = 0.0;
  for (double e : g) worst = std::max(worst, std::abs(e - mean));
  return worst;
}

LocalProbe local_probe(const PotentialCoefficients& coef, std::span<const CostModel> costs,
                       const SimplexPoint& x_star, double radius, int n_chords,
                       std::uint64_t seed) {
  if (!x_star.interior()) throw DomainError("probe centre must be interior");
  if (!(radius > 0.0) || n_chords < 1) throw DomainError("probe needs radius > 0 and chords >= 1");
  const std::size_t n = x_star.dim();
  const double residual = projected_gradient_residual(coef, costs, x_star);
  if (residual >= 1e-8)
    throw DomainError("probe centre is not stationary, residual " + format_double(residual));
  const auto g0 = potential_gradient(coef, x_star, costs);
  Rng rng(seed);
  double gamma = std::numeric_limits<double>::infinity();
  double kappa = 0.0;
  for (int c = 0; c < n_chords; ++c) {
    std::vector<double> d(n);
    double mean = 0.0, norm = 0.0;
    for (double& e : d) mean += e = rng.normal();
    mean /= static_cast<double>(n);
    for (double& e : d) {
      e -= mean;
      norm += e * e;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (double& e : d) e /= norm;
    for (int k = 0; k < kProbeRadii; ++k) {
      double rho = radius * std::pow(10.0, -2.0 * k / (kProbeRadii - 1));
      std::vector<double> y(n);
      bool inside = true;
      for (std::size_t j = 0; j < n; ++j) {
        y[j] = x_star[j] + rho * d[j];
        inside = inside && y[j] > 0.0;
      }
      if (!inside) continue;
      auto gy = potential_gradient(coef, std::span<const double>(y), costs);
      double dot = 0.0, dg2 = 0.0, dy2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double dg = gy[j] - g0[j], dy = y[j] - x_star[j];
        dot += dg * dy;
        dg2 += dg * dg;
        dy2 += dy * dy;
      }
      gamma = std::min(gamma, dot / dy2);
      kappa = std::max(kappa, std::sqrt(dg2 / dy2));
    }
  }
  if (!std::isfinite(gamma)) throw DomainError("probe radius leaves the simplex in every direction");
  auto L = bregman_smoothness(coef);
  double bound = gamma > 0.0 && kappa > 0.0 ? 2.0 * gamma / (kappa * kappa) : 0.0;
  if (L && *L > 0.0) bound = std::min(bound, 1.0 / *L);
  return {x_star, radius, gamma, kappa, L, bound, residual, gamma > kRegularGamma};
}

SimplexPoint locate_minimiser(const PotentialCoefficients& coef, std::span<const CostModel> costs,
                              const SimplexPoint& x0, double eta, double stop_tol,
                              long max_steps) {
  DescentOptions opt{eta, max_steps, stop_tol, std::nullopt, max_steps};
  DescentReport rep = run_descent(coef, costs, x0, opt);
  if (rep.reason != StopReason::Converged)
    throw NumericError(std::string("minimiser search stopped: ") + stop_reason_name(rep.reason),
                       rep.max_delta.back());
  return rep.final_point;
}

}  // namespace attn
