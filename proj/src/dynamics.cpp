#include "attn/dynamics.hpp"

#include <cmath>
#include <limits>

#include "attn/errors.hpp"

namespace attn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_dim(std::size_t a, std::size_t b) {
  if (a != b) throw DomainError("dimension mismatch");
}

void require_quality(std::span<const double> q) {
  for (double x : q)
    if (!(x >= 0.0)) throw DomainError("quality must be nonnegative");
}

}  // namespace

double log_power(double x, double e) {
  if (e == 0.0) return 0.0;
  if (x == 0.0) {
    if (e > 0.0) return kNegInf;
    throw DomainError("0 raised to a negative power");
  }
  return e * safe_log(x);
}

SimplexPoint popularity_update_er(const SimplexPoint& v, std::span<const double> q, double r) {
  require_dim(v.dim(), q.size());
  require_quality(q);
  if (!(r < 1.0)) throw DomainError("ER requires r<1");
  std::vector<double> lw(v.dim());
  for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = log_power(q[j] * v[j], 1.0 / (1.0 - r));
  try {
    return SimplexPoint::from_log_weights(lw);
  } catch (const DegenerateMarketError&) {
    throw DegenerateMarketError("every q_j v_j is zero");
  }
}

SimplexPoint popularity_update_pr(const SimplexPoint& v, std::span<const double> q,
                                  const SimplexPoint& phi_prev, double r) {
  require_dim(v.dim(), q.size());
  require_dim(v.dim(), phi_prev.dim());
  require_quality(q);
  std::vector<double> lw(v.dim());
  for (std::size_t j = 0; j < lw.size(); ++j)
    lw[j] = log_power(q[j] * v[j], 1.0) + log_power(phi_prev[j], r);
  try {
    return SimplexPoint::from_log_weights(lw);
  } catch (const DegenerateMarketError&) {
    throw DegenerateMarketError("proportional-response normalizer is zero");
  }
}

std::vector<double> quality_update_br(const SimplexPoint& s, std::span<const CostModel> costs) {
  require_dim(s.dim(), costs.size());
  std::vector<double> q(s.dim());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = costs[j].zeta(s[j]);
  return q;
}

SimplexPoint visibility_update(const RankingPolicy& policy, std::span<const double> q,
                               const SimplexPoint& phi) {
  if (const auto* c = std::get_if<ConstantPolicy>(&policy)) return c->v;
  MixedPolicy m = canonical(policy);
  require_dim(m.mu.dim(), q.size());
  require_dim(m.mu.dim(), phi.dim());
  std::vector<double> lw(q.size());
  try {
    for (std::size_t j = 0; j < lw.size(); ++j)
      lw[j] = std::log(m.mu[j]) + log_power(q[j], m.alpha) + log_power(phi[j], m.beta);
  } catch (const DomainError&) {
    throw DomainError("policy domain error: 0 raised to a negative ranking exponent");
  }
  return SimplexPoint::from_log_weights(lw);
}

SimplexPoint s_from_phi(const SimplexPoint& v, const SimplexPoint& phi, double r) {
  require_dim(v.dim(), phi.dim());
  std::vector<double> lw(v.dim());
  for (std::size_t j = 0; j < lw.size(); ++j) {
    if (!(v[j] > 0.0)) throw DomainError("visibility must be strictly positive");
    lw[j] = std::log(v[j]) + log_power(phi[j], r);
  }
  return SimplexPoint::from_log_weights(lw);
}

MarketState epoch_step(const MarketState& state, const MarketModel& model) {
  const double r = model.r;
  SimplexPoint phi = model.dynamic == Dynamic::ER
                         ? popularity_update_er(state.v(), state.q(), r)
                         : popularity_update_pr(state.v(), state.q(), state.phi(), r);
  SimplexPoint v = visibility_update(model.policy, state.q(), phi);
  SimplexPoint s = s_from_phi(v, phi, r);
  std::vector<double> q = quality_update_br(s, model.costs);
  return MarketState(std::move(phi), std::move(v), std::move(q), std::move(s), state.s(),
                     state.epoch() + 1, r);
}

EpochTrace traced_epoch_step(const MarketState& state, const MarketModel& model) {
  return EpochTrace{state, epoch_step(state, model), model.policy};
}

bool needs_s_prev(const MarketModel& model) {
  return model.dynamic == Dynamic::ER && model.mixed().alpha != 0.0;
}

SimplexPoint s_step_closed_form(const SimplexPoint& s, const std::optional<SimplexPoint>& s_prev,
                                const MarketModel& model) {
  const std::size_t n = s.dim();
  require_dim(n, model.costs.size());
  const MixedPolicy p = model.mixed();
  const double r = model.r, a = p.alpha, b = p.beta;
  std::vector<double> lw(n);
  if (model.dynamic == Dynamic::PR) {
    for (std::size_t j = 0; j < n; ++j)
      lw[j] = std::log(p.mu[j]) + log_power(model.costs[j].zeta(s[j]), r + a + b) +
              log_power(s[j], r + b);
    return SimplexPoint::from_log_weights(lw);
  }
  if (!(r < 1.0)) throw DomainError("ER requires r<1");
  const double inv = 1.0 / (1.0 - r);
  const bool memory = a != 0.0;
  if (memory && !s_prev) throw StateError("ER with quality-dependent ranking needs s_prev");
  if (memory) require_dim(n, s_prev->dim());
  for (std::size_t j = 0; j < n; ++j) {
    lw[j] = inv * std::log(p.mu[j]) + log_power(model.costs[j].zeta(s[j]), a + (r + b) * inv) +
            log_power(s[j], b * inv);
    if (memory) lw[j] += log_power(model.costs[j].zeta((*s_prev)[j]), a * r * inv);
  }
  return SimplexPoint::from_log_weights(lw);
}

MarketState state_from_s(const SimplexPoint& s_target, const SimplexPoint& s_prev,
                         const MarketModel& model, long epoch) {
  const std::size_t n = s_target.dim();
  require_dim(n, model.costs.size());
  require_dim(n, s_prev.dim());
  const MixedPolicy p = model.mixed();
  const double e = model.r + p.beta;
  if (e == 0.0) throw StateError("cannot reconstruct popularity when r + beta = 0");
  if (!s_target.interior() || !s_prev.interior()) throw DomainError("reconstruction needs interior s");
  // s = s_from_phi(V(zeta(s_prev), phi), phi) solved for phi.
  std::vector<double> q_prev = quality_update_br(s_prev, model.costs);
  std::vector<double> lphi(n);
  for (std::size_t j = 0; j < n; ++j)
    lphi[j] = (std::log(s_target[j]) - std::log(p.mu[j]) - log_power(q_prev[j], p.alpha)) / e;
  SimplexPoint phi = SimplexPoint::from_log_weights(lphi);
  SimplexPoint v = visibility_update(model.policy, q_prev, phi);
  SimplexPoint s = s_from_phi(v, phi, model.r);
  std::vector<double> q = quality_update_br(s, model.costs);
  return MarketState(std::move(phi), std::move(v), std::move(q), std::move(s), s_prev, epoch,
                     model.r);
}

MarketState initial_state(const SimplexPoint& s0, const MarketModel& model,
                          std::optional<std::vector<double>> q0) {
  MarketState st = state_from_s(s0, s0, model, 0);
  if (!q0) return st;
  return MarketState(st.phi(), st.v(), std::move(*q0), st.s(), st.s_prev(), 0, model.r);
}

MarketState state_from_phi(const SimplexPoint& phi0, const SimplexPoint& v0,
                           const MarketModel& model, std::optional<std::vector<double>> q0) {
  SimplexPoint s = s_from_phi(v0, phi0, model.r);
  std::vector<double> q = q0 ? std::move(*q0) : quality_update_br(s, model.costs);
  SimplexPoint prev = s;
  return MarketState(phi0, v0, std::move(q), std::move(s), std::move(prev), 0, model.r);
}

double tstome_residual(const SimplexPoint& s, const MarketModel& model) {
  MarketModel pr = model;
  pr.dynamic = Dynamic::PR;
  return max_abs_diff(s.span(), s_step_closed_form(s, std::nullopt, pr).span());
}

std::size_t boundary_absorbed_count(const SimplexPoint& s) {
  std::size_t c = 0;
  for (double x : s)
    if (x < kBoundaryAbsorbed) ++c;
  return c;
}

}  // namespace attn
