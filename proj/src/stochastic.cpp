#include "attn/stochastic.hpp"

#include <cmath>
#include <string>

#include "attn/dynamics.hpp"
#include "attn/errors.hpp"
#include "attn/io.hpp"
#include "attn/rng.hpp"

namespace attn {

PurchaseCounts PurchaseCounts::ones(std::size_t n) {
  return PurchaseCounts(std::vector<long long>(n, 1));
}

PurchaseCounts::PurchaseCounts(std::vector<long long> counts) : d(std::move(counts)), total(0) {
  if (d.empty()) throw DomainError("purchase counts need at least one item");
  for (long long c : d) {
    if (c < 1) throw DomainError("initial purchase counts must be >= 1");
    total += c;
  }
}

SimplexPoint PurchaseCounts::phi() const {
  std::vector<double> w(d.begin(), d.end());
  return SimplexPoint::normalized(std::move(w));
}

SimplexPoint next_purchase_probability(const SimplexPoint& v, std::span<const double> q,
                                       const SimplexPoint& phi, double r) {
  if (v.dim() != q.size() || v.dim() != phi.dim()) throw DomainError("dimension mismatch");
  std::vector<double> lw(v.dim());
  for (std::size_t j = 0; j < lw.size(); ++j) {
    if (!(q[j] >= 0.0 && q[j] <= 1.0)) throw DomainError("quality outside [0,1]");
    lw[j] = log_power(v[j] * q[j], 1.0) + log_power(phi[j], r);
  }
  try {
    return SimplexPoint::from_log_weights(lw);
  } catch (const DegenerateMarketError&) {
    throw DegenerateMarketError("every next-purchase weight is zero");
  }
}

StochasticTrajectory run_stochastic_epoch(const SimplexPoint& v, std::span<const double> q,
                                          double r, const PurchaseCounts& d0,
                                          long long n_purchases, std::uint64_t seed,
                                          long long thin_every) {
  const std::size_t n = v.dim();
  if (q.size() != n || d0.d.size() != n) throw DomainError("dimension mismatch");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("r must lie in [0,1]");
  if (n_purchases < 1) throw DomainError("n_purchases must be >= 1");
  bool any = false;
  for (double x : q) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("quality outside [0,1]");
    any = any || x > 0.0;
  }
  if (!any) throw DegenerateMarketError("every quality is zero, no purchase can occur");
  if (thin_every < 1) thin_every = 1;

  Rng rng(seed);
  StochasticTrajectory traj{{0}, {d0.phi()}, d0, 0};
  std::vector<long long>& d = traj.final_counts.d;
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = v[j] * std::pow(static_cast<double>(d[j]), r);

  for (long long bought = 0; bought < n_purchases;) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = rng.uniform() * total;
    std::size_t j = 0;
    while (j + 1 < n && u >= w[j]) u -= w[j++];
    ++traj.trials;
    if (rng.uniform() >= q[j]) continue;
    ++d[j];
    ++traj.final_counts.total;
    w[j] = v[j] * std::pow(static_cast<double>(d[j]), r);
    ++bought;
    if (bought % thin_every == 0 || bought == n_purchases) {
      traj.purchase_index.push_back(bought);
      traj.phi.push_back(traj.final_counts.phi());
    }
  }
  return traj;
}

void write_stochastic_csv(std::ostream& out, const StochasticTrajectory& traj) {
  CsvWriter csv(out);
  std::vector<std::string> cols{"purchase_index"};
  for (std::size_t j = 0; j < traj.final_counts.d.size(); ++j) cols.push_back("phi" + std::to_string(j));
  csv.header(cols);
  for (std::size_t i = 0; i < traj.phi.size(); ++i) {
    csv.cell(traj.purchase_index[i]).cells(traj.phi[i].span());
    csv.end_row();
  }
}

}  // namespace attn
