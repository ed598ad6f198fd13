#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "attn/simplex.hpp"

namespace attn {

struct PurchaseCounts {
  std::vector<long long> d;  // every entry >= 1
  long long total;

  static PurchaseCounts ones(std::size_t n);
  explicit PurchaseCounts(std::vector<long long> counts);
  SimplexPoint phi() const;
};

// p ∝ v q phi^r.
SimplexPoint next_purchase_probability(const SimplexPoint& v, std::span<const double> q,
                                       const SimplexPoint& phi, double r);

struct StochasticTrajectory {
  std::vector<long long> purchase_index;
  std::vector<SimplexPoint> phi;  // thinned, first row is the start
  PurchaseCounts final_counts;
  long long trials;

  SimplexPoint final_phi() const { return final_counts.phi(); }
};

// Trial item drawn with weights v_j d_j^r, purchased with probability q_j,
// repeated until n_purchases purchases have happened.
StochasticTrajectory run_stochastic_epoch(const SimplexPoint& v, std::span<const double> q,
                                          double r, const PurchaseCounts& d0,
                                          long long n_purchases, std::uint64_t seed,
                                          long long thin_every = 1000);

// Columns: purchase_index, phi0..phi{n-1}.
void write_stochastic_csv(std::ostream& out, const StochasticTrajectory& traj);

}  // namespace attn
