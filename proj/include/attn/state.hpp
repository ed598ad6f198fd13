#pragma once

#include <optional>
#include <vector>

#include "attn/simplex.hpp"

namespace attn {

// Snapshot between epochs: phi is the last popularity, v and q are the
// visibility and quality that the next epoch will use, s ∝ v phi^r.
class MarketState {
 public:
  // Checks dimensions, q in [0,1] and s against (v, phi, r) within 1e-9.
  MarketState(SimplexPoint phi, SimplexPoint v, std::vector<double> q, SimplexPoint s,
              std::optional<SimplexPoint> s_prev, long epoch, double r);

  const SimplexPoint& phi() const { return phi_; }
  const SimplexPoint& v() const { return v_; }
  const std::vector<double>& q() const { return q_; }
  const SimplexPoint& s() const { return s_; }
  const std::optional<SimplexPoint>& s_prev() const { return s_prev_; }
  long epoch() const { return epoch_; }
  std::size_t dim() const { return s_.dim(); }

 private:
  SimplexPoint phi_, v_;
  std::vector<double> q_;
  SimplexPoint s_;
  std::optional<SimplexPoint> s_prev_;
  long epoch_;
};

}  // namespace attn
