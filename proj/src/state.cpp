#include "attn/state.hpp"

#include <cmath>
#include <string>

#include "attn/dynamics.hpp"
#include "attn/errors.hpp"

namespace attn {

MarketState::MarketState(SimplexPoint phi, SimplexPoint v, std::vector<double> q, SimplexPoint s,
                         std::optional<SimplexPoint> s_prev, long epoch, double r)
    : phi_(std::move(phi)),
      v_(std::move(v)),
      q_(std::move(q)),
      s_(std::move(s)),
      s_prev_(std::move(s_prev)),
      epoch_(epoch) {
  const std::size_t n = s_.dim();
  if (phi_.dim() != n || v_.dim() != n || q_.size() != n || (s_prev_ && s_prev_->dim() != n))
    throw StateError("market state vectors must share one dimension");
  if (epoch_ < 0) throw StateError("epoch must be nonnegative");
  for (double x : q_)
    if (!(x >= 0.0 && x <= 1.0)) throw StateError("quality outside [0,1]: " + std::to_string(x));
  double gap = max_abs_diff(s_.span(), s_from_phi(v_, phi_, r).span());
  if (gap > 1e-9) throw StateError("s is inconsistent with (v, phi, r), gap " + std::to_string(gap));
}

}  // namespace attn
