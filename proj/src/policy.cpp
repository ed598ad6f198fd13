#include "attn/policy.hpp"

#include <cmath>

#include "attn/io.hpp"

namespace attn {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

MixedPolicy canonical(const RankingPolicy& policy) {
  return std::visit(overloaded{
                        [](const ConstantPolicy& p) { return MixedPolicy{p.v, 0.0, 0.0}; },
                        [](const PopularityPolicy& p) { return MixedPolicy{p.mu, 0.0, p.beta}; },
                        [](const QualityPolicy& p) { return MixedPolicy{p.mu, p.alpha, 0.0}; },
                        [](const MixedPolicy& p) { return p; },
                    },
                    policy);
}

std::string policy_name(const RankingPolicy& policy) {
  static const char* names[] = {"constant", "popularity", "quality", "mixed"};
  return names[policy.index()];
}

std::size_t policy_dim(const RankingPolicy& policy) { return canonical(policy).mu.dim(); }

std::vector<std::string> policy_violations(const RankingPolicy& policy) {
  std::vector<std::string> errs;
  MixedPolicy m = canonical(policy);
  const char* weight = std::holds_alternative<ConstantPolicy>(policy) ? "v" : "mu";
  for (std::size_t j = 0; j < m.mu.dim(); ++j)
    if (!(m.mu[j] > 0.0))
      errs.push_back(std::string(weight) + "[" + std::to_string(j) + "] must be > 0, got " +
                     format_double(m.mu[j]));
  if (!std::isfinite(m.alpha)) errs.push_back("alpha must be finite");
  if (!std::isfinite(m.beta)) errs.push_back("beta must be finite");
  return errs;
}

}  // namespace attn
