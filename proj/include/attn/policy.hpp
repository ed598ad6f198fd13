#pragma once

#include <string>
#include <variant>
#include <vector>

#include "attn/simplex.hpp"

namespace attn {

struct ConstantPolicy {
  SimplexPoint v;
};
struct PopularityPolicy {
  SimplexPoint mu;
  double beta;
};
struct QualityPolicy {
  SimplexPoint mu;
  double alpha;
};
// v ∝ mu q^alpha phi^beta
struct MixedPolicy {
  SimplexPoint mu;
  double alpha;
  double beta;
};

using RankingPolicy = std::variant<ConstantPolicy, PopularityPolicy, QualityPolicy, MixedPolicy>;

// Every variant rewritten as Mixed; idempotent.
MixedPolicy canonical(const RankingPolicy& policy);

std::string policy_name(const RankingPolicy& policy);
std::size_t policy_dim(const RankingPolicy& policy);
std::vector<std::string> policy_violations(const RankingPolicy& policy);

}  // namespace attn
