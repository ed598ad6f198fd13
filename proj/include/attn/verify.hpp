#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attn/config.hpp"
#include "attn/rng.hpp"
#include "json.hpp"

namespace attn {

struct CheckResult {
  std::string name;
  double max_deviation;
  double threshold;
  bool pass;
  bool gated;  // informational checks never fail the suite
  std::string note;
};

enum class VerifyLevel { Fast, Full };

std::vector<CheckResult> run_verification(VerifyLevel level, std::uint64_t seed);
nlohmann::json to_json(const std::vector<CheckResult>& checks);
bool all_gated_pass(const std::vector<CheckResult>& checks);

// Quadratic costs with p ~ U[0.5, 5] and positive policy weights ~ Dirichlet(1).
std::vector<CostModel> random_quadratic_costs(Rng& rng, std::size_t n);
RankingPolicy random_policy(Rng& rng, std::size_t n, const std::string& kind, double alpha,
                            double beta);

// Interior point bounded away from the boundary: half uniform, half Dirichlet(1).
SimplexPoint random_interior(Rng& rng, std::size_t n);

}  // namespace attn
