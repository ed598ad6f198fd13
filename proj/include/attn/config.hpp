#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "attn/cost.hpp"
#include "attn/policy.hpp"
#include "attn/simplex.hpp"
#include "json.hpp"

namespace attn {

enum class Dynamic { ER, PR };

std::string dynamic_name(Dynamic d);

struct UniformInit {};
struct DirichletInit {
  std::optional<std::uint64_t> seed;  // falls back to the master seed's init stream
};
struct ExplicitInit {
  SimplexPoint s;
};
using InitSpec = std::variant<UniformInit, DirichletInit, ExplicitInit>;

struct RunConfig {
  int n_creators;
  double r;
  Dynamic dynamic;
  RankingPolicy policy;
  std::vector<CostModel> costs;
  InitSpec init = UniformInit{};
  int epochs = 1000;
  double stop_tol = 1e-12;
  std::uint64_t seed = 0;
};

// Stream indices for stream_seed(master, index).
enum SeedStream : std::uint64_t {
  kInitStream = 1,
  kCostStream = 2,
  kPurchaseStream = 3,
  kProbeStream = 4,
  kRunStreamBase = 1000,
};

struct SeedPlan {
  std::uint64_t master;
  std::uint64_t init;
  std::uint64_t costs;
  std::uint64_t purchases;
};

struct ValidatedConfig {
  RunConfig config;
  MixedPolicy policy;
  SeedPlan seeds;
};

// Throws ConfigError listing every violated invariant with its field path.
ValidatedConfig validate_config(const RunConfig& cfg);

// What the update operators need from a configuration.
struct MarketModel {
  double r;
  Dynamic dynamic;
  RankingPolicy policy;
  std::vector<CostModel> costs;

  MixedPolicy mixed() const { return canonical(policy); }
  std::size_t dim() const { return costs.size(); }
};

MarketModel model_of(const RunConfig& cfg);

// JSON (de)serialization with exact field names; unknown fields are errors.
RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const RankingPolicy& policy);
nlohmann::json to_json(const CostModel& cost);
RankingPolicy policy_from_json(const nlohmann::json& doc, std::size_t n);
CostModel cost_from_json(const nlohmann::json& doc);

// Parse and validate a config file in one go.
ValidatedConfig load_config(const std::string& path);

// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_digest(const nlohmann::json& canonical);

SimplexPoint initial_point(const InitSpec& init, std::size_t n, std::uint64_t master_seed);

}  // namespace attn
