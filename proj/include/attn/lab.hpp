#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "attn/config.hpp"
#include "attn/potential.hpp"
#include "attn/simplex.hpp"
#include "attn/state.hpp"
#include "json.hpp"

namespace attn {

struct MetricsRow {
  long epoch;
  double efficiency;
  double total_cost;
  double entropy;
  double potential;
  double max_step_delta;
};

inline const std::vector<std::string> kMetricNames{"efficiency", "total_cost", "entropy",
                                                   "potential", "max_step_delta"};
double metric_value(const MetricsRow& row, std::size_t metric);

MetricsRow metrics(const SimplexPoint& s, std::span<const CostModel> costs,
                   const PotentialCoefficients& coef, long epoch = 0, double max_step_delta = 0.0);
MetricsRow metrics(const MarketState& state, std::span<const CostModel> costs,
                   const PotentialCoefficients& coef);

// Every epoch up to 100, then every 10th.
bool lab_log_epoch(long epoch);

struct TrajectoryOptions {
  long epochs;
  double stop_tol;
  bool thinned_log = false;  // lab_log_epoch instead of every epoch
  bool keep_states = false;
  bool stop_at_tol = false;  // otherwise always run all epochs
};

struct TrajectoryResult {
  std::vector<MetricsRow> rows;      // includes epoch 0
  std::vector<SimplexPoint> states;  // aligned with rows when kept
  std::optional<long> converged_at;  // first epoch whose step is below stop_tol
  SimplexPoint final_s;
  std::size_t boundary_absorbed;
};

// s-space driver using s_step_closed_form, with s_prev := s0 at the start.
TrajectoryResult run_trajectory(const MarketModel& model, const SimplexPoint& s0,
                                const TrajectoryOptions& options);

struct ExperimentProtocol {
  int n_creators = 50;
  double r = 0.3;
  double alpha = 0.1;
  double beta = 0.1;
  int epochs = 1000;
  int n_inits = 20;
  std::uint64_t seed = 0;
  std::vector<std::string> policies{"constant", "popularity", "quality", "mixed"};
  std::vector<Dynamic> dynamics{Dynamic::ER, Dynamic::PR};
  double p_min = 0.5;
  double p_max = 5.0;
  double k = 2.0;
  unsigned workers = 0;  // 0 = hardware concurrency
};

ExperimentProtocol protocol_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentProtocol& protocol);
// Throws ConfigError with field paths.
void validate_protocol(const ExperimentProtocol& protocol);

// Quadratic-style costs p_j ~ U[p_min, p_max] drawn from the protocol seed.
std::vector<CostModel> protocol_costs(const ExperimentProtocol& protocol);
// Initial point k, shared by every (policy, dynamic) group.
SimplexPoint protocol_init(const ExperimentProtocol& protocol, int k);
RankingPolicy protocol_policy(const ExperimentProtocol& protocol, const std::string& name);

struct AggregateGroup {
  std::string policy;
  Dynamic dynamic;
  std::vector<long> epochs;
  // mean[m][t], stdev[m][t] for metric m in kMetricNames order.
  std::vector<std::vector<double>> mean, stdev;
  std::vector<std::vector<double>> min, max;
  // First logged epoch from which the mean potential stays within 1e-6 of its final value.
  std::optional<long> settle_epoch;
  std::vector<std::optional<long>> run_converged_at;
};

struct AggregateReport {
  std::string digest;
  int runs;
  std::vector<AggregateGroup> groups;
};

inline constexpr double kSettleTolerance = 1e-6;

AggregateReport run_experiment(const ExperimentProtocol& protocol);

// Columns: policy, dynamic, epoch, metric, mean, std.
void write_aggregate_csv(std::ostream& out, const AggregateReport& report);
nlohmann::json experiment_summary(const AggregateReport& report);

enum class DominanceOutcome { Dominated, PremiseUnmet, SlowConvergence, RatioDecreased };
const char* dominance_outcome_name(DominanceOutcome outcome);

struct DominanceVerdict {
  DominanceOutcome outcome;
  std::vector<std::string> unmet;  // premise clauses that failed
  long epochs = 0;
  double final_dominated_share = 0.0;
  double final_winner_share = 0.0;
  bool ratio_monotone = true;
  SimplexPoint final_s;
};

inline constexpr double kDominatedShare = 1e-6;
inline constexpr int kPremiseGrid = 200;

// Constant-policy premise: the dominator's concavity condition holds strictly on
// a grid of (0,1], zeta_j > zeta_i on that grid, v_j > v_i and s_j^0 >= s_i^0.
std::vector<std::string> dominance_premise(const MarketModel& model, const SimplexPoint& s0,
                                           std::size_t i, std::size_t j);

// Runs until s_i < 1e-6 or the epoch cap, checking that s_j/s_i never decreases.
DominanceVerdict dominance_study(const MarketModel& model, const SimplexPoint& s0, std::size_t i,
                                 std::size_t j, long epoch_cap = 100000);

// j against every other creator; runs until s_j > 1 - monopoly_gap or the cap.
DominanceVerdict monopoly_study(const MarketModel& model, const SimplexPoint& s0, std::size_t j,
                                double monopoly_gap = 1e-6, long epoch_cap = 100000);

}  // namespace attn
