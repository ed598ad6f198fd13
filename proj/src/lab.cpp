#include "attn/lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "attn/dynamics.hpp"
#include "attn/errors.hpp"
#include "attn/io.hpp"
#include "attn/parallel.hpp"
#include "attn/rng.hpp"

namespace attn {

using nlohmann::json;

double metric_value(const MetricsRow& row, std::size_t metric) {
  switch (metric) {
    case 0: return row.efficiency;
    case 1: return row.total_cost;
    case 2: return row.entropy;
    case 3: return row.potential;
    case 4: return row.max_step_delta;
  }
  throw DomainError("unknown metric index");
}

MetricsRow metrics(const SimplexPoint& s, std::span<const CostModel> costs,
                   const PotentialCoefficients& coef, long epoch, double max_step_delta) {
  if (costs.size() != s.dim()) throw DomainError("dimension mismatch");
  MetricsRow row{epoch, 0.0, 0.0, 0.0, potential_value(coef, s, costs), max_step_delta};
  for (std::size_t j = 0; j < s.dim(); ++j) {
    double q = costs[j].zeta(s[j]);
    row.efficiency += s[j] * q;
    row.total_cost += costs[j].cost(q);
    if (s[j] > 0.0) row.entropy -= s[j] * std::log(s[j]);
  }
  return row;
}

MetricsRow metrics(const MarketState& state, std::span<const CostModel> costs,
                   const PotentialCoefficients& coef) {
  return metrics(state.s(), costs, coef, state.epoch());
}

bool lab_log_epoch(long epoch) { return epoch <= 100 || epoch % 10 == 0; }

TrajectoryResult run_trajectory(const MarketModel& model, const SimplexPoint& s0,
                                const TrajectoryOptions& options) {
  const PotentialCoefficients coef = coefficients_for(model.policy, model.r);
  TrajectoryResult res{{}, {}, std::nullopt, s0, 0};
  auto log = [&](const SimplexPoint& s, long t, double delta) {
    res.rows.push_back(metrics(s, model.costs, coef, t, delta));
    if (options.keep_states) res.states.push_back(s);
  };
  log(s0, 0, 0.0);
  SimplexPoint s = s0, prev = s0;
  for (long t = 1; t <= options.epochs; ++t) {
    SimplexPoint next = s_step_closed_form(s, prev, model);
    double delta = max_abs_diff(next.span(), s.span());
    prev = std::move(s);
    s = std::move(next);
    if (!res.converged_at && delta < options.stop_tol) res.converged_at = t;
    bool stop = options.stop_at_tol && res.converged_at.has_value();
    if (!options.thinned_log || lab_log_epoch(t) || t == options.epochs || stop) log(s, t, delta);
    if (stop) break;
  }
  res.final_s = s;
  res.boundary_absorbed = boundary_absorbed_count(s);
  return res;
}

ExperimentProtocol protocol_from_json(const json& doc) {
  std::vector<std::string> errs;
  if (!doc.is_object()) throw ConfigError("protocol: expected an object");
  static const std::set<std::string> known{"n_creators", "r", "alpha", "beta", "epochs",
                                           "n_inits", "seed", "policies", "dynamics",
                                           "p_min", "p_max", "k"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) errs.push_back(key + ": unknown field");
  ExperimentProtocol p;
  auto num = [&](const char* key, double& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) errs.push_back(std::string(key) + ": expected a number");
    else out = doc[key].get<double>();
  };
  auto integer = [&](const char* key, int& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer()) errs.push_back(std::string(key) + ": expected an integer");
    else out = doc[key].get<int>();
  };
  integer("n_creators", p.n_creators);
  num("r", p.r);
  num("alpha", p.alpha);
  num("beta", p.beta);
  integer("epochs", p.epochs);
  integer("n_inits", p.n_inits);
  num("p_min", p.p_min);
  num("p_max", p.p_max);
  num("k", p.k);
  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
      errs.push_back("seed: expected a nonnegative integer");
    else p.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("policies")) {
    p.policies.clear();
    if (!doc["policies"].is_array()) errs.push_back("policies: expected an array of names");
    else
      for (const auto& e : doc["policies"]) {
        if (e.is_string()) p.policies.push_back(e.get<std::string>());
        else errs.push_back("policies: expected an array of names");
      }
  }
  if (doc.contains("dynamics")) {
    p.dynamics.clear();
    if (!doc["dynamics"].is_array()) errs.push_back("dynamics: expected an array");
    else
      for (const auto& e : doc["dynamics"]) {
        if (e == "ER") p.dynamics.push_back(Dynamic::ER);
        else if (e == "PR") p.dynamics.push_back(Dynamic::PR);
        else errs.push_back("dynamics: expected \"ER\" or \"PR\" entries");
      }
  }
  if (!errs.empty()) throw ConfigError(errs);
  validate_protocol(p);
  return p;
}

json to_json(const ExperimentProtocol& p) {
  json dyn = json::array();
  for (Dynamic d : p.dynamics) dyn.push_back(dynamic_name(d));
  return json{{"n_creators", p.n_creators}, {"r", p.r}, {"alpha", p.alpha},
              {"beta", p.beta}, {"epochs", p.epochs}, {"n_inits", p.n_inits},
              {"seed", p.seed}, {"policies", p.policies}, {"dynamics", dyn},
              {"p_min", p.p_min}, {"p_max", p.p_max}, {"k", p.k}};
}

void validate_protocol(const ExperimentProtocol& p) {
  std::vector<std::string> errs;
  if (p.n_creators < 1) errs.push_back("n_creators: must be >= 1");
  if (!(p.r >= 0.0 && p.r <= 1.0)) errs.push_back("r: must lie in [0,1]");
  for (Dynamic d : p.dynamics)
    if (d == Dynamic::ER && !(p.r < 1.0)) errs.push_back("r: ER requires r<1");
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta)) errs.push_back("alpha/beta: must be finite");
  if (p.epochs < 1) errs.push_back("epochs: must be >= 1");
  if (p.n_inits < 1) errs.push_back("n_inits: must be >= 1");
  if (!(p.p_min > 0.0 && p.p_max >= p.p_min)) errs.push_back("p_min/p_max: need 0 < p_min <= p_max");
  for (const auto& m : power_cost_violations(p.p_min, p.k)) errs.push_back("p_min: " + m);
  if (p.policies.empty()) errs.push_back("policies: must not be empty");
  for (const auto& name : p.policies)
    if (name != "constant" && name != "popularity" && name != "quality" && name != "mixed")
      errs.push_back("policies: unknown policy \"" + name + "\"");
  if (p.dynamics.empty()) errs.push_back("dynamics: must not be empty");
  if (!errs.empty()) throw ConfigError(errs);
}

std::vector<CostModel> protocol_costs(const ExperimentProtocol& p) {
  Rng rng(p.seed, kCostStream);
  std::vector<CostModel> costs;
  for (int j = 0; j < p.n_creators; ++j) costs.push_back(CostModel::power(rng.uniform(p.p_min, p.p_max), p.k));
  return costs;
}

SimplexPoint protocol_init(const ExperimentProtocol& p, int k) {
  Rng rng(p.seed, kRunStreamBase + static_cast<std::uint64_t>(k));
  return rng.dirichlet_ones(static_cast<std::size_t>(p.n_creators));
}

RankingPolicy protocol_policy(const ExperimentProtocol& p, const std::string& name) {
  SimplexPoint mu = SimplexPoint::uniform(static_cast<std::size_t>(p.n_creators));
  if (name == "constant") return ConstantPolicy{mu};
  if (name == "popularity") return PopularityPolicy{mu, p.beta};
  if (name == "quality") return QualityPolicy{mu, p.alpha};
  if (name == "mixed") return MixedPolicy{mu, p.alpha, p.beta};
  throw ConfigError("policies: unknown policy \"" + name + "\"");
}

AggregateReport run_experiment(const ExperimentProtocol& protocol) {
  validate_protocol(protocol);
  const auto costs = protocol_costs(protocol);
  const int n_inits = protocol.n_inits;
  std::vector<SimplexPoint> inits;
  for (int k = 0; k < n_inits; ++k) inits.push_back(protocol_init(protocol, k));

  struct GroupKey {
    std::string policy;
    Dynamic dynamic;
  };
  std::vector<GroupKey> keys;
  for (const auto& name : protocol.policies)
    for (Dynamic d : protocol.dynamics) keys.push_back({name, d});

  const std::size_t n_runs = keys.size() * static_cast<std::size_t>(n_inits);
  std::vector<std::optional<TrajectoryResult>> results(n_runs);
  parallel_for(
      n_runs,
      [&](std::size_t idx) {
        const GroupKey& key = keys[idx / static_cast<std::size_t>(n_inits)];
        const int k = static_cast<int>(idx % static_cast<std::size_t>(n_inits));
        MarketModel model{protocol.r, key.dynamic, protocol_policy(protocol, key.policy), costs};
        TrajectoryOptions opt{protocol.epochs, 1e-12, true, false, false};
        results[idx] = run_trajectory(model, inits[static_cast<std::size_t>(k)], opt);
      },
      protocol.workers);

  AggregateReport report{config_digest(to_json(protocol)), n_inits, {}};
  const std::size_t n_metrics = kMetricNames.size();
  for (std::size_t g = 0; g < keys.size(); ++g) {
    AggregateGroup group{keys[g].policy, keys[g].dynamic, {}, {}, {}, {}, {}, std::nullopt, {}};
    const auto& first = *results[g * static_cast<std::size_t>(n_inits)];
    for (const auto& row : first.rows) group.epochs.push_back(row.epoch);
    const std::size_t n_rows = group.epochs.size();
    for (auto* table : {&group.mean, &group.stdev, &group.min, &group.max})
      table->assign(n_metrics, std::vector<double>(n_rows, 0.0));
    for (std::size_t m = 0; m < n_metrics; ++m)
      for (std::size_t t = 0; t < n_rows; ++t) {
        double sum = 0.0, lo = INFINITY, hi = -INFINITY;
        for (int k = 0; k < n_inits; ++k) {
          double x = metric_value(results[g * static_cast<std::size_t>(n_inits) + static_cast<std::size_t>(k)]->rows[t], m);
          sum += x;
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        double mean = sum / n_inits;
        double ss = 0.0;
        for (int k = 0; k < n_inits; ++k) {
          double x = metric_value(results[g * static_cast<std::size_t>(n_inits) + static_cast<std::size_t>(k)]->rows[t], m);
          ss += (x - mean) * (x - mean);
        }
        group.mean[m][t] = std::clamp(mean, lo, hi);
        group.stdev[m][t] = std::sqrt(ss / n_inits);
        group.min[m][t] = lo;
        group.max[m][t] = hi;
      }
    const auto& phi = group.mean[3];
    std::size_t settle = n_rows - 1;
    while (settle > 0 && std::abs(phi[settle - 1] - phi.back()) < kSettleTolerance) --settle;
    group.settle_epoch = group.epochs[settle];
    for (int k = 0; k < n_inits; ++k)
      group.run_converged_at.push_back(
          results[g * static_cast<std::size_t>(n_inits) + static_cast<std::size_t>(k)]->converged_at);
    report.groups.push_back(std::move(group));
  }
  return report;
}

void write_aggregate_csv(std::ostream& out, const AggregateReport& report) {
  CsvWriter csv(out);
  csv.header({"policy", "dynamic", "epoch", "metric", "mean", "std"});
  for (const auto& g : report.groups)
    for (std::size_t m = 0; m < kMetricNames.size(); ++m)
      for (std::size_t t = 0; t < g.epochs.size(); ++t) {
        csv.cell(g.policy).cell(dynamic_name(g.dynamic)).cell(static_cast<long long>(g.epochs[t]));
        csv.cell(kMetricNames[m]).cell(g.mean[m][t]).cell(g.stdev[m][t]);
        csv.end_row();
      }
}

json experiment_summary(const AggregateReport& report) {
  json groups = json::array();
  std::set<std::string> dyn_names;
  for (const auto& g : report.groups) {
    json initial, final_mean, final_std;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      initial[kMetricNames[m]] = g.mean[m].front();
      final_mean[kMetricNames[m]] = g.mean[m].back();
      final_std[kMetricNames[m]] = g.stdev[m].back();
    }
    json converged = json::array();
    for (const auto& c : g.run_converged_at) converged.push_back(c ? json(*c) : json(nullptr));
    groups.push_back({{"policy", g.policy},
                      {"dynamic", dynamic_name(g.dynamic)},
                      {"runs", g.run_converged_at.size()},
                      {"initial_mean", initial},
                      {"final_mean", final_mean},
                      {"final_std", final_std},
                      {"settle_epoch", g.settle_epoch ? json(*g.settle_epoch) : json(nullptr)},
                      {"run_converged_at", converged}});
    dyn_names.insert(dynamic_name(g.dynamic));
  }
  json orderings;
  for (const auto& dn : dyn_names) {
    for (std::size_t m : {std::size_t{0}, std::size_t{1}, std::size_t{2}}) {
      std::vector<const AggregateGroup*> gs;
      for (const auto& g : report.groups)
        if (dynamic_name(g.dynamic) == dn) gs.push_back(&g);
      std::stable_sort(gs.begin(), gs.end(), [&](const AggregateGroup* a, const AggregateGroup* b) {
        return a->mean[m].back() > b->mean[m].back();
      });
      json names = json::array();
      for (const auto* g : gs) names.push_back(g->policy);
      orderings[dn][kMetricNames[m]] = names;
    }
  }
  return json{{"digest", report.digest},
              {"runs_per_group", report.runs},
              {"groups", groups},
              {"final_orderings_descending", orderings}};
}

const char* dominance_outcome_name(DominanceOutcome outcome) {
  switch (outcome) {
    case DominanceOutcome::Dominated: return "dominated";
    case DominanceOutcome::PremiseUnmet: return "premise_unmet";
    case DominanceOutcome::SlowConvergence: return "slow_convergence";
    case DominanceOutcome::RatioDecreased: return "ratio_decreased";
  }
  return "unknown";
}

std::vector<std::string> dominance_premise(const MarketModel& model, const SimplexPoint& s0,
                                           std::size_t i, std::size_t j) {
  const std::size_t n = model.dim();
  if (i >= n || j >= n || i == j || s0.dim() != n) throw DomainError("invalid creator indices");
  std::vector<std::string> unmet;
  const auto* constant = std::get_if<ConstantPolicy>(&model.policy);
  if (!constant) {
    unmet.push_back("dominance premise is defined for the constant policy only");
    return unmet;
  }
  const double r = model.r;
  const auto& cj = model.costs[j];
  const auto& ci = model.costs[i];
  bool concave = true, better = true;
  for (int m = 1; m <= kPremiseGrid; ++m) {
    double x = static_cast<double>(m) / kPremiseGrid;
    // r x ζ' + (r-1) ζ = ζ (r e + r - 1) with ζ > 0.
    if (!(r * cj.zeta_elasticity(x) + r - 1.0 > 0.0)) concave = false;
    if (!(cj.zeta(x) > ci.zeta(x))) better = false;
  }
  if (!concave) unmet.push_back("concavity condition fails for creator " + std::to_string(j));
  if (!better) unmet.push_back("zeta_j > zeta_i fails on the grid");
  if (!(constant->v[j] > constant->v[i])) unmet.push_back("v_j > v_i fails");
  if (!(s0[j] >= s0[i])) unmet.push_back("s_j^0 >= s_i^0 fails");
  return unmet;
}

namespace {

constexpr double kRatioSlack = 1e-12;

DominanceVerdict run_domination(const MarketModel& model, const SimplexPoint& s0, std::size_t j,
                                const std::vector<std::size_t>& losers, long cap,
                                const std::function<bool(const SimplexPoint&)>& done) {
  DominanceVerdict v{DominanceOutcome::SlowConvergence, {}, 0, 0.0, 0.0, true, s0};
  SimplexPoint s = s0, prev = s0;
  std::vector<double> ratio(losers.size());
  for (std::size_t k = 0; k < losers.size(); ++k) ratio[k] = s[j] / s[losers[k]];
  for (long t = 1; t <= cap; ++t) {
    SimplexPoint next = s_step_closed_form(s, prev, model);
    prev = std::move(s);
    s = std::move(next);
    for (std::size_t k = 0; k < losers.size(); ++k) {
      double rt = s[j] / s[losers[k]];
      if (rt < ratio[k] * (1.0 - kRatioSlack)) v.ratio_monotone = false;
      ratio[k] = rt;
    }
    v.epochs = t;
    if (done(s)) {
      v.outcome = v.ratio_monotone ? DominanceOutcome::Dominated : DominanceOutcome::RatioDecreased;
      break;
    }
  }
  if (!v.ratio_monotone) v.outcome = DominanceOutcome::RatioDecreased;
  double worst = 0.0;
  for (std::size_t i : losers) worst = std::max(worst, s[i]);
  v.final_dominated_share = worst;
  v.final_winner_share = s[j];
  v.final_s = s;
  return v;
}

}  // namespace

DominanceVerdict dominance_study(const MarketModel& model, const SimplexPoint& s0, std::size_t i,
                                 std::size_t j, long epoch_cap) {
  auto unmet = dominance_premise(model, s0, i, j);
  if (!unmet.empty())
    return {DominanceOutcome::PremiseUnmet, unmet, 0, s0[i], s0[j], true, s0};
  return run_domination(model, s0, j, {i}, epoch_cap,
                        [&](const SimplexPoint& s) { return s[i] < kDominatedShare; });
}

DominanceVerdict monopoly_study(const MarketModel& model, const SimplexPoint& s0, std::size_t j,
                                double monopoly_gap, long epoch_cap) {
  std::vector<std::string> unmet;
  std::vector<std::size_t> losers;
  for (std::size_t i = 0; i < model.dim(); ++i) {
    if (i == j) continue;
    losers.push_back(i);
    for (auto& m : dominance_premise(model, s0, i, j)) unmet.push_back(m);
  }
  std::sort(unmet.begin(), unmet.end());
  unmet.erase(std::unique(unmet.begin(), unmet.end()), unmet.end());
  if (!unmet.empty()) return {DominanceOutcome::PremiseUnmet, unmet, 0, 0.0, s0[j], true, s0};
  return run_domination(model, s0, j, losers, epoch_cap,
                        [&](const SimplexPoint& s) { return s[j] > 1.0 - monopoly_gap; });
}

}  // namespace attn
