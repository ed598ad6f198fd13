#include "attn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "attn/errors.hpp"
#include "attn/io.hpp"
#include "attn/rng.hpp"

namespace attn {

using nlohmann::json;

std::string dynamic_name(Dynamic d) { return d == Dynamic::ER ? "ER" : "PR"; }

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back((path.empty() ? std::string("config") : path) + ": " + msg);
  }

  bool object(const json& doc, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!doc.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : doc.items())
      if (!ok.count(key)) fail(join_path(path, key), "unknown field");
    return true;
  }

  const json* field(const json& doc, const std::string& path, const char* key, bool required) {
    auto it = doc.find(key);
    if (it == doc.end()) {
      if (required) fail(join_path(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& doc, const std::string& path, const char* key,
                               bool required = true) {
    const json* f = field(doc, path, key, required);
    if (!f) return std::nullopt;
    if (!f->is_number()) {
      fail(join_path(path, key), "expected a number");
      return std::nullopt;
    }
    return f->get<double>();
  }

  std::optional<long long> integer(const json& doc, const std::string& path, const char* key,
                                   bool required = true) {
    const json* f = field(doc, path, key, required);
    if (!f) return std::nullopt;
    if (!f->is_number_integer()) {
      fail(join_path(path, key), "expected an integer");
      return std::nullopt;
    }
    return f->get<long long>();
  }

  std::optional<std::uint64_t> seed(const json& doc, const std::string& path, const char* key) {
    const json* f = field(doc, path, key, false);
    if (!f) return std::nullopt;
    if (!f->is_number_unsigned() && !(f->is_number_integer() && f->get<long long>() >= 0)) {
      fail(join_path(path, key), "expected a nonnegative 64-bit integer");
      return std::nullopt;
    }
    return f->get<std::uint64_t>();
  }

  std::optional<std::vector<double>> numbers(const json& doc, const std::string& path) {
    if (!doc.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (const auto& e : doc) {
      if (!e.is_number()) {
        fail(path, "expected an array of numbers");
        return std::nullopt;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  // An explicit array or the string "uniform".
  std::optional<SimplexPoint> simplex(const json& doc, const std::string& path, const char* key,
                                      std::size_t n) {
    const json* f = field(doc, path, key, true);
    if (!f) return std::nullopt;
    std::string p = join_path(path, key);
    if (f->is_string() && f->get<std::string>() == "uniform") {
      if (n == 0) {
        fail(p, "\"uniform\" needs a valid n_creators");
        return std::nullopt;
      }
      return SimplexPoint::uniform(n);
    }
    auto v = numbers(*f, p);
    if (!v) return std::nullopt;
    try {
      return SimplexPoint(*v);
    } catch (const Error& e) {
      fail(p, e.what());
      return std::nullopt;
    }
  }

  std::optional<RankingPolicy> policy(const json& doc, const std::string& path, std::size_t n) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
      fail(path, "expected an object with a string \"kind\"");
      return std::nullopt;
    }
    std::string kind = doc["kind"].get<std::string>();
    if (kind == "constant") {
      object(doc, path, {"kind", "v"});
      auto v = simplex(doc, path, "v", n);
      if (v) return ConstantPolicy{*v};
    } else if (kind == "popularity") {
      object(doc, path, {"kind", "mu", "beta"});
      auto mu = simplex(doc, path, "mu", n);
      auto beta = number(doc, path, "beta");
      if (mu && beta) return PopularityPolicy{*mu, *beta};
    } else if (kind == "quality") {
      object(doc, path, {"kind", "mu", "alpha"});
      auto mu = simplex(doc, path, "mu", n);
      auto alpha = number(doc, path, "alpha");
      if (mu && alpha) return QualityPolicy{*mu, *alpha};
    } else if (kind == "mixed") {
      object(doc, path, {"kind", "mu", "alpha", "beta"});
      auto mu = simplex(doc, path, "mu", n);
      auto alpha = number(doc, path, "alpha");
      auto beta = number(doc, path, "beta");
      if (mu && alpha && beta) return MixedPolicy{*mu, *alpha, *beta};
    } else {
      fail(join_path(path, "kind"), "unknown policy kind \"" + kind + "\"");
    }
    return std::nullopt;
  }

  std::optional<CostModel> cost(const json& doc, const std::string& path) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
      fail(path, "expected an object with a string \"kind\"");
      return std::nullopt;
    }
    std::string kind = doc["kind"].get<std::string>();
    try {
      if (kind == "power") {
        object(doc, path, {"kind", "p", "k"});
        auto p = number(doc, path, "p");
        auto k = number(doc, path, "k");
        if (p && k) return CostModel::power(*p, *k);
      } else if (kind == "tabulated") {
        object(doc, path, {"kind", "q", "dcost"});
        const json* q = field(doc, path, "q", true);
        const json* d = field(doc, path, "dcost", true);
        if (q && d) {
          auto qv = numbers(*q, join_path(path, "q"));
          auto dv = numbers(*d, join_path(path, "dcost"));
          if (qv && dv) return CostModel::tabulated(*qv, *dv);
        }
      } else {
        fail(join_path(path, "kind"), "unknown cost kind \"" + kind + "\"");
      }
    } catch (const ConfigError& e) {
      for (const auto& m : e.messages) fail(path, m);
    }
    return std::nullopt;
  }

  std::optional<InitSpec> init(const json& doc, const std::string& path, std::size_t n) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
      fail(path, "expected an object with a string \"kind\"");
      return std::nullopt;
    }
    std::string kind = doc["kind"].get<std::string>();
    if (kind == "uniform") {
      object(doc, path, {"kind"});
      return UniformInit{};
    }
    if (kind == "dirichlet") {
      object(doc, path, {"kind", "seed"});
      return DirichletInit{seed(doc, path, "seed")};
    }
    if (kind == "explicit") {
      object(doc, path, {"kind", "s"});
      auto s = simplex(doc, path, "s", n);
      if (s) return ExplicitInit{*s};
      return std::nullopt;
    }
    fail(join_path(path, "kind"), "unknown init kind \"" + kind + "\"");
    return std::nullopt;
  }
};

json simplex_json(const SimplexPoint& p) { return json(p.values()); }

}  // namespace

RankingPolicy policy_from_json(const json& doc, std::size_t n) {
  Reader rd;
  auto p = rd.policy(doc, "policy", n);
  if (!rd.errors.empty() || !p) throw ConfigError(rd.errors);
  return *p;
}

CostModel cost_from_json(const json& doc) {
  Reader rd;
  auto c = rd.cost(doc, "cost");
  if (!rd.errors.empty() || !c) throw ConfigError(rd.errors);
  return *c;
}

RunConfig run_config_from_json(const json& doc) {
  Reader rd;
  if (!rd.object(doc, "", {"n_creators", "r", "dynamic", "policy", "costs", "init", "epochs",
                           "stop_tol", "seed"}))
    throw ConfigError(rd.errors);

  auto n = rd.integer(doc, "", "n_creators");
  std::size_t dim = n && *n >= 1 ? static_cast<std::size_t>(*n) : 0;
  auto r = rd.number(doc, "", "r");

  std::optional<Dynamic> dynamic;
  if (const json* d = rd.field(doc, "", "dynamic", true)) {
    if (d->is_string() && d->get<std::string>() == "ER") dynamic = Dynamic::ER;
    else if (d->is_string() && d->get<std::string>() == "PR") dynamic = Dynamic::PR;
    else rd.fail("dynamic", "expected \"ER\" or \"PR\"");
  }

  std::optional<RankingPolicy> policy;
  if (const json* p = rd.field(doc, "", "policy", true)) policy = rd.policy(*p, "policy", dim);

  std::vector<CostModel> costs;
  bool costs_ok = false;
  if (const json* c = rd.field(doc, "", "costs", true)) {
    if (!c->is_array()) {
      rd.fail("costs", "expected an array");
    } else {
      costs_ok = true;
      for (std::size_t i = 0; i < c->size(); ++i) {
        auto m = rd.cost((*c)[i], "costs[" + std::to_string(i) + "]");
        if (m) costs.push_back(*m);
        else costs_ok = false;
      }
    }
  }

  std::optional<InitSpec> init = UniformInit{};
  if (const json* i = rd.field(doc, "", "init", false)) init = rd.init(*i, "init", dim);

  auto epochs = rd.integer(doc, "", "epochs", false);
  auto stop_tol = rd.number(doc, "", "stop_tol", false);
  auto seed = rd.seed(doc, "", "seed");

  if (!rd.errors.empty() || !n || !r || !dynamic || !policy || !costs_ok || !init)
    throw ConfigError(rd.errors);

  RunConfig cfg{static_cast<int>(*n), *r, *dynamic, *policy, std::move(costs), *init};
  if (epochs) {
    if (*epochs > INT32_MAX || *epochs < INT32_MIN) throw ConfigError("epochs: out of range");
    cfg.epochs = static_cast<int>(*epochs);
  }
  if (stop_tol) cfg.stop_tol = *stop_tol;
  if (seed) cfg.seed = *seed;
  return cfg;
}

ValidatedConfig validate_config(const RunConfig& cfg) {
  std::vector<std::string> errs;
  auto fail = [&](const std::string& path, const std::string& msg) {
    errs.push_back(path + ": " + msg);
  };
  if (cfg.n_creators < 1) fail("n_creators", "must be >= 1");
  if (!(std::isfinite(cfg.r) && cfg.r >= 0.0 && cfg.r <= 1.0))
    fail("r", "must lie in [0,1], got " + format_double(cfg.r));
  else if (cfg.dynamic == Dynamic::ER && cfg.r >= 1.0)
    fail("r", "ER requires r<1");
  const auto n = static_cast<std::size_t>(std::max(cfg.n_creators, 0));
  if (policy_dim(cfg.policy) != n)
    fail("policy", "dimension " + std::to_string(policy_dim(cfg.policy)) +
                       " does not match n_creators " + std::to_string(cfg.n_creators));
  for (const auto& m : policy_violations(cfg.policy)) fail("policy", m);
  if (cfg.costs.size() != n)
    fail("costs", "length " + std::to_string(cfg.costs.size()) + " does not match n_creators " +
                      std::to_string(cfg.n_creators));
  if (const auto* e = std::get_if<ExplicitInit>(&cfg.init); e && e->s.dim() != n)
    fail("init.s", "dimension " + std::to_string(e->s.dim()) + " does not match n_creators " +
                       std::to_string(cfg.n_creators));
  if (cfg.epochs < 1) fail("epochs", "must be >= 1");
  if (!(cfg.stop_tol > 0.0)) fail("stop_tol", "must be > 0");
  if (!errs.empty()) throw ConfigError(errs);

  SeedPlan seeds{cfg.seed, stream_seed(cfg.seed, kInitStream), stream_seed(cfg.seed, kCostStream),
                 stream_seed(cfg.seed, kPurchaseStream)};
  if (const auto* d = std::get_if<DirichletInit>(&cfg.init); d && d->seed) seeds.init = *d->seed;
  return ValidatedConfig{cfg, canonical(cfg.policy), seeds};
}

MarketModel model_of(const RunConfig& cfg) {
  return MarketModel{cfg.r, cfg.dynamic, cfg.policy, cfg.costs};
}

json to_json(const RankingPolicy& policy) {
  return std::visit(
      overloaded{
          [](const ConstantPolicy& p) { return json{{"kind", "constant"}, {"v", simplex_json(p.v)}}; },
          [](const PopularityPolicy& p) {
            return json{{"kind", "popularity"}, {"mu", simplex_json(p.mu)}, {"beta", p.beta}};
          },
          [](const QualityPolicy& p) {
            return json{{"kind", "quality"}, {"mu", simplex_json(p.mu)}, {"alpha", p.alpha}};
          },
          [](const MixedPolicy& p) {
            return json{{"kind", "mixed"},
                        {"mu", simplex_json(p.mu)},
                        {"alpha", p.alpha},
                        {"beta", p.beta}};
          },
      },
      policy);
}

json to_json(const CostModel& cost) {
  if (const auto* p = cost.as_power()) return json{{"kind", "power"}, {"p", p->p}, {"k", p->k}};
  const auto* t = cost.as_tabulated();
  return json{{"kind", "tabulated"}, {"q", t->knots()}, {"dcost", t->samples()}};
}

json to_json(const RunConfig& cfg) {
  json costs = json::array();
  for (const auto& c : cfg.costs) costs.push_back(to_json(c));
  json init = std::visit(overloaded{
                             [](const UniformInit&) { return json{{"kind", "uniform"}}; },
                             [](const DirichletInit& d) {
                               json j{{"kind", "dirichlet"}};
                               if (d.seed) j["seed"] = *d.seed;
                               return j;
                             },
                             [](const ExplicitInit& e) {
                               return json{{"kind", "explicit"}, {"s", simplex_json(e.s)}};
                             },
                         },
                         cfg.init);
  return json{{"n_creators", cfg.n_creators}, {"r", cfg.r},
              {"dynamic", dynamic_name(cfg.dynamic)}, {"policy", to_json(cfg.policy)},
              {"costs", costs}, {"init", init},
              {"epochs", cfg.epochs}, {"stop_tol", cfg.stop_tol},
              {"seed", cfg.seed}};
}

ValidatedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return validate_config(run_config_from_json(doc));
}

std::string config_digest(const json& canonical) { return hex64(fnv1a64(canonical.dump())); }

SimplexPoint initial_point(const InitSpec& init, std::size_t n, std::uint64_t master_seed) {
  return std::visit(overloaded{
                        [&](const UniformInit&) { return SimplexPoint::uniform(n); },
                        [&](const DirichletInit& d) {
                          Rng rng(d.seed ? *d.seed : stream_seed(master_seed, kInitStream));
                          return rng.dirichlet_ones(n);
                        },
                        [&](const ExplicitInit& e) { return e.s; },
                    },
                    init);
}

}  // namespace attn
