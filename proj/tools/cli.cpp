#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "attn/config.hpp"
#include "attn/dynamics.hpp"
#include "attn/errors.hpp"
#include "attn/io.hpp"
#include "attn/lab.hpp"
#include "attn/potential.hpp"
#include "attn/rng.hpp"
#include "attn/verify.hpp"

namespace attn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> inits;
  int resolution = 200;
  std::string level = "fast";
  std::vector<std::string> starts;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
}

fs::path bundle_dir(const Options& opt, const std::string& digest, const std::string& sub) {
  fs::path dir = fs::path(opt.out) / (digest + "-" + sub);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

json vec(std::span<const double> x) { return json(std::vector<double>(x.begin(), x.end())); }

RunConfig load_run_config(const Options& opt) {
  RunConfig cfg = run_config_from_json(read_json(opt.config));
  if (opt.seed) cfg.seed = *opt.seed;
  validate_config(cfg);
  return cfg;
}

void metrics_row(CsvWriter& csv, const MetricsRow& row) {
  csv.cell(static_cast<long long>(row.epoch))
      .cell(row.efficiency)
      .cell(row.total_cost)
      .cell(row.entropy)
      .cell(row.potential)
      .cell(row.max_step_delta);
  csv.end_row();
}

json metrics_json(const MetricsRow& row) {
  return json{{"epoch", row.epoch}, {"efficiency", row.efficiency},
              {"total_cost", row.total_cost}, {"entropy", row.entropy},
              {"potential", row.potential}, {"max_step_delta", row.max_step_delta}};
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  RunConfig cfg = load_run_config(opt);
  json canonical = to_json(cfg);
  std::string digest = config_digest(canonical);
  fs::path dir = bundle_dir(opt, digest, "simulate");
  const std::size_t n = static_cast<std::size_t>(cfg.n_creators);
  MarketModel model = model_of(cfg);
  SimplexPoint s0 = initial_point(cfg.init, n, cfg.seed);
  TrajectoryResult res =
      run_trajectory(model, s0, {cfg.epochs, cfg.stop_tol, false, true, false});

  const bool reconstruct = model.r + model.mixed().beta != 0.0 && s0.interior();
  std::ostringstream traj;
  {
    CsvWriter csv(traj);
    std::vector<std::string> cols{"epoch"};
    for (const char* name : {"s", "phi", "q", "v"}) {
      if (!reconstruct && (std::string(name) == "phi" || std::string(name) == "v")) continue;
      for (std::size_t j = 0; j < n; ++j) cols.push_back(name + std::to_string(j));
    }
    csv.header(cols);
    for (std::size_t t = 0; t < res.states.size(); ++t) {
      const SimplexPoint& s = res.states[t];
      csv.cell(static_cast<long long>(res.rows[t].epoch)).cells(s.span());
      std::vector<double> q = quality_update_br(s, model.costs);
      if (reconstruct && s.interior()) {
        const SimplexPoint& prev = t == 0 ? s : res.states[t - 1];
        MarketState st = state_from_s(s, prev, model, res.rows[t].epoch);
        csv.cells(st.phi().span()).cells(q).cells(st.v().span());
      } else if (reconstruct) {
        csv.cells(q);
        for (std::size_t j = 0; j < 2 * n; ++j) csv.cell("");
      } else {
        csv.cells(q);
      }
      csv.end_row();
    }
  }
  std::ostringstream met;
  {
    CsvWriter csv(met);
    csv.header({"epoch", "efficiency", "total_cost", "entropy", "potential", "max_step_delta"});
    for (std::size_t t = 1; t < res.rows.size(); ++t) metrics_row(csv, res.rows[t]);
  }
  json fin{{"digest", digest},
           {"epochs", cfg.epochs},
           {"converged_at", res.converged_at ? json(*res.converged_at) : json(nullptr)},
           {"s", vec(res.final_s.span())},
           {"q", vec(quality_update_br(res.final_s, model.costs))},
           {"tstome_residual", tstome_residual(res.final_s, model)},
           {"boundary_absorbed", res.boundary_absorbed},
           {"initial_metrics", metrics_json(res.rows.front())},
           {"final_metrics", metrics_json(res.rows.back())}};
  if (reconstruct && res.final_s.interior()) {
    const SimplexPoint& prev = res.states.size() > 1 ? res.states[res.states.size() - 2] : res.final_s;
    MarketState st = state_from_s(res.final_s, prev, model, cfg.epochs);
    fin["phi"] = vec(st.phi().span());
    fin["v"] = vec(st.v().span());
  }
  write_text(dir / (digest + "-config.json"), canonical.dump(2) + "\n");
  write_text(dir / (digest + "-trajectory.csv"), traj.str());
  write_text(dir / (digest + "-metrics.csv"), met.str());
  write_text(dir / (digest + "-final.json"), fin.dump(2) + "\n");
  out << dir.string() << "\n";
  return kOk;
}

int cmd_experiment(const Options& opt, std::ostream& out) {
  ExperimentProtocol protocol = protocol_from_json(read_json(opt.config));
  if (opt.inits) protocol.n_inits = *opt.inits;
  if (opt.seed) protocol.seed = *opt.seed;
  validate_protocol(protocol);
  json canonical = to_json(protocol);
  std::string digest = config_digest(canonical);
  fs::path dir = bundle_dir(opt, digest, "experiment");
  AggregateReport report = run_experiment(protocol);
  std::ostringstream agg;
  write_aggregate_csv(agg, report);
  write_text(dir / (digest + "-config.json"), canonical.dump(2) + "\n");
  write_text(dir / (digest + "-aggregate.csv"), agg.str());
  write_text(dir / (digest + "-summary.json"), experiment_summary(report).dump(2) + "\n");
  out << dir.string() << "\n";
  return kOk;
}

int cmd_verify(const Options& opt, std::ostream& out, bool out_given) {
  VerifyLevel level;
  if (opt.level == "fast") level = VerifyLevel::Fast;
  else if (opt.level == "full") level = VerifyLevel::Full;
  else throw ConfigError("--level: expected fast or full");
  std::uint64_t seed = opt.seed.value_or(0);
  auto checks = run_verification(level, seed);
  json doc = to_json(checks);
  json key{{"level", opt.level}, {"seed", seed}};
  doc["level"] = opt.level;
  doc["seed"] = seed;
  std::string text = doc.dump(2) + "\n";
  if (out_given) {
    std::string digest = config_digest(key);
    fs::path dir = bundle_dir(opt, digest, "verify");
    write_text(dir / (digest + "-verification.json"), text);
  }
  out << text;
  return all_gated_pass(checks) ? kOk : kVerificationFailed;
}

SimplexPoint parse_start(const std::string& text) {
  std::vector<double> x;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      x.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--start: cannot parse \"" + text + "\"");
    }
  }
  try {
    return SimplexPoint(x);
  } catch (const Error& e) {
    throw ConfigError(std::string("--start: ") + e.what());
  }
}

int cmd_landscape(const Options& opt, std::ostream& out) {
  RunConfig cfg = load_run_config(opt);
  if (cfg.n_creators != 3) throw ConfigError("n_creators: landscape needs exactly 3 creators");
  if (opt.resolution < 2) throw ConfigError("--resolution: must be >= 2");
  std::vector<SimplexPoint> starts;
  for (const auto& s : opt.starts) {
    starts.push_back(parse_start(s));
    if (starts.back().dim() != 3) throw ConfigError("--start: needs 3 coordinates");
  }
  const int random_starts = opt.inits.value_or(0);
  if (random_starts < 0) throw ConfigError("--inits: must be >= 0");
  for (int k = 0; k < random_starts; ++k)
    starts.push_back(Rng(cfg.seed, kRunStreamBase + static_cast<std::uint64_t>(k)).dirichlet_ones(3));

  json key{{"config", to_json(cfg)}, {"resolution", opt.resolution}};
  json start_json = json::array();
  for (const auto& s : starts) start_json.push_back(vec(s.span()));
  key["starts"] = start_json;
  std::string digest = config_digest(key);
  fs::path dir = bundle_dir(opt, digest, "landscape");

  MarketModel model = model_of(cfg);
  PotentialCoefficients coef = coefficients_for(model.policy, model.r);
  auto grid = landscape_grid(coef, model.costs, opt.resolution);
  std::ostringstream land;
  {
    CsvWriter csv(land, 17);
    csv.header({"b0", "b1", "b2", "phi"});
    for (const auto& row : grid) {
      csv.cells(row.point).cell(row.value);
      csv.end_row();
    }
  }
  write_text(dir / (digest + "-config.json"), key.dump(2) + "\n");
  write_text(dir / (digest + "-landscape.csv"), land.str());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (!starts[k].interior()) throw ConfigError("--start: trajectory starts must be interior");
    TrajectoryResult res = run_trajectory(model, starts[k], {cfg.epochs, cfg.stop_tol, false, true, true});
    std::ostringstream traj;
    CsvWriter csv(traj, 17);
    csv.header({"epoch", "b0", "b1", "b2", "phi"});
    for (std::size_t t = 0; t < res.states.size(); ++t) {
      csv.cell(static_cast<long long>(res.rows[t].epoch)).cells(res.states[t].span()).cell(res.rows[t].potential);
      csv.end_row();
    }
    write_text(dir / (digest + "-trajectory-" + std::to_string(k) + ".csv"), traj.str());
  }
  out << dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-sided attention market simulator"};
  app.require_subcommand(1);
  Options opt;

  auto* sim = app.add_subcommand("simulate", "Run one trajectory from a config file");
  sim->add_option("config", opt.config, "RunConfig JSON")->required();
  sim->add_option("--out", opt.out, "Output root directory");
  sim->add_option("--seed", opt.seed, "Override the master seed");

  auto* exp = app.add_subcommand("experiment", "Run the multi-policy experiment protocol");
  exp->add_option("config", opt.config, "Protocol JSON")->required();
  exp->add_option("--inits", opt.inits, "Initial points per (policy, dynamic)");
  exp->add_option("--out", opt.out, "Output root directory");
  exp->add_option("--seed", opt.seed, "Override the protocol seed");

  auto* ver = app.add_subcommand("verify", "Run the property suites");
  ver->add_option("--level", opt.level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  ver->add_option("--seed", opt.seed, "Seed for random instances");
  auto* ver_out = ver->add_option("--out", opt.out, "Also write the JSON under this directory");

  auto* land = app.add_subcommand("landscape", "Evaluate the potential on a barycentric grid");
  land->add_option("config", opt.config, "RunConfig JSON with 3 creators")->required();
  land->add_option("--resolution", opt.resolution, "Lattice resolution R");
  land->add_option("--out", opt.out, "Output root directory");
  land->add_option("--seed", opt.seed, "Override the master seed");
  land->add_option("--inits", opt.inits, "Number of seeded random trajectory starts");
  land->add_option("--start", opt.starts, "Explicit trajectory start a,b,c (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(opt, out);
    if (*exp) return cmd_experiment(opt, out);
    if (*ver) return cmd_verify(opt, out, ver_out->count() > 0);
    if (*land) return cmd_landscape(opt, out);
  } catch (const ConfigError& e) {
    for (const auto& m : e.messages) err << "error: " << m << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kConfigError;
}

}  // namespace attn::cli
