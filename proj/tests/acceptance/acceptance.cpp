// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion N   run criterion N only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "attn/descent.hpp"
#include "attn/dynamics.hpp"
#include "attn/errors.hpp"
#include "attn/io.hpp"
#include "attn/lab.hpp"
#include "attn/potential.hpp"
#include "attn/rng.hpp"
#include "attn/stochastic.hpp"
#include "attn/verify.hpp"

using namespace attn;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x) { return format_double(x, 4); }

const char* kPolicies[] = {"constant", "popularity", "quality", "mixed"};

MarketModel random_model(Rng& rng, Dynamic dyn, const std::string& kind) {
  static const std::size_t dims[] = {2, 3, 5, 10};
  std::size_t n = dims[rng.index(4)];
  double r = 0.1 * static_cast<double>(1 + rng.index(9));
  double alpha = rng.uniform(-0.5, 0.5), beta = rng.uniform(-0.5, 0.5);
  if (std::abs(r + beta) < 0.05) beta += 0.1;
  if (std::abs(r + alpha + beta) < 0.05) alpha += 0.1;
  return MarketModel{r, dyn, random_policy(rng, n, kind, alpha, beta), random_quadratic_costs(rng, n)};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome c1() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Dynamic dyn = (i / 4) % 2 ? Dynamic::PR : Dynamic::ER;
    worst = std::max(worst, equivalence_check(random_model(rng, dyn, kPolicies[i % 4]), 1, rng.bits()).max_deviation);
  }
  double secs = seconds_since(t0);
  return {worst < 1e-10 && secs < 5.0,
          "max deviation " + fmt(worst) + " (< 1e-10), " + fmt(secs) + " s (< 5)"};
}

Outcome c2() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(202);
  double derived = 0.0, shifted = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::size_t n = 2 + rng.index(5);
    double r = rng.uniform(0.05, 0.95);
    PotentialCoefficients target{rng.dirichlet_ones(n).values(), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    for (double& w : target.sigma) w *= rng.uniform(0.5, 2.0);
    double eta = rng.uniform(0.1, 3.0);
    auto costs = random_quadratic_costs(rng, n);
    SimplexPoint s = random_interior(rng, n);
    SimplexPoint md = md_step_kl(s, potential_gradient(target, s, costs), eta);
    auto deviation = [&](const CustomisedPolicy& c) {
      MarketModel m{r, Dynamic::PR, MixedPolicy{c.mu, c.alpha, c.beta}, costs};
      return max_abs_diff(s_step_closed_form(s, std::nullopt, m).span(), md.span());
    };
    derived = std::max(derived, deviation(customise_policy(target, eta, r)));
    shifted = std::max(shifted, deviation(customise_policy_shifted(target, eta, r)));
  }
  double secs = seconds_since(t0);
  return {derived < 1e-10 && secs < 2.0, "derived map " + fmt(derived) + " (< 1e-10), alternative map " +
                                             fmt(shifted) + " (recorded), " + fmt(secs) + " s (< 2)"};
}

Outcome c3() {
  Rng rng(303);
  double worst_rise = 0.0, worst_gap = -1e300;
  int runs = 0;
  for (double r : {0.1, 0.3, 0.5}) {
    auto costs = random_quadratic_costs(rng, 5);
    SimplexPoint v = rng.dirichlet_ones(5);
    auto coef = coefficients_for(ConstantPolicy{v}, r);
    SimplexPoint x_star = locate_minimiser(coef, costs, SimplexPoint::uniform(5), 1.0 / (1.0 - r));
    double phi_star = potential_value(coef, x_star, costs);
    for (Dynamic dyn : {Dynamic::PR, Dynamic::ER}) {
      MarketModel m{r, dyn, ConstantPolicy{v}, costs};
      double eta = dyn == Dynamic::PR ? 1.0 : 1.0 / (1.0 - r);
      for (int k = 0; k < 50; ++k) {
        SimplexPoint s = rng.dirichlet_ones(5);
        double kl0 = kl_divergence(x_star, s), prev = potential_value(coef, s, costs);
        for (int t = 1; t <= 1000; ++t) {
          s = s_step_closed_form(s, std::nullopt, m);
          double phi = potential_value(coef, s, costs);
          worst_rise = std::max(worst_rise, phi - prev);
          worst_gap = std::max(worst_gap, (phi - phi_star) - kl0 / (eta * t));
          prev = phi;
        }
        ++runs;
      }
    }
  }
  return {worst_rise <= 1e-10 && worst_gap <= 0.0,
          std::to_string(runs) + " runs; max potential rise " + fmt(worst_rise) +
              " (<= 1e-10), max excess over KL/(eta T) " + fmt(worst_gap) + " (<= 0)"};
}

Outcome c4() {
  Rng rng(404);
  auto costs = random_quadratic_costs(rng, 4);
  std::ostringstream detail;
  bool pass = true;
  for (double r_eff : {0.49, 0.5, 0.51}) {
    int holds = 0;
    for (int i = 1; i <= 100; ++i) {
      double x = i / 101.0;
      SimplexPoint s({x, (1 - x) * 0.5, (1 - x) * 0.3, (1 - x) * 0.2});
      auto c = convexity_condition(costs, r_eff, s);
      holds += std::all_of(c.begin(), c.end(), [](bool b) { return b; });
    }
    bool expected = r_eff <= 0.5;
    pass = pass && (expected ? holds == 100 : holds == 0);
    detail << "r_eff=" << r_eff << ": " << holds << "/100 ";
  }
  return {pass, detail.str()};
}

// Three identical creators whose best-response elasticity has a bump near s = 0.3.
std::vector<CostModel> two_basin_costs() {
  auto elasticity = [](double t) { return 0.6 + 4.4 * std::exp(-0.5 * std::pow((t - 0.3) / 0.06, 2)); };
  std::vector<double> xs{0.0};
  for (int i = 1; i <= 60; ++i) xs.push_back(1e-6 * std::pow(1e3, (i - 1) / 59.0));
  for (int i = 1; i <= 999; ++i) xs.push_back(1e-3 + (1.0 - 1e-3) * i / 999.0);
  std::vector<double> q(xs.size()), dc(xs.size());
  for (std::size_t k = 1; k < xs.size(); ++k) {
    double x = xs[k], bump = 0.0;
    const int panels = 4000;
    double h = (1.0 - x) / panels;
    for (int i = 0; i <= panels; ++i) {
      double t = x + i * h, w = (i == 0 || i == panels) ? 1 : (i % 2 ? 4 : 2);
      bump += w * (elasticity(t) - 0.6) / t;
    }
    bump *= h / 3;
    q[k] = std::exp(0.6 * std::log(x) - bump);
    dc[k] = x;
  }
  q.back() = 1.0;
  return std::vector<CostModel>(3, CostModel::tabulated(q, dc));
}

Outcome c5() {
  auto costs = two_basin_costs();
  const double r = 0.38;
  auto coef = coefficients_for(ConstantPolicy{SimplexPoint::uniform(3)}, r);
  const double L = *bregman_smoothness(coef);
  const int R = 150;
  auto grid = landscape_grid(coef, costs, R);
  auto lattice = lattice_local_minima(grid, R);
  std::vector<SimplexPoint> minima;
  for (std::size_t idx : lattice) {
    const auto& p = grid[idx].point;
    SimplexPoint x = locate_minimiser(coef, costs, SimplexPoint({p[0], p[1], p[2]}), 1.0 / L);
    bool seen = std::any_of(minima.begin(), minima.end(),
                            [&](const SimplexPoint& m) { return l1_distance(m.span(), x.span()) < 1e-6; });
    if (!seen) minima.push_back(x);
  }
  if (minima.size() < 2)
    return {false, "only " + std::to_string(minima.size()) + " interior minimiser(s) on the grid"};

  double separation = 1e300;
  for (std::size_t a = 0; a < minima.size(); ++a)
    for (std::size_t b = a + 1; b < minima.size(); ++b)
      separation = std::min(separation, l1_distance(minima[a].span(), minima[b].span()));

  Rng rng(505);
  const double radius = 0.02;
  bool pass = separation > 0.1;
  double worst_rise = 0.0, worst_final = 0.0, min_gamma = 1e300;
  int starts = 0;
  for (std::size_t a = 0; a < minima.size(); ++a) {
    LocalProbe probe = local_probe(coef, costs, minima[a], radius, 64, 17 + a);
    min_gamma = std::min(min_gamma, probe.gamma);
    if (!probe.regular) {
      pass = false;
      continue;
    }
    for (int k = 0; k < 20; ++k) {
      double u = rng.normal(), w = rng.normal(), scale = radius * rng.uniform() / std::hypot(u, w);
      std::vector<double> x = minima[a].values();
      x[0] += scale * u;
      x[1] += scale * w;
      x[2] -= scale * (u + w);
      DescentOptions opts{probe.eta_bound, 400000, 1e-15, minima[a], 1};
      DescentReport rep = run_descent(coef, costs, SimplexPoint(x), opts);
      for (std::size_t t = 1; t < rep.kl_to_reference.size(); ++t)
        worst_rise = std::max(worst_rise, rep.kl_to_reference[t] - rep.kl_to_reference[t - 1]);
      double own = l1_distance(rep.final_point.span(), minima[a].span());
      worst_final = std::max(worst_final, own);
      for (std::size_t b = 0; b < minima.size(); ++b)
        if (b != a && l1_distance(rep.final_point.span(), minima[b].span()) <= own) pass = false;
      ++starts;
    }
  }
  pass = pass && worst_rise <= 1e-14 && worst_final < 1e-6;
  return {pass, std::to_string(minima.size()) + " minimisers, separation " + fmt(separation) + " (> 0.1), min gamma " +
                    fmt(min_gamma) + ", " + std::to_string(starts) + " starts: max KL rise " + fmt(worst_rise) +
                    ", max final L1 " + fmt(worst_final)};
}

Outcome c6() {
  Rng rng(606);
  int converged = 0, runs = 0, domain = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    Dynamic dyn = i % 2 ? Dynamic::PR : Dynamic::ER;
    std::size_t n = 2 + rng.index(9);
    double r = rng.uniform(0.05, 0.9);
    MarketModel m{r, dyn, random_policy(rng, n, kPolicies[(i / 2) % 4], rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)),
                  random_quadratic_costs(rng, n)};
    SimplexPoint s0 = rng.dirichlet_ones(n);
    ++runs;
    std::optional<TrajectoryResult> res;
    try {
      res = run_trajectory(m, s0, {20000, 1e-12, true, false, true});
    } catch (const DomainError&) {
      // a share underflowed to 0 under a negative exponent: not a converged run
      ++domain;
      continue;
    }
    if (!res->converged_at) continue;
    ++converged;
    worst = std::max(worst, tstome_residual(res->final_s, m));
  }
  return {converged > 0 && worst < 1e-9, std::to_string(converged) + "/" + std::to_string(runs) + " converged (" +
                                             std::to_string(domain) + " left the domain), max residual " +
                                             fmt(worst) + " (< 1e-9)"};
}

Outcome c7() {
  Rng rng(707);
  double worst = 0.0;
  const double h = 1e-6;
  for (const char* kind : kPolicies) {
    for (int i = 0; i < 100; ++i) {
      std::size_t n = 2 + rng.index(8);
      auto costs = random_quadratic_costs(rng, n);
      auto coef = coefficients_for(random_policy(rng, n, kind, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                                   rng.uniform(0.05, 0.95));
      SimplexPoint s = random_interior(rng, n);
      auto g = potential_gradient(coef, s, costs);
      double err = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> up = s.values(), dn = s.values();
        up[j] += h;
        dn[j] -= h;
        double fd = (potential_value(coef, std::span<const double>(up), costs) -
                     potential_value(coef, std::span<const double>(dn), costs)) /
                    (2 * h);
        err = std::max(err, std::abs(fd - g[j]));
        scale = std::max(scale, std::abs(g[j]));
      }
      worst = std::max(worst, err / scale);
    }
  }
  return {worst < 1e-6, "max relative error " + fmt(worst) + " (< 1e-6) over 400 points"};
}

Outcome c8() {
  auto t0 = std::chrono::steady_clock::now();
  const SimplexPoint v = SimplexPoint::uniform(3);
  const std::vector<double> q{0.9, 0.6, 0.3};
  bool pass = true;
  std::string detail;
  for (double r : {0.2, 0.5, 0.8}) {
    SimplexPoint tome = popularity_update_er(v, q, r);
    double mean = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
      auto traj = run_stochastic_epoch(v, q, r, PurchaseCounts::ones(3), 200000, stream_seed(808, k), 200000);
      mean += l1_distance(traj.final_phi().span(), tome.span()) / 20.0;
    }
    pass = pass && mean < 0.05;
    detail += "r=" + format_double(r) + ": mean L1 " + fmt(mean) + "; ";
  }
  double secs = seconds_since(t0);
  pass = pass && secs < 30.0;
  return {pass, detail + "(< 0.05), " + fmt(secs) + " s (< 30)"};
}

Outcome c9() {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentProtocol protocol;
  AggregateReport report = run_experiment(protocol);
  const std::size_t eff = 0, cost = 1, ent = 2, pot = 3;
  std::map<std::pair<std::string, Dynamic>, const AggregateGroup*> by;
  for (const auto& g : report.groups) by[{g.policy, g.dynamic}] = &g;

  bool i_ok = true, ii_ok = true, iii_ok = true, iv_ok = true;
  std::string fails;
  for (Dynamic d : protocol.dynamics) {
    const auto* mix = by.at({"mixed", d});
    const auto* con = by.at({"constant", d});
    if (!(mix->mean[eff].back() > con->mean[eff].back())) {
      i_ok = false;
      fails += " (i) " + std::string(dynamic_name(d));
    }
  }
  for (const auto& g : report.groups) {
    std::string tag = g.policy + "/" + dynamic_name(g.dynamic);
    if (!(g.mean[ent].back() < g.mean[ent].front())) {
      ii_ok = false;
      fails += " (ii) entropy " + tag + " " + fmt(g.mean[ent].front()) + "->" + fmt(g.mean[ent].back());
    }
    if (!(g.mean[eff].back() > g.mean[eff].front()) || !(g.mean[cost].back() > g.mean[cost].front())) {
      ii_ok = false;
      fails += " (ii) efficiency/cost " + tag + " " + fmt(g.mean[eff].front()) + "->" + fmt(g.mean[eff].back()) +
               "/" + fmt(g.mean[cost].front()) + "->" + fmt(g.mean[cost].back());
    }
    for (std::size_t m : {eff, cost, ent, pot})
      if (!(g.stdev[m].back() < 1e-3)) {
        iii_ok = false;
        fails += " (iii) " + kMetricNames[m] + " " + tag + " " + fmt(g.stdev[m].back());
      }
  }
  for (const auto& p : protocol.policies) {
    const auto* er = by.at({p, Dynamic::ER});
    const auto* pr = by.at({p, Dynamic::PR});
    if (!er->settle_epoch || !pr->settle_epoch || *er->settle_epoch > *pr->settle_epoch) {
      iv_ok = false;
      fails += " (iv) " + p;
    }
  }
  double secs = seconds_since(t0);
  bool pass = i_ok && ii_ok && iii_ok && iv_ok && secs < 60.0;
  auto mark = [](bool b) { return b ? "ok" : "FAIL"; };
  return {pass, std::string("(i) ") + mark(i_ok) + " (ii) " + mark(ii_ok) + " (iii) " + mark(iii_ok) + " (iv) " +
                    mark(iv_ok) + ", " + fmt(secs) + " s (< 60)" + (fails.empty() ? "" : ";" + fails)};
}

Outcome c10() {
  std::vector<CostModel> costs{CostModel::power(2, 2), CostModel::power(1, 2), CostModel::power(1.5, 2)};
  MarketModel m{0.7, Dynamic::PR, ConstantPolicy{SimplexPoint({0.3, 0.4, 0.3})}, costs};
  DominanceVerdict dom = dominance_study(m, SimplexPoint({0.3, 0.35, 0.35}), 0, 1);
  MarketModel mono{0.7, Dynamic::ER, ConstantPolicy{SimplexPoint({0.2, 0.5, 0.3})}, costs};
  DominanceVerdict win = monopoly_study(mono, SimplexPoint({0.3, 0.4, 0.3}), 1);
  bool pass = dom.outcome == DominanceOutcome::Dominated && dom.ratio_monotone && dom.final_dominated_share < 1e-6 &&
              win.outcome == DominanceOutcome::Dominated && win.final_winner_share > 1 - 1e-5;
  return {pass, std::string("dominance ") + dominance_outcome_name(dom.outcome) + " after " +
                    std::to_string(dom.epochs) + " epochs, share " + fmt(dom.final_dominated_share) +
                    "; monopoly " + dominance_outcome_name(win.outcome) + ", winner share " +
                    format_double(win.final_winner_share, 10)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"md_equivalence", c1},       {"customised_policy", c2},    {"monotone_descent_rate", c3},
    {"convexity_threshold", c4},  {"local_convergence", c5},    {"equilibrium_residual", c6},
    {"gradient_correctness", c7}, {"stochastic_agreement", c8}, {"experiment_trends", c9},
    {"dominance", c10}};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(kCriteria.size())) {
    std::cerr << "criterion must be in 1.." << kCriteria.size() << "\n";
    return 2;
  }
  bool all = true;
  for (std::size_t k = 0; k < kCriteria.size(); ++k) {
    if (only && static_cast<int>(k) + 1 != only) continue;
    Outcome o;
    try {
      o = kCriteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << k + 1 << " " << kCriteria[k].first << ": " << (o.pass ? "PASS" : "FAIL") << " - "
              << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
