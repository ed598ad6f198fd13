#include <cmath>

#include "attn/descent.hpp"
#include "attn/dynamics.hpp"
#include "attn/errors.hpp"
#include "attn/potential.hpp"
#include "attn/rng.hpp"
#include "attn/verify.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace attn;

namespace {

std::vector<CostModel> identity_costs(std::size_t n) { return std::vector<CostModel>(n, CostModel::power(0.5, 2)); }

// Direct evaluation with quadrature for the ∫ log zeta term.
double potential_oracle(const PotentialCoefficients& c, const std::vector<double>& s,
                        const std::vector<CostModel>& costs) {
  double total = 0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    double lz = oracle::simpson(
        [&](double w) { return w == 0 ? 0.0 : 2 * w * std::log(costs[j].zeta(w * w)); }, 0.0,
        std::sqrt(s[j]), 20000);
    total += s[j] * std::log(c.sigma[j]) + c.a * lz + (s[j] > 0 ? c.b * s[j] * std::log(s[j]) : 0.0);
  }
  return -total;
}

}  // namespace

TEST_CASE("coefficients per policy column") {
  SimplexPoint v({0.2, 0.8});
  auto c0 = coefficients_for(ConstantPolicy{v}, 0.3);
  CHECK(c0.a == doctest::Approx(0.3));
  CHECK(c0.b == doctest::Approx(-0.7));
  CHECK(c0.sigma[0] == doctest::Approx(0.2));
  auto cp = coefficients_for(PopularityPolicy{v, 0.1}, 0.3);
  CHECK(cp.a == doctest::Approx(0.4));
  CHECK(cp.b == doctest::Approx(-0.6));
  auto cm = coefficients_for(MixedPolicy{v, 0.1, 0.1}, 0.3);
  CHECK(cm.a == doctest::Approx(0.5));
  CHECK(cm.b == doctest::Approx(-0.6));
}

TEST_CASE("specializations with zero exponents give identical potentials") {
  Rng rng(12);
  SimplexPoint mu = rng.dirichlet_ones(4);
  auto costs = random_quadratic_costs(rng, 4);
  auto a = coefficients_for(PopularityPolicy{mu, 0.0}, 0.4);
  auto b = coefficients_for(QualityPolicy{mu, 0.0}, 0.4);
  auto c = coefficients_for(MixedPolicy{mu, 0.0, 0.0}, 0.4);
  for (int i = 0; i < 100; ++i) {
    SimplexPoint s = rng.dirichlet_ones(4);
    double pa = potential_value(a, s, costs);
    CHECK(std::abs(pa - potential_value(b, s, costs)) < 1e-12);
    CHECK(std::abs(pa - potential_value(c, s, costs)) < 1e-12);
  }
}

TEST_CASE("potential value examples") {
  auto costs = identity_costs(2);
  auto c = coefficients_for(ConstantPolicy{SimplexPoint::uniform(2)}, 0.5);
  SimplexPoint half = SimplexPoint::uniform(2);
  CHECK(potential_value(c, half, costs) == doctest::Approx(1.19315).epsilon(1e-5));
  CHECK(potential_value(c, half, costs) ==
        doctest::Approx(potential_oracle(c, half.values(), costs)).epsilon(1e-9));

  Rng rng(9);
  for (std::size_t n : {2u, 3u, 7u}) {
    auto cn = coefficients_for(ConstantPolicy{SimplexPoint::uniform(n)}, 0.5);
    for (int i = 0; i < 20; ++i)
      CHECK(potential_value(cn, rng.dirichlet_ones(n), identity_costs(n)) ==
            doctest::Approx(std::log(double(n)) + 0.5).epsilon(1e-12));
  }
}

TEST_CASE("potential matches quadrature oracle on random power costs") {
  Rng rng(41);
  for (int i = 0; i < 30; ++i) {
    std::vector<CostModel> costs;
    for (int j = 0; j < 3; ++j) costs.push_back(CostModel::power(rng.uniform(0.6, 4), rng.uniform(1.5, 3.5)));
    auto c = coefficients_for(MixedPolicy{rng.dirichlet_ones(3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)},
                              rng.uniform(0.1, 0.9));
    SimplexPoint s = random_interior(rng, 3);
    CHECK(potential_value(c, s, costs) == doctest::Approx(potential_oracle(c, s.values(), costs)).epsilon(1e-7));
  }
}

TEST_CASE("potential gradient examples and finite differences") {
  auto c = coefficients_for(ConstantPolicy{SimplexPoint::uniform(2)}, 0.5);
  auto g = potential_gradient(c, SimplexPoint::uniform(2), identity_costs(2));
  CHECK(g[0] == doctest::Approx(1.19315).epsilon(1e-5));
  CHECK(g[1] == doctest::Approx(1.19315).epsilon(1e-5));
  CHECK_THROWS_AS(potential_gradient(c, SimplexPoint({1.0, 0.0}), identity_costs(2)), DomainError);

  Rng rng(100);
  for (int i = 0; i < 100; ++i) {
    std::size_t n = 2 + rng.index(5);
    auto costs = random_quadratic_costs(rng, n);
    auto coef = coefficients_for(random_policy(rng, n, "mixed", rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                                 rng.uniform(0.05, 0.95));
    SimplexPoint s = random_interior(rng, n);
    auto grad = potential_gradient(coef, s, costs);
    const double h = 1e-6;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> up = s.values(), dn = s.values();
      up[j] += h;
      dn[j] -= h;
      double fd = (potential_value(coef, std::span<const double>(up), costs) -
                   potential_value(coef, std::span<const double>(dn), costs)) /
                  (2 * h);
      CHECK(std::abs(fd - grad[j]) <= 1e-6 * std::max(1.0, std::abs(grad[j])));
    }
  }
}

TEST_CASE("shifting log sigma leaves the mirror step unchanged") {
  Rng rng(3);
  auto costs = random_quadratic_costs(rng, 4);
  auto c = coefficients_for(ConstantPolicy{rng.dirichlet_ones(4)}, 0.4);
  auto shifted = c;
  for (double& x : shifted.sigma) x *= 7.5;
  SimplexPoint s = random_interior(rng, 4);
  auto a = md_step_kl(s, potential_gradient(c, s, costs), 1.3);
  auto b = md_step_kl(s, potential_gradient(shifted, s, costs), 1.3);
  CHECK(max_abs_diff(a.span(), b.span()) < 1e-15);
}

TEST_CASE("decomposition terms") {
  auto costs = identity_costs(3);
  SimplexPoint v({0.2, 0.3, 0.5});
  auto c = coefficients_for(ConstantPolicy{v}, 0.4);
  auto d = potential_decomposition(c, v, costs);
  CHECK(std::abs(d.alignment) < 1e-15);
  auto du = potential_decomposition(c, SimplexPoint::uniform(3), costs);
  CHECK(du.entropy == doctest::Approx(std::log(3.0)));

  Rng rng(6);
  auto quad = random_quadratic_costs(rng, 5);
  SimplexPoint s = random_interior(rng, 5);
  CHECK(potential_decomposition(c.sigma.size() == 5 ? c : coefficients_for(ConstantPolicy{rng.dirichlet_ones(5)}, 0.4),
                                s, quad)
            .production_cost == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 2 + rng.index(6);
    auto costs_n = random_quadratic_costs(rng, n);
    auto coef = coefficients_for(random_policy(rng, n, "mixed", rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                                 rng.uniform(0.0, 0.95));
    SimplexPoint x = random_interior(rng, n);
    auto parts = potential_decomposition(coef, x, costs_n);
    CHECK(std::abs(recompose(parts, coef) - potential_value(coef, x, costs_n)) < 1e-10);
  }
}

TEST_CASE("convexity threshold for quadratic costs") {
  Rng rng(22);
  auto costs = random_quadratic_costs(rng, 3);
  auto all = [](const std::vector<bool>& v) { return std::all_of(v.begin(), v.end(), [](bool b) { return b; }); };
  auto none = [](const std::vector<bool>& v) { return std::none_of(v.begin(), v.end(), [](bool b) { return b; }); };
  for (int i = 1; i < 100; ++i) {
    double x = i / 100.0 * 0.98;
    SimplexPoint s({x, (1 - x) / 2, (1 - x) / 2});
    CHECK(all(convexity_condition(costs, 0.49, s)));
    CHECK(all(convexity_condition(costs, 0.5, s)));
    CHECK(none(convexity_condition(costs, 0.51, s)));
    CHECK(all(convexity_condition(costs, 0.3, s)));
    CHECK(none(convexity_condition(costs, 0.6, s)));
    auto coef = coefficients_for(ConstantPolicy{SimplexPoint::uniform(3)}, 0.3);
    CHECK(all(convexity_condition(coef, costs, s)));
  }
}

TEST_CASE("Bregman smoothness constants") {
  SimplexPoint v = SimplexPoint::uniform(2);
  CHECK(*bregman_smoothness(ConstantPolicy{v}, 0.3) == doctest::Approx(0.7));
  CHECK(*bregman_smoothness(PopularityPolicy{v, 0.1}, 0.3) == doctest::Approx(0.6));
  CHECK(*bregman_smoothness(ConstantPolicy{v}, 0.0) == doctest::Approx(1.0));
  CHECK(*bregman_smoothness(QualityPolicy{v, 0.2}, 0.3) == doctest::Approx(0.7));
  CHECK_FALSE(bregman_smoothness(PopularityPolicy{v, 0.8}, 0.3).has_value());
  CHECK(*bregman_smoothness(coefficients_for(ConstantPolicy{v}, 0.3)) == doctest::Approx(0.7));
}

TEST_CASE("customised policy reproduces the rate-eta mirror step") {
  SimplexPoint v({0.2, 0.3, 0.5});
  double r = 0.4;
  auto target = coefficients_for(ConstantPolicy{v}, r);
  auto one = customise_policy(target, 1.0, r);
  CHECK(std::abs(one.alpha) < 1e-15);
  CHECK(std::abs(one.beta) < 1e-15);
  CHECK(max_abs_diff(one.mu.span(), v.span()) < 1e-15);
  auto two = customise_policy(target, 2.0, r);
  CHECK(two.alpha == doctest::Approx(1.0));
  CHECK(two.beta == doctest::Approx(r - 1));
  CHECK(max_abs_diff(two.mu.span(), oracle::normalize({0.04, 0.09, 0.25})) < 1e-15);

  Rng rng(55);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 2 + rng.index(5);
    auto costs = random_quadratic_costs(rng, n);
    double rr = rng.uniform(0.05, 0.95), eta = rng.uniform(0.2, 3.0);
    auto tgt = coefficients_for(random_policy(rng, n, "mixed", rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                                rng.uniform(0.05, 0.95));
    auto cp = customise_policy(tgt, eta, rr);
    MarketModel m{rr, Dynamic::PR, MixedPolicy{cp.mu, cp.alpha, cp.beta}, costs};
    SimplexPoint s = random_interior(rng, n);
    auto md = md_step_kl(s, potential_gradient(tgt, s, costs), eta);
    CHECK(max_abs_diff(s_step_closed_form(s, std::nullopt, m).span(), md.span()) < 1e-12);
  }
}

TEST_CASE("KL divergence") {
  SimplexPoint p({0.3, 0.7});
  CHECK(kl_divergence(p, p) == 0.0);
  CHECK(kl_divergence(SimplexPoint({1.0, 0.0}), SimplexPoint({0.5, 0.5})) == doctest::Approx(0.693147).epsilon(1e-6));
  CHECK(kl_divergence(SimplexPoint({0.5, 0.5}), SimplexPoint({0.75, 0.25})) ==
        doctest::Approx(0.143841).epsilon(1e-5));
  CHECK(std::isinf(kl_divergence(SimplexPoint({0.5, 0.5}), SimplexPoint({1.0, 0.0}))));
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::size_t n = 2 + rng.index(8);
    SimplexPoint a = rng.dirichlet_ones(n), b = rng.dirichlet_ones(n);
    double kl = kl_divergence(a, b), l1 = l1_distance(a.span(), b.span());
    CHECK(kl >= 0.0);
    CHECK(kl + 1e-12 >= 0.5 * l1 * l1);
  }
}

TEST_CASE("landscape grid") {
  auto costs = identity_costs(3);
  auto flat = coefficients_for(ConstantPolicy{SimplexPoint::uniform(3)}, 0.5);
  for (int R : {2, 5, 40}) {
    auto grid = landscape_grid(flat, costs, R);
    CHECK(grid.size() == std::size_t((R + 1) * (R + 2) / 2));
    for (const auto& row : grid) CHECK(std::abs(row.value - grid[0].value) < 1e-9);
    CHECK(grid.front().index == std::array<int, 3>{0, 0, R});
    CHECK(grid.back().index == std::array<int, 3>{R, 0, 0});
  }
  CHECK_THROWS(landscape_grid(flat, identity_costs(4), 10));
  CHECK_THROWS(landscape_grid(flat, costs, 1));

  std::vector<CostModel> quad{CostModel::power(0.8, 2), CostModel::power(1.7, 2), CostModel::power(3.2, 2)};
  auto coef = coefficients_for(ConstantPolicy{SimplexPoint::uniform(3)}, 0.1);
  const int R = 200;
  auto grid = landscape_grid(coef, quad, R);
  auto minima = lattice_local_minima(grid, R);
  REQUIRE(minima.size() == 1);
  MarketModel m{0.1, Dynamic::PR, ConstantPolicy{SimplexPoint::uniform(3)}, quad};
  SimplexPoint s = SimplexPoint::uniform(3);
  for (int t = 0; t < 2000; ++t) s = s_step_closed_form(s, std::nullopt, m);
  const auto& best = grid[minima[0]];
  for (int j = 0; j < 3; ++j) CHECK(std::abs(best.point[j] - s[j]) <= 1.0 / R);

  auto half = landscape_grid(coefficients_for(ConstantPolicy{SimplexPoint::uniform(3)}, 0.5), quad, R);
  auto argmin = std::min_element(half.begin(), half.end(),
                                 [](const LandscapeRow& a, const LandscapeRow& b) { return a.value < b.value; });
  CHECK(std::min({argmin->index[0], argmin->index[1], argmin->index[2]}) == 0);
  CHECK(std::min({best.index[0], best.index[1], best.index[2]}) > 0);
}
