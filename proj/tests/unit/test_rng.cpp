#include <cmath>
#include <set>

#include "attn/rng.hpp"
#include "doctest.h"

using namespace attn;

TEST_CASE("streams are reproducible and distinct") {
  Rng a(5, 1), b(5, 1), c(5, 2), d(6, 1);
  std::uint64_t xa = a.bits();
  CHECK(xa == b.bits());
  CHECK(xa != c.bits());
  CHECK(xa != d.bits());
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 1000; ++s) seeds.insert(stream_seed(1, s));
  CHECK(seeds.size() == 1000);
}

TEST_CASE("uniform, exponential and normal moments") {
  Rng rng(123);
  const int n = 200000;
  double su = 0, se = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    se += rng.exponential();
    double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(se / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("index draws are in range and roughly uniform") {
  Rng rng(9);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.index(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("Dirichlet(1) points are interior and uniform on average") {
  Rng rng(2);
  std::vector<double> mean(4, 0.0);
  for (int i = 0; i < 20000; ++i) {
    auto p = rng.dirichlet_ones(4);
    REQUIRE(p.interior());
    for (int j = 0; j < 4; ++j) mean[j] += p[j] / 20000;
  }
  for (double m : mean) CHECK(m == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("known first output pins the generator across platforms") {
  // mt19937_64 seeded with splitmix-derived seeds; the raw engine is fully
  // specified by the standard, so this value must never change.
  std::mt19937_64 ref(stream_seed(0, 0));
  Rng rng(0, 0);
  CHECK(rng.bits() == ref());
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}
