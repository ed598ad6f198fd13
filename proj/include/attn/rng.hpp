#pragma once

#include <cstdint>
#include <random>

#include "attn/simplex.hpp"

namespace attn {

std::uint64_t splitmix64(std::uint64_t x);

// Seed of an independent stream derived from (master, stream index).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

// Platform-independent generator: raw bits from mt19937_64 and hand-written
// conversions, since std distributions differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::uint64_t stream) : engine_(stream_seed(master, stream)) {}

  std::uint64_t bits() { return engine_(); }
  // [0, 1)
  double uniform();
  // (0, 1)
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential();
  double normal();
  std::size_t index(std::size_t n);
  // Uniform on the simplex.
  SimplexPoint dirichlet_ones(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace attn
