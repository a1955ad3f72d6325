#pragma once

// Deterministic random inputs for property tests.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::vector<double> point(std::size_t d, double lo, double hi) {
    std::vector<double> p(d);
    for (double& v : p) v = uniform(lo, hi);
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

inline constexpr int kCases = 200;

}  // namespace gen
