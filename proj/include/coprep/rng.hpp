#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "coprep/types.hpp"

namespace coprep {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. mt19937_64 is fully specified by the standard
// and every distribution below is spelled out explicitly, so identical seeds
// give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Modulo bias is irrelevant here.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  // Standard normal via Box-Muller (cosine branch only).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec3d normal3() { return {normal(), normal(), normal()}; }

  VecXd normal_vector(int dim) {
    VecXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  VecXd random_unit_vector(int dim) {
    VecXd v = normal_vector(dim);
    while (v.norm() < 1e-9) v = normal_vector(dim);
    return v / v.norm();
  }

  // Independent stream derived from this one's seed and a caller tag.
  Rng fork(std::uint64_t tag) const { return Rng(splitmix64(seed_ ^ splitmix64(tag + 0x51ed2701ull))); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace coprep
