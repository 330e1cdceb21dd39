#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lpnr/lp_core.hpp"

namespace lpnr {

/// splitmix64 finalizer; turns (master seed, stream index) into independent seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

using Rng = std::mt19937_64;

inline cplx random_scalar(Rng& rng, Field field) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double re = g(rng);
  if (field == Field::real) return {re, 0.0};
  return {re, g(rng)};
}

inline std::vector<cplx> random_values(std::size_t n, Rng& rng, Field field) {
  std::vector<cplx> v(n);
  for (auto& c : v) c = random_scalar(rng, field);
  return v;
}

/// Gaussian direction normalized in the weighted p-norm.
inline LpVector random_unit_vector(const SpacePtr& space, Exponent e, Field field, Rng& rng) {
  for (;;) {
    LpVector x(space, e, field, random_values(space->size(), rng, field));
    if (p_norm(x) > 0.0) return normalized(x);
  }
}

/// Positive weights drawn from [0.25, 2).
inline SpacePtr random_space(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.25, 2.0);
  std::vector<double> w(n);
  for (auto& x : w) x = u(rng);
  return make_space(std::move(w));
}

}  // namespace lpnr
