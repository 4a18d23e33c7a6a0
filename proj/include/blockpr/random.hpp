#pragma once

#include "blockpr/core.hpp"

#include <cstdint>
#include <random>

namespace blockpr {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Derives independent stream seeds from (master, counter)
// so per-trial draws do not depend on execution order.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t counter) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Unit-variance circular complex Gaussian: real and imaginary parts N(0, 1/2).
template <typename Real>
Complex<Real> complex_gaussian(Rng& rng) {
  std::normal_distribution<Real> half(Real(0), std::sqrt(Real(0.5)));
  const Real re = half(rng);
  const Real im = half(rng);
  return {re, im};
}

template <typename Real>
CVector<Real> complex_gaussian_vector(Index n, Rng& rng) {
  CVector<Real> v(n);
  for (Index i = 0; i < n; ++i) v(i) = complex_gaussian<Real>(rng);
  return v;
}

}  // namespace blockpr
