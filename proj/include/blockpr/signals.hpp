#pragma once

// Seeded test signal generators.

#include "blockpr/analysis.hpp"
#include "blockpr/core.hpp"
#include "blockpr/random.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace blockpr {

template <typename Real>
Signal<Real> gaussian_signal(Index d, Rng& rng) {
  return complex_gaussian_vector<Real>(d, rng);
}

enum class FlatBackground { gaussian, zero };

// m-flat by construction: one large entry at a random position in every block
// of the m-flat partition. With a zero background the signal is supported on
// exactly those entries.
template <typename Real>
Signal<Real> flat_signal(Index d, Index m, Rng& rng, FlatBackground background = FlatBackground::gaussian) {
  const auto blocks = flat_partition(d, m);
  Signal<Real> x = background == FlatBackground::gaussian ? complex_gaussian_vector<Real>(d, rng)
                                                          : Signal<Real>::Zero(d);
  std::vector<Index> picks;
  for (const auto& [start, len] : blocks) {
    std::uniform_int_distribution<Index> pos(start, start + len - 1);
    picks.push_back(pos(rng));
  }
  for (Index p : picks) x(p) = 0;

  // Spike height t with 4 d t^2 > ||background||^2 + q t^2 clears the
  // flatness threshold ||x|| / (2 sqrt d) in every block.
  const auto q = static_cast<Real>(blocks.size());
  const Real floor = 2 * std::sqrt(x.squaredNorm() / (4 * static_cast<Real>(d) - q));
  const Real top = x.size() ? x.cwiseAbs().maxCoeff() : Real(0);
  std::uniform_real_distribution<Real> unit(0, 1);
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  for (Index p : picks) {
    const Real height = std::max({floor, top, Real(1)}) * (1 + unit(rng));
    x(p) = std::polar(height, two_pi * unit(rng));
  }
  return x;
}

// s nonzero entries at distinct uniformly random positions, complex Gaussian values.
template <typename Real>
Signal<Real> sparse_signal(Index d, Index s, Rng& rng) {
  if (s < 0 || s > d) throw DomainError("sparse_signal: need 0 <= s <= d");
  std::vector<Index> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), Index(0));
  Signal<Real> x = Signal<Real>::Zero(d);
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, d - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    x(idx[static_cast<std::size_t>(i)]) = complex_gaussian<Real>(rng);
  }
  return x;
}

}  // namespace blockpr
