#pragma once

#include "blockpr/core.hpp"

#include <cmath>
#include <numbers>

namespace blockpr {

// Closed-form spectrum of the lifted blocks for the damped Fourier masks:
// J_k = F_{2 delta - 1} diag(s(k, .)). Row k is the block index (0-based, the
// frequency k/d), column j the 0-based position in the block.
template <typename Real>
CMatrix<Real> s_table(Index d, Index delta, Real a) {
  if (delta < 2 || 2 * delta - 1 > d) throw DomainError("s_table: need 2 <= delta, 2*delta - 1 <= d");
  if (!(a > 0)) throw DomainError("s_table: damping must be positive");
  const Index width = 2 * delta - 1;
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  const Real decay = std::exp(-2 / a);
  CMatrix<Real> s(d, width);
  for (Index k = 0; k < d; ++k) {
    const auto w = [&](Index power) {
      return std::polar(Real(1), two_pi * static_cast<Real>(wrap_index(k * power, d)) / static_cast<Real>(d));
    };
    const Complex<Real> denom = Real(1) - decay * w(1);
    for (Index jj = 1; jj <= width; ++jj) {
      const auto j = static_cast<Real>(jj);
      const auto dl = static_cast<Real>(delta);
      Complex<Real> value;
      if (jj <= delta) {
        const Index n = delta - jj + 1;
        value = std::exp(-(j + 1) / a) *
                (Real(1) - std::exp(-2 * static_cast<Real>(n) / a) * w(n)) / denom;
      } else {
        const Index n = jj - delta;
        value = std::exp(-(2 * (dl + 1) - j) / a) * w(2 * delta - jj - 1) *
                (Real(1) - std::exp(-2 * static_cast<Real>(n) / a) * w(n)) / denom;
      }
      s(k, jj - 1) = value;
    }
  }
  return s;
}

// |s(k, j)| from the cosine form of the same expression; an independent route
// to the moduli (and hence to the block singular values).
template <typename Real>
RMatrix<Real> s_modulus_table(Index d, Index delta, Real a) {
  const Index width = 2 * delta - 1;
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  RMatrix<Real> out(d, width);
  for (Index k = 0; k < d; ++k) {
    const Real theta = two_pi * static_cast<Real>(k) / static_cast<Real>(d);
    const Real den = 1 + std::exp(-4 / a) - 2 * std::exp(-2 / a) * std::cos(theta);
    for (Index jj = 1; jj <= width; ++jj) {
      const Real n = jj <= delta ? static_cast<Real>(delta - jj + 1) : static_cast<Real>(jj - delta);
      const Real lead = jj <= delta ? std::exp(-static_cast<Real>(jj + 1) / a)
                                    : std::exp(-static_cast<Real>(2 * (delta + 1) - jj) / a);
      const Real num = 1 + std::exp(-4 * n / a) - 2 * std::exp(-2 * n / a) * std::cos(n * theta);
      out(k, jj - 1) = lead * std::sqrt(num / den);
    }
  }
  return out;
}

// Singular value bounds for every block when a >= 4.
template <typename Real>
Real block_sigma_upper_bound(Real a) {
  return 3 * a * std::exp(-2 / a);
}

template <typename Real>
Real block_sigma_lower_bound(Index delta, Real a) {
  return Real(7) / (20 * a) * std::exp(-static_cast<Real>(delta + 1) / a);
}

// Condition number bound for a = max(4, (delta - 1)/2).
template <typename Real>
Real kappa_upper_bound(Index delta) {
  const Real e2 = std::exp(Real(2));
  const Real dm1 = static_cast<Real>(delta - 1);
  return std::max(144 * e2, 9 * e2 / 4 * dm1 * dm1);
}

}  // namespace blockpr
