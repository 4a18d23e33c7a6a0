#pragma once

// Local correlation masks, the forward measurement model, additive noise,
// and the random unitary flattening operator W = P F B.

#include "blockpr/core.hpp"
#include "blockpr/fft.hpp"
#include "blockpr/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace blockpr {

enum class MaskKind { deterministic_fourier, random_gaussian, custom };

// L masks of length d, each supported on its first delta entries. Only the
// support is stored: row l of `support` holds (m_l)_0 .. (m_l)_{delta-1}.
template <typename Real>
struct MaskEnsemble {
  Index d = 0;
  Index delta = 0;
  MaskKind kind = MaskKind::custom;
  Real damping = 0;        // deterministic_fourier only
  double gamma = 1.0;      // random_gaussian only
  std::uint64_t seed = 0;  // random_gaussian only
  CMatrix<Real> support;

  Index count() const noexcept { return support.rows(); }
  Index lifted_width() const noexcept { return 2 * delta - 1; }
  Index measurement_count() const noexcept { return count() * d; }

  CVector<Real> mask(Index l) const {
    CVector<Real> m = CVector<Real>::Zero(d);
    m.head(delta) = support.row(l).transpose();
    return m;
  }
};

namespace detail {

inline void check_mask_dimensions(Index d, Index delta) {
  if (delta < 2) throw DomainError("masks: delta must be >= 2");
  if (2 * delta - 1 > d)
    throw DomainError("masks: need 2*delta - 1 <= d (d=" + std::to_string(d) +
                      ", delta=" + std::to_string(delta) + ")");
}

}  // namespace detail

template <typename Real>
Real default_damping(Index delta) {
  return std::max(Real(4), static_cast<Real>(delta - 1) / 2);
}

// Exponentially damped windowed Fourier masks
//   (m_l)_i = e^{-(i+1)/a} (2 delta - 1)^{-1/4} e^{2 pi i * i * l / (2 delta - 1)},  i < delta
// for l = 0 .. 2 delta - 2 (0-based i and l). Default a = max(4, (delta - 1)/2).
template <typename Real>
MaskEnsemble<Real> build_deterministic_masks(Index d, Index delta,
                                             std::optional<Real> damping = std::nullopt) {
  detail::check_mask_dimensions(d, delta);
  const Real a = damping.value_or(default_damping<Real>(delta));
  if (!(a > 0)) throw DomainError("masks: damping must be positive");

  const Index count = 2 * delta - 1;
  const Real norm = 1 / std::pow(static_cast<Real>(count), Real(0.25));
  const Real two_pi = 2 * std::numbers::pi_v<Real>;

  MaskEnsemble<Real> ens;
  ens.d = d;
  ens.delta = delta;
  ens.kind = MaskKind::deterministic_fourier;
  ens.damping = a;
  ens.support.resize(count, delta);
  for (Index l = 0; l < count; ++l)
    for (Index i = 0; i < delta; ++i)
      ens.support(l, i) = std::polar(norm * std::exp(-static_cast<Real>(i + 1) / a),
                                     two_pi * static_cast<Real>((i * l) % count) /
                                         static_cast<Real>(count));
  return ens;
}

// Number of random masks for oversampling factor gamma: ceil(gamma * (2 delta - 1)).
inline Index random_mask_count(Index delta, double gamma) {
  const double exact = gamma * static_cast<double>(2 * delta - 1);
  return static_cast<Index>(std::ceil(exact - 1e-9));
}

// i.i.d. unit-variance complex Gaussian support entries, reproducible per seed.
template <typename Real>
MaskEnsemble<Real> build_random_masks(Index d, Index delta, double gamma, std::uint64_t seed) {
  detail::check_mask_dimensions(d, delta);
  if (!(gamma >= 1.0)) throw DomainError("masks: oversampling factor must be >= 1");

  MaskEnsemble<Real> ens;
  ens.d = d;
  ens.delta = delta;
  ens.kind = MaskKind::random_gaussian;
  ens.gamma = gamma;
  ens.seed = seed;
  const Index count = random_mask_count(delta, gamma);
  ens.support.resize(count, delta);
  Rng rng(seed);
  for (Index l = 0; l < count; ++l)
    for (Index i = 0; i < delta; ++i) ens.support(l, i) = complex_gaussian<Real>(rng);
  return ens;
}

// Arbitrary user-supplied support rows (count x delta).
template <typename Real>
MaskEnsemble<Real> make_custom_masks(Index d, const CMatrix<Real>& support) {
  detail::check_mask_dimensions(d, support.cols());
  if (support.rows() < 2 * support.cols() - 1)
    throw DomainError("masks: need at least 2*delta - 1 masks");
  MaskEnsemble<Real> ens;
  ens.d = d;
  ens.delta = support.cols();
  ens.kind = MaskKind::custom;
  ens.support = support;
  return ens;
}

// (b_l)_r = | sum_k conj((m_l)_k) x_{(r + k) mod d} |^2, laid out at l * d + r.
template <typename Real>
MeasurementVector<Real> correlation_measure(const Signal<Real>& x, const MaskEnsemble<Real>& ens) {
  if (x.size() != ens.d) throw DomainError("correlation_measure: signal length does not match masks");
  const Index d = ens.d;
  MeasurementVector<Real> b(ens.measurement_count());
  for (Index l = 0; l < ens.count(); ++l) {
    for (Index r = 0; r < d; ++r) {
      Complex<Real> acc(0);
      for (Index k = 0; k < ens.delta; ++k)
        acc += std::conj(ens.support(l, k)) * x(wrap_index(r + k, d));
      b(l * d + r) = std::norm(acc);
    }
  }
  return b;
}

template <typename Real>
struct NoisyMeasurements {
  MeasurementVector<Real> values;
  RVector<Real> noise;
};

// Adds i.i.d. real N(0, sigma^2) noise with sigma^2 chosen so that
// 10 log10(||Mx||^2 / (D sigma^2)) = snr_db. For noiseless input ||Mx||^2 is
// the sum of the measurements. snr_db = +inf adds nothing.
template <typename Real>
NoisyMeasurements<Real> add_noise(const MeasurementVector<Real>& b, Real snr_db, std::uint64_t seed) {
  NoisyMeasurements<Real> out{b, RVector<Real>::Zero(b.size())};
  if (std::isinf(snr_db) && snr_db > 0) return out;
  const Real variance = snr_to_noise_variance<Real>(b.sum(), b.size(), snr_db);
  Rng rng(seed);
  std::normal_distribution<Real> gauss(Real(0), std::sqrt(variance));
  for (Index i = 0; i < b.size(); ++i) out.noise(i) = gauss(rng);
  out.values += out.noise;
  return out;
}

// W = P F B: random +-1 diagonal B, unitary DFT F, uniformly random
// permutation P with (P v)_i = v_{perm[i]}. Unitary; W^{-1} = W^*.
template <typename Real>
class FlatteningOperator {
 public:
  static FlatteningOperator random(Index d, std::uint64_t seed) {
    if (d < 2) throw DomainError("flattening: d must be >= 2");
    FlatteningOperator w;
    w.d_ = d;
    w.identity_ = false;
    w.signs_.resize(d);
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < d; ++i) w.signs_(i) = coin(rng) ? Real(1) : Real(-1);
    w.perm_.resize(static_cast<std::size_t>(d));
    std::iota(w.perm_.begin(), w.perm_.end(), Index(0));
    // Fisher-Yates.
    for (Index i = d - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i);
      std::swap(w.perm_[static_cast<std::size_t>(i)], w.perm_[static_cast<std::size_t>(pick(rng))]);
    }
    return w;
  }

  static FlatteningOperator identity(Index d) {
    FlatteningOperator w;
    w.d_ = d;
    w.identity_ = true;
    w.signs_ = RVector<Real>::Ones(d);
    w.perm_.resize(static_cast<std::size_t>(d));
    std::iota(w.perm_.begin(), w.perm_.end(), Index(0));
    return w;
  }

  Index dimension() const noexcept { return d_; }
  bool is_identity() const noexcept { return identity_; }
  const RVector<Real>& signs() const noexcept { return signs_; }
  const std::vector<Index>& permutation() const noexcept { return perm_; }

  CVector<Real> apply(const CVector<Real>& x) const {
    check(x);
    if (identity_) return x;
    UnitaryFft<Real> fft;
    const CVector<Real> spectrum = fft.forward(signs_.template cast<Complex<Real>>().cwiseProduct(x));
    CVector<Real> out(d_);
    for (Index i = 0; i < d_; ++i) out(i) = spectrum(perm_[static_cast<std::size_t>(i)]);
    return out;
  }

  CVector<Real> apply_inverse(const CVector<Real>& y) const {
    check(y);
    if (identity_) return y;
    CVector<Real> unpermuted(d_);
    for (Index i = 0; i < d_; ++i) unpermuted(perm_[static_cast<std::size_t>(i)]) = y(i);
    UnitaryFft<Real> fft;
    return signs_.template cast<Complex<Real>>().cwiseProduct(fft.inverse(unpermuted));
  }

  // Dense d x d matrix; small d only.
  CMatrix<Real> dense() const {
    if (d_ > 1024) throw DomainError("flattening: dense materialization refused for d > 1024");
    CMatrix<Real> w(d_, d_);
    for (Index c = 0; c < d_; ++c) w.col(c) = apply(CVector<Real>::Unit(d_, c));
    return w;
  }

 private:
  void check(const CVector<Real>& v) const {
    if (v.size() != d_) throw DomainError("flattening: length mismatch");
  }

  Index d_ = 0;
  bool identity_ = true;
  RVector<Real> signs_;
  std::vector<Index> perm_;
};

}  // namespace blockpr
