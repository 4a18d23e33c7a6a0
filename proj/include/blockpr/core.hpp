#pragma once

// Shared types and conventions for the block-circulant phase retrieval library.
//
// Indexing is 0-based throughout. Entry j here corresponds to entry j+1 in the
// usual 1-based, mod-d notation; modular differences (j - i) mod d are taken
// in the signed range that makes |j - i| smallest.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace blockpr {

using Index = Eigen::Index;

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

// The unknown (or recovered) object: d complex amplitudes.
template <typename Real>
using Signal = CVector<Real>;

// Squared-magnitude measurements, laid out mask-major: entry (l, i) sits at
// l * d + i.
template <typename Real>
using MeasurementVector = RVector<Real>;

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A lifted block J_k whose smallest singular value is (numerically) zero.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(Index block, double sigma_min, double sigma_max)
      : std::runtime_error("lifted block " + std::to_string(block) +
                           " is singular: sigma_min=" + std::to_string(sigma_min) +
                           " sigma_max=" + std::to_string(sigma_max)),
        block_(block),
        sigma_min_(sigma_min) {}

  Index block() const noexcept { return block_; }
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  Index block_;
  double sigma_min_;
};

// Non-negative remainder of a mod n.
constexpr Index wrap_index(Index a, Index n) noexcept {
  const Index r = a % n;
  return r < 0 ? r + n : r;
}

template <typename Real>
Real wrap_to_pi(Real angle) {
  constexpr Real two_pi = 2 * std::numbers::pi_v<Real>;
  angle = std::remainder(angle, two_pi);
  return angle;
}

// Position bookkeeping for the lifted vector y of local products
// conj(x_i) * x_j with |j - i mod d| < delta.
//
// The lifted vector has d blocks of width 2*delta - 1. Block c holds
//   t = 0 .. delta-1          : conj(x_c)   * x_{c+t}
//   t = delta .. 2*delta - 2  : conj(x_{c+1}) * x_{c+1 + t - (2*delta - 1)}
// so the diagonal products |x_c|^2 sit at c * (2*delta - 1). For d = 4,
// delta = 2 this is (|x0|^2, conj(x0)x1, conj(x1)x0, |x1|^2, ...,
// conj(x3)x0, conj(x0)x3).
class LiftedLayout {
 public:
  LiftedLayout(Index d, Index delta) : d_(d), delta_(delta) {
    if (delta < 2) throw DomainError("lifted layout: delta must be >= 2");
    if (2 * delta - 1 > d)
      throw DomainError("lifted layout: need 2*delta - 1 <= d (d=" + std::to_string(d) +
                        ", delta=" + std::to_string(delta) + ")");
  }

  Index dimension() const noexcept { return d_; }
  Index delta() const noexcept { return delta_; }
  Index width() const noexcept { return 2 * delta_ - 1; }
  Index size() const noexcept { return width() * d_; }

  // Signed offset (j - i) mod d inside the band, or throws.
  Index offset(Index i, Index j) const {
    const Index raw = wrap_index(j - i, d_);
    if (raw < delta_) return raw;
    if (d_ - raw < delta_) return raw - d_;
    throw DomainError("lifted index: pair (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") lies outside the band |i - j| < " + std::to_string(delta_));
  }

  bool in_band(Index i, Index j) const noexcept {
    const Index raw = wrap_index(j - i, d_);
    return raw < delta_ || d_ - raw < delta_;
  }

  // Position of conj(x_i) * x_j.
  Index index(Index i, Index j) const {
    check_entry(i);
    check_entry(j);
    const Index off = offset(i, j);
    if (off >= 0) return i * width() + off;
    return wrap_index(i - 1, d_) * width() + off + width();
  }

  Index diagonal(Index j) const {
    check_entry(j);
    return j * width();
  }

  // Inverse of index(): the (i, j) pair stored at position k.
  std::pair<Index, Index> pair(Index k) const {
    if (k < 0 || k >= size()) throw DomainError("lifted index: position out of range");
    const Index block = k / width();
    const Index t = k % width();
    if (t < delta_) return {block, wrap_index(block + t, d_)};
    const Index i = wrap_index(block + 1, d_);
    return {i, wrap_index(i + t - width(), d_)};
  }

 private:
  void check_entry(Index i) const {
    if (i < 0 || i >= d_) throw DomainError("lifted index: entry out of range");
  }

  Index d_;
  Index delta_;
};

// Lifted vector paired with its layout.
template <typename Real>
struct LiftedVector {
  LiftedLayout layout;
  CVector<Real> entries;

  const Complex<Real>& operator()(Index i, Index j) const { return entries(layout.index(i, j)); }
  const Complex<Real>& diagonal(Index j) const { return entries(layout.diagonal(j)); }
};

// Exact lifted vector of a known signal.
template <typename Real>
LiftedVector<Real> lift(const Signal<Real>& x, Index delta) {
  LiftedLayout layout(x.size(), delta);
  CVector<Real> y(layout.size());
  for (Index k = 0; k < layout.size(); ++k) {
    const auto [i, j] = layout.pair(k);
    y(k) = std::conj(x(i)) * x(j);
  }
  return {layout, std::move(y)};
}

// Result of aligning an estimate to a reference over the global phase.
//
// theta_star is applied to the reference: absolute_l2 = || x_est - e^{i theta} x ||,
// which equals min over theta of || x - e^{i theta} x_est ||.
template <typename Real>
struct GlobalPhaseError {
  Real theta_star{0};
  Real absolute_l2{0};
  Real reference_norm{0};

  Real relative_l2() const {
    if (reference_norm == Real(0))
      throw DegenerateInputError("relative error undefined for a zero reference");
    return absolute_l2 / reference_norm;
  }

  Real error_db() const {
    const Real rel = relative_l2();
    return 10 * std::log10(rel * rel);
  }
};

template <typename Real>
GlobalPhaseError<Real> global_phase_align(const Signal<Real>& reference,
                                          const Signal<Real>& estimate) {
  if (reference.size() != estimate.size())
    throw DomainError("global_phase_align: length mismatch");
  const Complex<Real> inner = reference.dot(estimate);  // sum conj(x_j) * est_j
  GlobalPhaseError<Real> out;
  out.theta_star = inner == Complex<Real>(0) ? Real(0) : std::arg(inner);
  // || est - e^{i t} x ||^2 = ||est||^2 + ||x||^2 - 2 |<x, est>| at the optimum.
  const Complex<Real> rotation = std::polar(Real(1), out.theta_star);
  out.absolute_l2 = (estimate - rotation * reference).norm();
  out.reference_norm = reference.norm();
  return out;
}

// Gaussian noise variance for a target SNR in dB, given ||Mx||^2 and D.
template <typename Real>
Real snr_to_noise_variance(Real signal_energy, Index measurement_count, Real snr_db) {
  if (!(signal_energy > 0)) throw DomainError("snr_to_noise_variance: energy must be positive");
  if (measurement_count <= 0) throw DomainError("snr_to_noise_variance: D must be positive");
  return signal_energy / (static_cast<Real>(measurement_count) * std::pow(Real(10), snr_db / 10));
}

}  // namespace blockpr
