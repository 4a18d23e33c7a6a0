#pragma once

#include "blockpr/core.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>

namespace blockpr {

// Unitary DFT helpers on top of Eigen's FFT module.
//   forward: X_k = d^{-1/2} sum_r e^{-2 pi i k r / d} x_r
//   inverse: x_r = d^{-1/2} sum_k e^{+2 pi i k r / d} X_k
template <typename Real>
class UnitaryFft {
 public:
  CVector<Real> forward(const CVector<Real>& x) {
    CVector<Real> out(x.size());
    fft_.fwd(out, x);
    out /= std::sqrt(static_cast<Real>(x.size()));
    return out;
  }

  CVector<Real> inverse(const CVector<Real>& x) {
    CVector<Real> out(x.size());
    fft_.inv(out, x);  // scaled by 1/n
    out *= std::sqrt(static_cast<Real>(x.size()));
    return out;
  }

  // Column-wise transforms of an n x cols block, out of place and without the
  // unitary scaling: forward is unscaled and inverse divides by n, so the pair
  // composes to the identity. The forward input is real.
  void forward_real_columns(const Real* src, Index n, Index cols, CMatrix<Real>& out) {
    out.resize(n, cols);
    for (Index c = 0; c < cols; ++c) fft_.fwd(out.col(c).data(), src + c * n, n);
  }

  void inverse_columns(const CMatrix<Real>& a, CMatrix<Real>& out) {
    out.resize(a.rows(), a.cols());
    for (Index c = 0; c < a.cols(); ++c) fft_.inv(out.col(c).data(), a.col(c).data(), a.rows());
  }

 private:
  Eigen::FFT<Real> fft_;
};

// Dense unitary DFT matrix F_{ij} = n^{-1/2} e^{-2 pi i i j / n}.
template <typename Real>
CMatrix<Real> dft_matrix(Index n) {
  CMatrix<Real> f(n, n);
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  const Real scale = 1 / std::sqrt(static_cast<Real>(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      f(i, j) = std::polar(scale, -two_pi * static_cast<Real>((i * j) % n) / static_cast<Real>(n));
  return f;
}

}  // namespace blockpr
