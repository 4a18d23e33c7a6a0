#pragma once

// Flatness, conditioning, and dense brute-force oracles.

#include "blockpr/closed_form.hpp"
#include "blockpr/core.hpp"
#include "blockpr/fft.hpp"
#include "blockpr/lifted_solver.hpp"
#include "blockpr/masks.hpp"

#include <vector>

namespace blockpr {

struct FlatBlock {
  Index start = 0;
  Index length = 0;
  double max_abs = 0;
};

struct FlatnessReport {
  Index m = 0;
  bool is_flat = false;
  double threshold = 0;
  std::vector<FlatBlock> blocks;
};

// Contiguous partition of [0, d) into floor(d/m) blocks whose lengths differ
// by at most one, longer blocks first. When d mod m <= floor(d/m) (always the
// case for m <= sqrt(d)) the lengths are m + 1 and m.
inline std::vector<std::pair<Index, Index>> flat_partition(Index d, Index m) {
  if (m < 1 || m > d) throw DomainError("flatness: need 1 <= m <= d");
  const Index count = d / m;
  const Index base = d / count;
  const Index longer = d % count;
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(count));
  Index start = 0;
  for (Index b = 0; b < count; ++b) {
    const Index len = base + (b < longer ? 1 : 0);
    out.emplace_back(start, len);
    start += len;
  }
  return out;
}

template <typename Real>
FlatnessReport is_m_flat(const Signal<Real>& x, Index m) {
  FlatnessReport rep;
  rep.m = m;
  rep.threshold = static_cast<double>(x.norm()) / (2 * std::sqrt(static_cast<double>(x.size())));
  rep.is_flat = true;
  for (const auto& [start, len] : flat_partition(x.size(), m)) {
    const double top = static_cast<double>(x.segment(start, len).cwiseAbs().maxCoeff());
    rep.blocks.push_back({start, len, top});
    if (!(top >= rep.threshold)) rep.is_flat = false;
  }
  return rep;
}

struct ConditionReport {
  double kappa = 0;
  std::vector<double> sigma_max;  // per block J_k
  std::vector<double> sigma_min;
};

// kappa(M') = max_k sigma_1(J_k) / min_k sigma_min(J_k). M' is block diagonal
// under a unitary change of basis, so these are its extreme singular values.
template <typename Real>
ConditionReport condition_number(const LiftedSystem<Real>& sys) {
  sys.require_invertible();
  ConditionReport rep;
  const auto& hi = sys.block_sigma_max();
  const auto& lo = sys.block_sigma_min();
  rep.sigma_max.assign(hi.data(), hi.data() + hi.size());
  rep.sigma_min.assign(lo.data(), lo.data() + lo.size());
  rep.kappa = static_cast<double>(hi.maxCoeff() / lo.minCoeff());
  return rep;
}

// Dense materializations for testing against the factored path.
template <typename Real>
struct DenseOracle {
  CMatrix<Real> measurement;  // M, (L d) x d, mask-major rows
  CMatrix<Real> lifted;       // M', (L d) x ((2 delta - 1) d), shift-major rows
  CMatrix<Real> permutation;  // P with P |Mx|^2 = M' y
  CMatrix<Real> fourier_rows;     // U_L
  CMatrix<Real> fourier_columns;  // U_{2 delta - 1}
  CMatrix<Real> diagonalized;     // U_L^* M' U_{2 delta - 1}
};

inline constexpr Index kDenseOracleMaxDimension = 64;

// Block Fourier matrix U_alpha: d x d grid of alpha x alpha identity blocks,
// block (p, q) scaled by e^{2 pi i p q / d} / sqrt(d).
template <typename Real>
CMatrix<Real> block_fourier(Index d, Index alpha) {
  const Real two_pi = 2 * std::numbers::pi_v<Real>;
  const Real scale = 1 / std::sqrt(static_cast<Real>(d));
  CMatrix<Real> u = CMatrix<Real>::Zero(alpha * d, alpha * d);
  for (Index p = 0; p < d; ++p)
    for (Index q = 0; q < d; ++q) {
      const Complex<Real> w = std::polar(scale, two_pi * static_cast<Real>(wrap_index(p * q, d)) / static_cast<Real>(d));
      for (Index i = 0; i < alpha; ++i) u(p * alpha + i, q * alpha + i) = w;
    }
  return u;
}

// The blocks M'_1 .. M'_delta entry by entry, using 1-based (mask i, block l,
// column j):
//   m_i(l) conj(m_i(j + l - 1))              1 <= j <= delta - l + 1
//   m_i(l + 1) conj(m_i(l + j - 2 delta + 1)) 2 delta - l <= j, l < delta
//   0                                         otherwise
template <typename Real>
std::vector<CMatrix<Real>> lifted_blocks_entrywise(const MaskEnsemble<Real>& ens) {
  const Index delta = ens.delta;
  const Index width = 2 * delta - 1;
  const auto m = [&](Index i, Index k) { return ens.support(i - 1, k - 1); };
  std::vector<CMatrix<Real>> out;
  for (Index l = 1; l <= delta; ++l) {
    CMatrix<Real> blk = CMatrix<Real>::Zero(ens.count(), width);
    for (Index i = 1; i <= ens.count(); ++i)
      for (Index j = 1; j <= width; ++j) {
        if (j <= delta - l + 1)
          blk(i - 1, j - 1) = m(i, l) * std::conj(m(i, j + l - 1));
        else if (j >= 2 * delta - l && l < delta)
          blk(i - 1, j - 1) = m(i, l + 1) * std::conj(m(i, l + j - 2 * delta + 1));
      }
    out.push_back(std::move(blk));
  }
  return out;
}

template <typename Real>
DenseOracle<Real> dense_oracle(const MaskEnsemble<Real>& ens) {
  const Index d = ens.d;
  if (d > kDenseOracleMaxDimension)
    throw DomainError("dense_oracle: refused for d > " + std::to_string(kDenseOracleMaxDimension));
  const Index rows = ens.count();
  const Index width = ens.lifted_width();

  DenseOracle<Real> o;
  o.measurement = CMatrix<Real>::Zero(rows * d, d);
  for (Index l = 0; l < rows; ++l)
    for (Index r = 0; r < d; ++r)
      for (Index k = 0; k < ens.delta; ++k)
        o.measurement(l * d + r, wrap_index(r + k, d)) = std::conj(ens.support(l, k));

  const auto blocks = lifted_blocks_entrywise(ens);
  o.lifted = CMatrix<Real>::Zero(rows * d, width * d);
  for (Index r = 0; r < d; ++r)
    for (Index s = 0; s < ens.delta; ++s)
      o.lifted.block(r * rows, wrap_index(r + s, d) * width, rows, width) += blocks[static_cast<std::size_t>(s)];

  o.permutation = CMatrix<Real>::Zero(rows * d, rows * d);
  for (Index l = 0; l < rows; ++l)
    for (Index r = 0; r < d; ++r) o.permutation(r * rows + l, l * d + r) = 1;

  o.fourier_rows = block_fourier<Real>(d, rows);
  o.fourier_columns = block_fourier<Real>(d, width);
  o.diagonalized = o.fourier_rows.adjoint() * o.lifted * o.fourier_columns;
  return o;
}

// Frobenius norm of everything outside the d diagonal blocks (each rows x cols).
template <typename Real>
Real off_block_diagonal_norm(const CMatrix<Real>& a, Index block_rows, Index block_cols) {
  Real total = 0;
  for (Index c = 0; c < a.cols(); ++c)
    for (Index r = 0; r < a.rows(); ++r)
      if (r / block_rows != c / block_cols) total += std::norm(a(r, c));
  return std::sqrt(total);
}

}  // namespace blockpr
