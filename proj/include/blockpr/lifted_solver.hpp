#pragma once

// The lifted block-circulant system M' y = P b and its FFT-based solver.
//
// Block row r of M' (shift r, one row per mask) has the L x (2 delta - 1)
// shift blocks A_0 .. A_{delta-1} at block columns r .. r + delta - 1 (mod d).
// Conjugating by the block Fourier matrices diagonalizes it into
//   J_k = sum_s A_s e^{2 pi i k s / d},  k = 0 .. d-1,
// so  y = U J^{-1} U^* P b  costs O(delta d log d) plus d small block solves.

#include "blockpr/closed_form.hpp"
#include "blockpr/core.hpp"
#include "blockpr/fft.hpp"
#include "blockpr/masks.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

namespace blockpr {

enum class Factorization { generic, closed_form };

// sigma_min below this fraction of sigma_max marks a block singular.
inline constexpr double kSingularBlockTolerance = 1e-12;

struct ConditionSummary {
  double sigma_max = 0;
  double sigma_min = 0;
  Index weakest_block = 0;

  double kappa() const { return sigma_min > 0 ? sigma_max / sigma_min : std::numeric_limits<double>::infinity(); }
};

template <typename Real>
class LiftedSystem;

template <typename Real>
LiftedSystem<Real> assemble_blocks(const MaskEnsemble<Real>& ens);

template <typename Real>
class LiftedSystem {
 public:
  Index dimension() const noexcept { return d_; }
  Index delta() const noexcept { return delta_; }
  Index rows() const noexcept { return rows_; }
  Index width() const noexcept { return 2 * delta_ - 1; }
  LiftedLayout layout() const { return LiftedLayout(d_, delta_); }
  Factorization factorization() const noexcept { return factorization_; }

  // A_0 .. A_{delta-1}, each rows() x width().
  const std::vector<CMatrix<Real>>& shift_blocks() const noexcept { return shift_blocks_; }

  // J_k from the shift blocks.
  CMatrix<Real> block(Index k) const {
    const Real two_pi = 2 * std::numbers::pi_v<Real>;
    CMatrix<Real> j = CMatrix<Real>::Zero(rows_, width());
    for (Index s = 0; s < delta_; ++s)
      j += std::polar(Real(1), two_pi * static_cast<Real>(wrap_index(k * s, d_)) / static_cast<Real>(d_)) *
           shift_blocks_[static_cast<std::size_t>(s)];
    return j;
  }

  // closed_form only: d x width() table with J_k = F diag(s.row(k)).
  const CMatrix<Real>& spectrum() const noexcept { return spectrum_; }
  const CMatrix<Real>& inverse_dft() const noexcept { return inverse_dft_; }

  const RVector<Real>& block_sigma_max() const noexcept { return sigma_max_; }
  const RVector<Real>& block_sigma_min() const noexcept { return sigma_min_; }

  ConditionSummary condition() const {
    ConditionSummary c;
    Index kmin = 0;
    c.sigma_max = static_cast<double>(sigma_max_.maxCoeff());
    c.sigma_min = static_cast<double>(sigma_min_.minCoeff(&kmin));
    c.weakest_block = kmin;
    return c;
  }

  std::optional<Index> singular_block() const noexcept { return singular_block_; }

  void require_invertible() const {
    if (singular_block_) {
      const auto k = *singular_block_;
      throw ConditioningError(k, static_cast<double>(sigma_min_(k)), static_cast<double>(sigma_max_.maxCoeff()));
    }
  }

  // Solves J_k z = v (least squares when rows() > width()).
  CVector<Real> solve_block(Index k, const CVector<Real>& v) const {
    if (factorization_ == Factorization::closed_form) {
      CVector<Real> z = inverse_dft_ * v;
      return z.cwiseQuotient(spectrum_.row(k).transpose());
    }
    return std::visit([&](const auto& solver) { return solve_with(solver, v); },
                      solvers_[static_cast<std::size_t>(k)]);
  }

 private:
  struct NormalEquations {
    CMatrix<Real> block;
    Eigen::LLT<CMatrix<Real>> gram;
  };
  using BlockSolver =
      std::variant<std::monostate, Eigen::PartialPivLU<CMatrix<Real>>, NormalEquations, Eigen::HouseholderQR<CMatrix<Real>>>;

  static CVector<Real> solve_with(const std::monostate&, const CVector<Real>&) {
    throw std::logic_error("lifted block has no factorization");
  }
  static CVector<Real> solve_with(const Eigen::PartialPivLU<CMatrix<Real>>& lu, const CVector<Real>& v) {
    return lu.solve(v);
  }
  static CVector<Real> solve_with(const NormalEquations& ne, const CVector<Real>& v) {
    return ne.gram.solve(ne.block.adjoint() * v);
  }
  static CVector<Real> solve_with(const Eigen::HouseholderQR<CMatrix<Real>>& qr, const CVector<Real>& v) {
    return qr.solve(v);
  }

  friend LiftedSystem assemble_blocks<Real>(const MaskEnsemble<Real>& ens);

  Index d_ = 0;
  Index delta_ = 0;
  Index rows_ = 0;
  Factorization factorization_ = Factorization::generic;
  std::vector<CMatrix<Real>> shift_blocks_;
  CMatrix<Real> spectrum_;
  CMatrix<Real> inverse_dft_;
  std::vector<BlockSolver> solvers_;
  RVector<Real> sigma_max_;
  RVector<Real> sigma_min_;
  std::optional<Index> singular_block_;
};

// Shift blocks from the expansion
//   (b_l)_r = sum_{j,k < delta} m_l(j) conj(m_l(k)) conj(x_{r+j}) x_{r+k}.
// Product conj(x_{r+j}) x_{r+k} lives in lifted block r+j at t = k-j when
// k >= j, and in block r+j-1 at t = k-j+2delta-1 otherwise.
template <typename Real>
std::vector<CMatrix<Real>> shift_blocks_from_masks(const MaskEnsemble<Real>& ens) {
  const Index delta = ens.delta;
  const Index width = 2 * delta - 1;
  std::vector<CMatrix<Real>> blocks(static_cast<std::size_t>(delta), CMatrix<Real>::Zero(ens.count(), width));
  for (Index l = 0; l < ens.count(); ++l) {
    for (Index j = 0; j < delta; ++j) {
      for (Index k = 0; k < delta; ++k) {
        const Complex<Real> c = ens.support(l, j) * std::conj(ens.support(l, k));
        if (k >= j)
          blocks[static_cast<std::size_t>(j)](l, k - j) += c;
        else
          blocks[static_cast<std::size_t>(j - 1)](l, k - j + width) += c;
      }
    }
  }
  return blocks;
}

template <typename Real>
LiftedSystem<Real> assemble_blocks(const MaskEnsemble<Real>& ens) {
  if (ens.count() < 2 * ens.delta - 1)
    throw DomainError("assemble_blocks: need at least 2*delta - 1 masks");

  LiftedSystem<Real> sys;
  sys.d_ = ens.d;
  sys.delta_ = ens.delta;
  sys.rows_ = ens.count();
  sys.shift_blocks_ = shift_blocks_from_masks(ens);
  sys.sigma_max_.resize(ens.d);
  sys.sigma_min_.resize(ens.d);

  if (ens.kind == MaskKind::deterministic_fourier) {
    sys.factorization_ = Factorization::closed_form;
    sys.spectrum_ = s_table<Real>(ens.d, ens.delta, ens.damping);
    sys.inverse_dft_ = dft_matrix<Real>(sys.width()).adjoint();
    const RMatrix<Real> moduli = sys.spectrum_.cwiseAbs();
    sys.sigma_max_ = moduli.rowwise().maxCoeff();
    sys.sigma_min_ = moduli.rowwise().minCoeff();
  } else {
    sys.factorization_ = Factorization::generic;
    sys.solvers_.resize(static_cast<std::size_t>(ens.d));
    std::vector<CMatrix<Real>> blocks(static_cast<std::size_t>(ens.d));
    for (Index k = 0; k < ens.d; ++k) {
      blocks[static_cast<std::size_t>(k)] = sys.block(k);
      Eigen::JacobiSVD<CMatrix<Real>> svd(blocks[static_cast<std::size_t>(k)]);
      const auto& sv = svd.singularValues();
      sys.sigma_max_(k) = sv(0);
      sys.sigma_min_(k) = sv(sv.size() - 1);
    }
    const Real global_max = sys.sigma_max_.maxCoeff();
    for (Index k = 0; k < ens.d; ++k) {
      auto& jk = blocks[static_cast<std::size_t>(k)];
      auto& solver = sys.solvers_[static_cast<std::size_t>(k)];
      if (!(sys.sigma_min_(k) >= static_cast<Real>(kSingularBlockTolerance) * global_max)) {
        if (!sys.singular_block_) sys.singular_block_ = k;
        continue;
      }
      if (jk.rows() == jk.cols()) {
        solver = Eigen::PartialPivLU<CMatrix<Real>>(jk);
        jk.resize(0, 0);
      } else if (sys.sigma_max_(k) / sys.sigma_min_(k) < Real(1e4)) {
        typename LiftedSystem<Real>::NormalEquations ne{jk, Eigen::LLT<CMatrix<Real>>()};
        ne.gram.compute(jk.adjoint() * jk);
        if (ne.gram.info() == Eigen::Success)
          solver = std::move(ne);
        else
          solver = Eigen::HouseholderQR<CMatrix<Real>>(jk);
      } else {
        solver = Eigen::HouseholderQR<CMatrix<Real>>(jk);
      }
    }
    return sys;
  }

  const Real global_max = sys.sigma_max_.maxCoeff();
  for (Index k = 0; k < ens.d; ++k)
    if (!(sys.sigma_min_(k) >= static_cast<Real>(kSingularBlockTolerance) * global_max)) {
      sys.singular_block_ = k;
      break;
    }
  return sys;
}

// P b: entry (l, r) of the mask-major layout moves to r * L + l.
template <typename Real>
RVector<Real> interleave(const MeasurementVector<Real>& b, Index mask_count) {
  if (mask_count <= 0 || b.size() % mask_count != 0)
    throw DomainError("interleave: length is not a multiple of the mask count");
  const Index d = b.size() / mask_count;
  RVector<Real> out(b.size());
  for (Index l = 0; l < mask_count; ++l)
    for (Index r = 0; r < d; ++r) out(r * mask_count + l) = b(l * d + r);
  return out;
}

template <typename Real>
MeasurementVector<Real> deinterleave(const RVector<Real>& pb, Index mask_count) {
  if (mask_count <= 0 || pb.size() % mask_count != 0)
    throw DomainError("deinterleave: length is not a multiple of the mask count");
  const Index d = pb.size() / mask_count;
  MeasurementVector<Real> out(pb.size());
  for (Index l = 0; l < mask_count; ++l)
    for (Index r = 0; r < d; ++r) out(l * d + r) = pb(r * mask_count + l);
  return out;
}

namespace detail {

// (M')^{-1} P v for a mask-major real vector v.
//
// P only relabels entries: viewing v as a d x L matrix, row r is the shift-r
// block of P v. Working in that orientation keeps every length-d FFT on
// contiguous memory; the d x (2 delta - 1) result is transposed into the
// lifted layout at the end.
template <typename Real>
CVector<Real> apply_lifted_inverse(const LiftedSystem<Real>& sys, const RVector<Real>& v) {
  const Index d = sys.dimension();
  const Index rows = sys.rows();
  if (v.size() != rows * d) throw DomainError("solve_lifted: measurement length does not match the system");
  sys.require_invertible();

  UnitaryFft<Real> fft;
  CMatrix<Real> spec;
  fft.forward_real_columns(v.data(), d, rows, spec);

  CMatrix<Real> z(d, sys.width());
  if (sys.factorization() == Factorization::closed_form) {
    z.noalias() = spec * sys.inverse_dft().transpose();
    z.array() /= sys.spectrum().array();
  } else {
    for (Index k = 0; k < d; ++k) z.row(k) = sys.solve_block(k, spec.row(k).transpose()).transpose();
  }

  fft.inverse_columns(z, spec);
  CVector<Real> lifted(d * sys.width());
  CMatrix<Real>::Map(lifted.data(), sys.width(), d) = spec.transpose();
  return lifted;
}

}  // namespace detail

// y~ = (M')^{-1} P b.
template <typename Real>
LiftedVector<Real> solve_lifted(const LiftedSystem<Real>& sys, const MeasurementVector<Real>& b) {
  return {sys.layout(), detail::apply_lifted_inverse(sys, b)};
}

template <typename Real>
struct ResidualNoise {
  CVector<Real> values;
  Real inf_norm = 0;
};

// n~ = (M')^{-1} P n: the perturbation that noise n induces on the lifted vector.
template <typename Real>
ResidualNoise<Real> residual_noise(const LiftedSystem<Real>& sys, const RVector<Real>& noise) {
  ResidualNoise<Real> out;
  out.values = detail::apply_lifted_inverse(sys, noise);
  out.inf_norm = out.values.size() ? out.values.cwiseAbs().maxCoeff() : Real(0);
  return out;
}

}  // namespace blockpr
