#pragma once

// Compressive phase retrieval: BlockPR recovers the sketch C x up to a global
// phase, then a sparse decoder recovers x from it.

#include "blockpr/angular_sync.hpp"
#include "blockpr/core.hpp"
#include "blockpr/fft.hpp"
#include "blockpr/lifted_solver.hpp"
#include "blockpr/masks.hpp"
#include "blockpr/random.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

namespace blockpr {

enum class SketchKind { subsampled_dft, gaussian };

// Sketch matrix C (m x d). The subsampled DFT keeps m distinct rows of the
// unitary DFT scaled by sqrt(d/m); the Gaussian sketch has i.i.d. complex
// N(0, 1/m) entries. Both are approximately isometric on sparse vectors.
template <typename Real>
class Sketch {
 public:
  static Sketch subsampled_dft(Index d, Index m, std::uint64_t seed) {
    check(d, m);
    Sketch c(SketchKind::subsampled_dft, d, m);
    std::vector<Index> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), Index(0));
    Rng rng(seed);
    for (Index i = 0; i < m; ++i) {
      std::uniform_int_distribution<Index> pick(i, d - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
    }
    c.rows_.assign(all.begin(), all.begin() + m);
    std::sort(c.rows_.begin(), c.rows_.end());
    return c;
  }

  static Sketch gaussian(Index d, Index m, std::uint64_t seed) {
    check(d, m);
    Sketch c(SketchKind::gaussian, d, m);
    Rng rng(seed);
    c.dense_.resize(m, d);
    const Real scale = 1 / std::sqrt(static_cast<Real>(m));
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < m; ++i) c.dense_(i, j) = scale * complex_gaussian<Real>(rng);
    return c;
  }

  SketchKind kind() const noexcept { return kind_; }
  Index rows() const noexcept { return m_; }
  Index cols() const noexcept { return d_; }
  const std::vector<Index>& selected_rows() const noexcept { return rows_; }

  CVector<Real> apply(const CVector<Real>& x) const {
    if (x.size() != d_) throw DomainError("sketch: signal length mismatch");
    if (kind_ == SketchKind::gaussian) return dense_ * x;
    UnitaryFft<Real> fft;
    const CVector<Real> full = fft.forward(x);
    CVector<Real> out(m_);
    for (Index i = 0; i < m_; ++i) out(i) = scale() * full(rows_[static_cast<std::size_t>(i)]);
    return out;
  }

  CVector<Real> adjoint(const CVector<Real>& z) const {
    if (z.size() != m_) throw DomainError("sketch: sketch length mismatch");
    if (kind_ == SketchKind::gaussian) return dense_.adjoint() * z;
    CVector<Real> full = CVector<Real>::Zero(d_);
    for (Index i = 0; i < m_; ++i) full(rows_[static_cast<std::size_t>(i)]) = scale() * z(i);
    UnitaryFft<Real> fft;
    return fft.inverse(full);
  }

  CMatrix<Real> dense() const {
    if (kind_ == SketchKind::gaussian) return dense_;
    const CMatrix<Real> f = dft_matrix<Real>(d_);
    CMatrix<Real> out(m_, d_);
    for (Index i = 0; i < m_; ++i) out.row(i) = scale() * f.row(rows_[static_cast<std::size_t>(i)]);
    return out;
  }

 private:
  Sketch(SketchKind kind, Index d, Index m) : kind_(kind), d_(d), m_(m) {}

  static void check(Index d, Index m) {
    if (m < 1 || m >= d) throw DomainError("sketch: need 1 <= m < d");
  }

  Real scale() const { return std::sqrt(static_cast<Real>(d_) / static_cast<Real>(m_)); }

  SketchKind kind_;
  Index d_;
  Index m_;
  std::vector<Index> rows_;
  CMatrix<Real> dense_;
};

// Keeps the s largest-magnitude entries (ties: lower index wins).
template <typename Real>
CVector<Real> hard_threshold(const CVector<Real>& v, Index s) {
  CVector<Real> out = CVector<Real>::Zero(v.size());
  if (s <= 0) return out;
  std::vector<Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Index(0));
  const auto keep = std::min<Index>(s, v.size());
  std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(), [&](Index a, Index b) {
    const Real ma = std::abs(v(a));
    const Real mb = std::abs(v(b));
    return ma > mb || (ma == mb && a < b);
  });
  for (Index i = 0; i < keep; ++i) out(idx[static_cast<std::size_t>(i)]) = v(idx[static_cast<std::size_t>(i)]);
  return out;
}

template <typename Real>
struct DecodeResult {
  Signal<Real> x;
  bool converged = false;
  Index iterations = 0;
  Real residual = 0;  // ||z - C x|| / ||z||
};

template <typename Real>
class SparseDecoder {
 public:
  virtual ~SparseDecoder() = default;
  virtual DecodeResult<Real> decode(const Sketch<Real>& c, const CVector<Real>& z, Index s) const = 0;
};

struct IhtOptions {
  Index max_iterations = 1000;
  double tolerance = 1e-12;  // on the relative residual
  double shrink = 2.0;       // step shrink factor when the support changes
  double margin = 0.01;      // step acceptance margin
};

// Normalized iterative hard thresholding: gradient steps with an adaptive step
// length, projected onto s-sparse vectors.
template <typename Real>
class NormalizedIht final : public SparseDecoder<Real> {
 public:
  explicit NormalizedIht(IhtOptions opts = {}) : opts_(opts) {}

  const IhtOptions& options() const noexcept { return opts_; }

  DecodeResult<Real> decode(const Sketch<Real>& c, const CVector<Real>& z, Index s) const override {
    DecodeResult<Real> out;
    out.x = CVector<Real>::Zero(c.cols());
    const Real z_norm = z.norm();
    if (z_norm == Real(0)) {
      out.converged = true;
      return out;
    }

    const auto support_of = [](const CVector<Real>& v) {
      std::vector<char> mask(static_cast<std::size_t>(v.size()));
      for (Index i = 0; i < v.size(); ++i) mask[static_cast<std::size_t>(i)] = v(i) != Complex<Real>(0);
      return mask;
    };
    const auto restrict_to = [](const CVector<Real>& v, const std::vector<char>& mask) {
      CVector<Real> r = CVector<Real>::Zero(v.size());
      for (Index i = 0; i < v.size(); ++i)
        if (mask[static_cast<std::size_t>(i)]) r(i) = v(i);
      return r;
    };

    CVector<Real>& x = out.x;
    std::vector<char> support = support_of(hard_threshold<Real>(c.adjoint(z), s));
    CVector<Real> residual = z;
    const Real c_margin = static_cast<Real>(opts_.margin);
    const Real shrink = static_cast<Real>(opts_.shrink) * (1 - c_margin);

    for (Index it = 0; it < opts_.max_iterations; ++it) {
      const CVector<Real> g = c.adjoint(residual);
      const CVector<Real> g_support = restrict_to(g, support);
      const Real denom = c.apply(g_support).squaredNorm();
      Real mu = denom > 0 ? g_support.squaredNorm() / denom : Real(1);

      CVector<Real> next = hard_threshold<Real>(x + mu * g, s);
      std::vector<char> next_support = support_of(next);
      if (next_support != support) {
        for (int guard = 0; guard < 60; ++guard) {
          const CVector<Real> step = next - x;
          const Real a_step = c.apply(step).squaredNorm();
          const Real omega = a_step > 0 ? (1 - c_margin) * step.squaredNorm() / a_step : mu;
          if (mu <= omega) break;
          mu /= shrink;
          next = hard_threshold<Real>(x + mu * g, s);
          next_support = support_of(next);
        }
      }

      x = std::move(next);
      support = std::move(next_support);
      residual = z - c.apply(x);
      out.iterations = it + 1;
      out.residual = residual.norm() / z_norm;
      if (out.residual <= static_cast<Real>(opts_.tolerance)) {
        out.converged = true;
        break;
      }
    }
    return out;
  }

 private:
  IhtOptions opts_;
};

struct SparsePipelineConfig {
  Index sparsity = 4;
  Index sketch_rows = 64;
  SketchKind sketch = SketchKind::subsampled_dft;
  std::uint64_t sketch_seed = 0;
  double epsilon = 1.0;  // tail parameter of the compressible error bound
  IhtOptions decoder;
};

// Flattened BlockPR stage acting on C^m.
template <typename Real>
struct InnerSystem {
  MaskEnsemble<Real> masks;
  LiftedSystem<Real> system;
  FlatteningOperator<Real> flattener;

  static InnerSystem deterministic(Index m, Index delta, std::uint64_t flatten_seed) {
    auto ens = build_deterministic_masks<Real>(m, delta);
    auto sys = assemble_blocks(ens);
    return {std::move(ens), std::move(sys), FlatteningOperator<Real>::random(m, flatten_seed)};
  }
};

template <typename Real>
Sketch<Real> make_sketch(const SparsePipelineConfig& cfg, Index d) {
  if (cfg.sparsity < 1 || cfg.sparsity > cfg.sketch_rows) throw DomainError("sparse pipeline: need 1 <= s <= m");
  return cfg.sketch == SketchKind::gaussian ? Sketch<Real>::gaussian(d, cfg.sketch_rows, cfg.sketch_seed)
                                            : Sketch<Real>::subsampled_dft(d, cfg.sketch_rows, cfg.sketch_seed);
}

// |M (W C x)|^2 for the inner masks M and flattener W.
template <typename Real>
MeasurementVector<Real> sparse_measure(const Signal<Real>& x, const Sketch<Real>& c, const InnerSystem<Real>& inner) {
  if (inner.masks.d != c.rows()) throw DomainError("sparse_measure: inner dimension must equal sketch rows");
  return correlation_measure(inner.flattener.apply(c.apply(x)), inner.masks);
}

template <typename Real>
struct SparseRecovery {
  Signal<Real> x;
  Signal<Real> sketch_estimate;  // e^{i phi} C x, from the inner stage
  DecodeResult<Real> decode;
  Recovery<Real> inner;
};

template <typename Real>
SparseRecovery<Real> sparse_recover(const MeasurementVector<Real>& b, const Sketch<Real>& c,
                                    const InnerSystem<Real>& inner, Index s, const SparseDecoder<Real>& decoder) {
  SparseRecovery<Real> out;
  out.inner = recover_arbitrary(b, inner.system, inner.flattener);
  out.sketch_estimate = out.inner.x;
  out.decode = decoder.decode(c, out.sketch_estimate, s);
  out.x = out.decode.x;
  return out;
}

template <typename Real>
SparseRecovery<Real> sparse_recover(const MeasurementVector<Real>& b, const Sketch<Real>& c,
                                    const InnerSystem<Real>& inner, const SparsePipelineConfig& cfg) {
  return sparse_recover(b, c, inner, cfg.sparsity, NormalizedIht<Real>(cfg.decoder));
}

// ||x - x_s||_2 + ||x - x_{s/eps}||_1 / sqrt(s), x_k the best k-term approximation.
template <typename Real>
Real compressible_tail(const Signal<Real>& x, Index s, double epsilon) {
  const auto wide = static_cast<Index>(std::floor(static_cast<double>(s) / epsilon));
  const Real head = (x - hard_threshold<Real>(x, s)).norm();
  const Real tail = (x - hard_threshold<Real>(x, wide)).cwiseAbs().sum();
  return head + tail / std::sqrt(static_cast<Real>(s));
}

}  // namespace blockpr
