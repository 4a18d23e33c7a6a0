#pragma once

// Greedy angular synchronization and the end-to-end recovery pipeline.

#include "blockpr/core.hpp"
#include "blockpr/lifted_solver.hpp"
#include "blockpr/masks.hpp"

#include <vector>

namespace blockpr {

struct SyncOptions {
  // Lifted entries with modulus at or below this fraction of the largest
  // diagonal entry carry no phase information.
  double zero_tolerance = 1e-10;
};

enum class SyncExit { window_complete, step_limit };

template <typename Real>
struct SyncResult {
  RVector<Real> phases;
  std::vector<Index> unreached;    // no phase path back to the anchor; phase 0
  Index anchor = 0;
  std::vector<Index> visit_order;  // reference entries, in order
  Index zero_pairs = 0;            // phase differences skipped as (near) zero
  SyncExit exit = SyncExit::window_complete;
};

// Symmetrized estimate of phi_n - phi_j from conj(x_j) x_n and conj(x_n) x_j:
// the circular midpoint of arg(y(j, n)) and -arg(y(n, j)). Equals
// (arg y(j, n) - arg y(n, j)) / 2 whenever the two estimates do not straddle
// the branch cut at +-pi.
template <typename Real>
Real symmetrized_phase_difference(const Complex<Real>& forward, const Complex<Real>& backward) {
  const Real alpha = forward == Complex<Real>(0) ? Real(0) : std::arg(forward);
  const Real beta = backward == Complex<Real>(0) ? Real(0) : std::arg(backward);
  return alpha + wrap_to_pi(-beta - alpha) / 2;
}

template <typename Real>
SyncResult<Real> synchronize(const LiftedVector<Real>& y, const SyncOptions& opts = {}) {
  const LiftedLayout& layout = y.layout;
  const Index d = layout.dimension();
  const Index delta = layout.delta();

  RVector<Real> mag(d);
  for (Index j = 0; j < d; ++j) mag(j) = std::abs(y.diagonal(j));

  SyncResult<Real> out;
  out.phases = RVector<Real>::Zero(d);
  Index anchor = 0;
  for (Index j = 1; j < d; ++j)
    if (mag(j) > mag(anchor)) anchor = j;
  out.anchor = anchor;

  const Real floor = static_cast<Real>(opts.zero_tolerance) * mag(anchor);
  std::vector<char> is_set(static_cast<std::size_t>(d), 0);
  std::vector<char> grounded(static_cast<std::size_t>(d), 0);
  is_set[static_cast<std::size_t>(anchor)] = 1;
  grounded[static_cast<std::size_t>(anchor)] = 1;

  const auto forward_window_open = [&](Index j) {
    for (Index i = 1; i < delta; ++i)
      if (!is_set[static_cast<std::size_t>(wrap_index(j + i, d))]) return true;
    return false;
  };

  Index j = anchor;
  Index steps = 0;
  while (forward_window_open(j)) {
    if (steps == d) {
      out.exit = SyncExit::step_limit;
      break;
    }
    out.visit_order.push_back(j);
    for (Index i = 1 - delta; i < delta; ++i) {
      const Index n = wrap_index(j + i, d);
      if (is_set[static_cast<std::size_t>(n)]) continue;
      const Complex<Real> fwd = y(j, n);
      const Complex<Real> bwd = y(n, j);
      const bool informative = std::min(std::abs(fwd), std::abs(bwd)) > floor;
      if (!informative) ++out.zero_pairs;
      const bool ok = informative && grounded[static_cast<std::size_t>(j)];
      out.phases(n) = ok ? out.phases(j) + symmetrized_phase_difference(fwd, bwd) : Real(0);
      is_set[static_cast<std::size_t>(n)] = 1;
      grounded[static_cast<std::size_t>(n)] = ok ? 1 : 0;
    }
    Index best = 1;
    for (Index i = 2; i < delta; ++i)
      if (mag(wrap_index(j + i, d)) > mag(wrap_index(j + best, d))) best = i;
    j = wrap_index(j + best, d);
    ++steps;
  }

  for (Index n = 0; n < d; ++n) {
    if (!grounded[static_cast<std::size_t>(n)]) {
      out.unreached.push_back(n);
      out.phases(n) = 0;
    }
  }
  return out;
}

// |x_j| estimates: sqrt of the modulus of the diagonal lifted entries (noise
// can push them off the non-negative real axis).
template <typename Real>
RVector<Real> magnitudes(const LiftedVector<Real>& y) {
  const Index d = y.layout.dimension();
  RVector<Real> m(d);
  for (Index j = 0; j < d; ++j) m(j) = std::sqrt(std::abs(y.diagonal(j)));
  return m;
}

template <typename Real>
struct Recovery {
  Signal<Real> x;
  SyncResult<Real> sync;
  ConditionSummary condition;
};

template <typename Real>
Signal<Real> assemble_signal(const RVector<Real>& mags, const RVector<Real>& phases) {
  Signal<Real> x(mags.size());
  for (Index j = 0; j < mags.size(); ++j) x(j) = std::polar(mags(j), phases(j));
  return x;
}

// Lifted solve, synchronization, then x_j = |x_j| e^{i phi_j}.
template <typename Real>
Recovery<Real> blockpr_recover(const MeasurementVector<Real>& b, const LiftedSystem<Real>& sys,
                               const SyncOptions& opts = {}) {
  const LiftedVector<Real> y = solve_lifted(sys, b);
  Recovery<Real> out;
  out.sync = synchronize(y, opts);
  out.x = assemble_signal<Real>(magnitudes(y), out.sync.phases);
  out.condition = sys.condition();
  return out;
}

// Recovery for measurements of W x: recovers W x up to phase, then applies W^*.
template <typename Real>
Recovery<Real> recover_arbitrary(const MeasurementVector<Real>& b, const LiftedSystem<Real>& sys,
                                 const FlatteningOperator<Real>& w, const SyncOptions& opts = {}) {
  if (w.dimension() != sys.dimension()) throw DomainError("recover_arbitrary: flattening dimension mismatch");
  Recovery<Real> out = blockpr_recover(b, sys, opts);
  out.x = w.apply_inverse(out.x);
  return out;
}

}  // namespace blockpr
