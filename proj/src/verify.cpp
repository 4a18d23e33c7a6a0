#include "blockpr/analysis.hpp"
#include "blockpr/angular_sync.hpp"
#include "blockpr/bench.hpp"
#include "blockpr/closed_form.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <ostream>

namespace blockpr::bench {

namespace {

Check make_check(std::string name, double value, double bound, bool passed) {
  return {std::move(name), value, bound, passed};
}

MaskEnsemble<double> perturbed(const MaskEnsemble<double>& ens, double eps, Rng& rng) {
  if (eps == 0) return ens;
  CMatrix<double> support = ens.support;
  for (Index l = 0; l < support.rows(); ++l)
    for (Index i = 0; i < support.cols(); ++i) support(l, i) *= 1.0 + eps * complex_gaussian<double>(rng);
  return make_custom_masks<double>(ens.d, support);
}

// Dense identity and block diagonalization over a small grid.
void dense_checks(VerifyReport& rep, Rng& rng) {
  double identity = 0;
  double offdiag = 0;
  for (Index d : {8, 12, 16}) {
    for (Index delta : {2, 3, 4}) {
      std::vector<MaskEnsemble<double>> ensembles{build_deterministic_masks<double>(d, delta),
                                                  build_random_masks<double>(d, delta, 1.0, rng()),
                                                  build_random_masks<double>(d, delta, 1.5, rng())};
      for (const auto& ens : ensembles) {
        const auto o = dense_oracle(ens);
        const Signal<double> x = complex_gaussian_vector<double>(d, rng);
        const CVector<double> pb = o.permutation * correlation_measure(x, ens).cast<Complex<double>>();
        identity = std::max(identity, (o.lifted * lift(x, delta).entries - pb).norm() / pb.norm());
        offdiag = std::max(offdiag, off_block_diagonal_norm<double>(o.diagonalized, ens.count(), 2 * delta - 1) /
                                        o.lifted.norm());
      }
    }
  }
  rep.checks.push_back(make_check("lifted_identity", identity, 1e-10, identity < 1e-10));
  rep.checks.push_back(make_check("block_diagonalization", offdiag, 1e-10, offdiag < 1e-10));
}

void closed_form_check(VerifyReport& rep) {
  const auto ens = build_deterministic_masks<double>(16, 3);
  const auto sys = assemble_blocks(ens);
  const CMatrix<double> f = dft_matrix<double>(5);
  double worst = 0;
  for (Index k = 0; k < 16; ++k)
    worst = std::max(worst, (sys.block(k) - f * sys.spectrum().row(k).transpose().asDiagonal()).norm());
  rep.checks.push_back(make_check("closed_form_blocks", worst, 1e-12, worst < 1e-12));
}

void conditioning_checks(VerifyReport& rep, const VerifyOptions& opts, Rng& rng) {
  double low_ratio = std::numeric_limits<double>::infinity();
  double high_ratio = 0;
  double kappa_ratio = 0;
  for (Index delta = 2; delta <= 24; ++delta) {
    const auto base = build_deterministic_masks<double>(128, delta);
    const auto sys = assemble_blocks(perturbed(base, opts.mask_perturbation, rng));
    if (sys.singular_block()) {
      kappa_ratio = std::numeric_limits<double>::infinity();
      continue;
    }
    const double a = base.damping;
    const auto c = sys.condition();
    low_ratio = std::min(low_ratio, c.sigma_min / block_sigma_lower_bound<double>(delta, a));
    high_ratio = std::max(high_ratio, c.sigma_max / block_sigma_upper_bound<double>(a));
    kappa_ratio = std::max(kappa_ratio, c.kappa() / kappa_upper_bound<double>(delta));
  }
  rep.checks.push_back(make_check("sigma_min_over_lower_bound", low_ratio, 1, low_ratio >= 1));
  rep.checks.push_back(make_check("sigma_max_over_upper_bound", high_ratio, 1, high_ratio <= 1));
  rep.checks.push_back(make_check("kappa_over_bound", kappa_ratio, 1, kappa_ratio < 1));

  double drift = 0;
  for (Index delta = 2; delta <= 16; ++delta) {
    const double k64 = assemble_blocks(build_deterministic_masks<double>(64, delta)).condition().kappa();
    const double k128 = assemble_blocks(build_deterministic_masks<double>(128, delta)).condition().kappa();
    drift = std::max(drift, std::abs(k64 - k128) / k128);
  }
  rep.checks.push_back(make_check("kappa_dimension_drift", drift, 1e-6, drift < 1e-6));
}

// d = 4, delta = 2: lifted ordering, M' pattern, and recovery of (1, i, -1, 2).
void fixture_checks(VerifyReport& rep) {
  const LiftedLayout layout(4, 2);
  const std::array<std::pair<Index, Index>, 12> order{
      {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}, {2, 3}, {3, 2}, {3, 3}, {3, 0}, {0, 3}}};
  double mismatches = 0;
  for (Index k = 0; k < 12; ++k) mismatches += layout.pair(k) != order[static_cast<std::size_t>(k)];
  rep.checks.push_back(make_check("fixture_lifted_order", mismatches, 0, mismatches == 0));

  // Block row r carries m_(1,1), m_(1,2), m_(2,1), m_(2,2) in columns 3r .. 3r+3 (mod 12).
  const auto ens = build_deterministic_masks<double>(4, 2);
  const auto o = dense_oracle(ens);
  CMatrix<double> expected = CMatrix<double>::Zero(12, 12);
  const std::array<std::pair<Index, Index>, 4> pattern{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  for (Index r = 0; r < 4; ++r)
    for (Index l = 0; l < 3; ++l)
      for (Index c = 0; c < 4; ++c) {
        const auto [j, k] = pattern[static_cast<std::size_t>(c)];
        expected(3 * r + l, (3 * r + c) % 12) = ens.support(l, j) * std::conj(ens.support(l, k));
      }
  const double mdiff = (o.lifted - expected).norm();
  rep.checks.push_back(make_check("fixture_lifted_matrix", mdiff, 1e-14, mdiff < 1e-14));

  Signal<double> x(4);
  x << 1.0, Complex<double>(0, 1), -1.0, 2.0;
  const auto rec = blockpr_recover(correlation_measure(x, ens), assemble_blocks(ens));
  const double err = global_phase_align(x, rec.x).relative_l2();
  rep.checks.push_back(make_check("fixture_recovery", err, 1e-10, err < 1e-10));
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

VerifyReport verify(const VerifyOptions& opts) {
  VerifyReport rep;
  Rng rng(opts.seed);
  dense_checks(rep, rng);
  closed_form_check(rep);
  conditioning_checks(rep, opts, rng);
  fixture_checks(rep);
  return rep;
}

void write_report(std::ostream& out, const VerifyReport& r, bool json) {
  if (json) {
    nlohmann::json doc;
    doc["passed"] = r.passed();
    doc["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks)
      doc["checks"].push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"passed", c.passed}});
    out << doc.dump(2) << "\n";
    return;
  }
  for (const auto& c : r.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value << " bound=" << c.bound << "\n";
  out << (r.passed() ? "all checks passed" : "some checks failed") << "\n";
}

}  // namespace blockpr::bench
