#include "blockpr/bench.hpp"

#include "blockpr/analysis.hpp"
#include "blockpr/angular_sync.hpp"
#include "blockpr/signals.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace blockpr::bench {

namespace {

constexpr std::uint64_t kMaskStream = 0x6d61736b;  // keeps mask seeds apart from trial seeds

// Sub-streams of a trial seed.
enum Stream : std::uint64_t { kSignal = 0, kFlattener = 1, kNoise = 2, kSketch = 3 };

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string seed_cell(std::uint64_t s) { return std::to_string(s); }

std::string mask_name(MaskKind k) {
  switch (k) {
    case MaskKind::deterministic_fourier: return "det";
    case MaskKind::random_gaussian: return "rand";
    case MaskKind::custom: return "custom";
  }
  return "custom";
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return (lo + hi) / 2;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::robustness: return "robustness";
    case Experiment::runtime: return "runtime";
    case Experiment::condno: return "condno";
    case Experiment::flatness: return "flatness";
    case Experiment::sparse: return "sparse";
    case Experiment::verify: return "verify";
    case Experiment::recover: return "recover";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::robustness, Experiment::runtime, Experiment::condno, Experiment::flatness,
                 Experiment::sparse, Experiment::verify, Experiment::recover})
    if (to_string(e) == name) return e;
  throw DomainError("unknown experiment: " + name);
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("table row width does not match header");
  rows.push_back(std::move(row));
}

void write_csv(std::ostream& out, const Table& t) {
  out << "# " << kCsvSchema << " experiment=" << t.experiment << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ",";
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              out << format_double(v);
            else if constexpr (std::is_same_v<T, std::string>)
              out << csv_escape(v);
            else
              out << v;
          },
          row[i]);
    }
    out << "\n";
  }
}

void write_json(std::ostream& out, const Table& t) {
  nlohmann::json doc;
  doc["schema"] = kCsvSchema;
  doc["experiment"] = t.experiment;
  doc["columns"] = t.columns;
  doc["rows"] = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              r[t.columns[i]] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v));
            else
              r[t.columns[i]] = v;
          },
          row[i]);
    doc["rows"].push_back(std::move(r));
  }
  out << doc.dump(2) << "\n";
}

MaskEnsemble<double> make_ensemble(const ExperimentConfig& cfg, Index d, Index delta, std::uint64_t seed) {
  if (cfg.masks == MaskKind::random_gaussian) return build_random_masks<double>(d, delta, cfg.gamma, seed);
  return build_deterministic_masks<double>(d, delta, cfg.damping);
}

TrialResult run_recovery_trial(const ExperimentConfig& cfg, const LiftedSystem<double>& sys,
                               const MaskEnsemble<double>& ens, double snr_db, Index trial, std::uint64_t seed) {
  TrialResult r;
  r.d = ens.d;
  r.delta = ens.delta;
  r.snr_db = snr_db;
  r.trial = trial;
  r.seed = seed;

  Rng rng(split_seed(seed, kSignal));
  const Signal<double> x =
      cfg.flat_signals ? flat_signal<double>(ens.d, cfg.flat_m, rng) : gaussian_signal<double>(ens.d, rng);
  const auto w = cfg.flatten ? FlatteningOperator<double>::random(ens.d, split_seed(seed, kFlattener))
                             : FlatteningOperator<double>::identity(ens.d);
  const auto noisy = add_noise<double>(correlation_measure(w.apply(x), ens), snr_db, split_seed(seed, kNoise));
  r.noise_norm = noisy.noise.norm();

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rec = recover_arbitrary(noisy.values, sys, w);
    r.solve_seconds = seconds_since(t0);
    const auto err = global_phase_align(x, rec.x);
    r.absolute_error = err.absolute_l2;
    r.relative_error = err.relative_l2();
    r.error_db = err.error_db();
    r.kappa = rec.condition.kappa();
    r.unreached = static_cast<Index>(rec.sync.unreached.size());
    r.lifted_noise_inf = residual_noise(sys, noisy.noise).inf_norm;
  } catch (const ConditioningError& e) {
    r.failure = e.what();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.absolute_error = r.relative_error = r.error_db = r.kappa = r.lifted_noise_inf = nan;
  }
  return r;
}

Table run_robustness(const ExperimentConfig& cfg) {
  Table t;
  t.experiment = "robustness";
  t.columns = {"row_type", "d", "delta", "masks", "snr_db", "trial", "seed", "error_db", "absolute_error",
               "relative_error", "kappa", "unreached", "noise_norm", "lifted_noise_inf", "failure",
               "solve_seconds"};
  std::uint64_t point = 0;
  for (Index d : cfg.d) {
    for (Index delta : cfg.delta) {
      const auto ens = make_ensemble(cfg, d, delta, split_seed(cfg.seed ^ kMaskStream, point));
      const auto sys = assemble_blocks(ens);
      for (double snr : cfg.snr_db) {
        std::vector<double> err_db, abs_err, rel_err, unreached, seconds;
        for (Index trial = 0; trial < cfg.trials; ++trial) {
          const auto seed = split_seed(cfg.seed, point * static_cast<std::uint64_t>(cfg.trials) + trial);
          const auto r = run_recovery_trial(cfg, sys, ens, snr, trial, seed);
          t.add({"trial", d, delta, mask_name(ens.kind), snr, trial, seed_cell(seed), r.error_db, r.absolute_error,
                 r.relative_error, r.kappa, r.unreached, r.noise_norm, r.lifted_noise_inf, r.failure,
                 r.solve_seconds});
          if (!r.failure.empty()) continue;
          err_db.push_back(r.error_db);
          abs_err.push_back(r.absolute_error);
          rel_err.push_back(r.relative_error);
          unreached.push_back(static_cast<double>(r.unreached));
          seconds.push_back(r.solve_seconds);
        }
        t.add({"mean", d, delta, mask_name(ens.kind), snr, static_cast<std::int64_t>(err_db.size()),
               std::string(), mean(err_db), mean(abs_err), mean(rel_err), sys.condition().kappa(),
               mean(unreached), std::numeric_limits<double>::quiet_NaN(),
               std::numeric_limits<double>::quiet_NaN(), std::string(), mean(seconds)});
        ++point;
      }
    }
  }
  return t;
}

// Timed solves are interleaved across parameter points (trial-major), so a
// slow stretch on the host spreads over every d instead of landing on one.
Table run_runtime(const ExperimentConfig& cfg) {
  struct Point {
    MaskEnsemble<double> ens;
    LiftedSystem<double> sys;
    Signal<double> x;
    MeasurementVector<double> b;
    std::vector<double> seconds;
    std::vector<double> errors;
  };
  std::vector<Point> points;
  std::uint64_t counter = 0;
  for (Index delta : cfg.delta)
    for (Index d : cfg.d) {
      auto ens = make_ensemble(cfg, d, delta, split_seed(cfg.seed ^ kMaskStream, counter));
      auto sys = assemble_blocks(ens);
      Rng rng(split_seed(cfg.seed, counter));
      Signal<double> x = gaussian_signal<double>(d, rng);
      auto b = correlation_measure(x, ens);
      points.push_back({std::move(ens), std::move(sys), std::move(x), std::move(b), {}, {}});
      ++counter;
    }

  for (Index trial = 0; trial < cfg.trials; ++trial)
    for (auto& p : points) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto rec = blockpr_recover(p.b, p.sys);
      p.seconds.push_back(seconds_since(t0));
      p.errors.push_back(global_phase_align(p.x, rec.x).relative_l2());
    }

  Table t;
  t.experiment = "runtime";
  t.columns = {"row_type", "d", "delta", "masks", "trial", "relative_error", "solve_seconds"};
  for (const auto& p : points) {
    const auto name = mask_name(p.ens.kind);
    for (Index trial = 0; trial < cfg.trials; ++trial)
      t.add({"trial", p.ens.d, p.ens.delta, name, trial, p.errors[static_cast<std::size_t>(trial)],
             p.seconds[static_cast<std::size_t>(trial)]});
    t.add({"median", p.ens.d, p.ens.delta, name, static_cast<std::int64_t>(p.seconds.size()),
           std::numeric_limits<double>::quiet_NaN(), median(p.seconds)});
  }
  return t;
}

Table run_condno(const ExperimentConfig& cfg) {
  Table t;
  t.experiment = "condno";
  t.columns = {"d", "delta", "masks", "damping", "kappa", "kappa_bound", "sigma_min", "sigma_max",
               "sigma_lower_bound", "sigma_upper_bound", "within_bounds"};
  std::uint64_t point = 0;
  for (Index d : cfg.d) {
    for (Index delta : cfg.delta) {
      const auto ens = make_ensemble(cfg, d, delta, split_seed(cfg.seed ^ kMaskStream, point++));
      const auto sys = assemble_blocks(ens);
      const auto c = sys.condition();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      if (ens.kind == MaskKind::deterministic_fourier) {
        const double a = ens.damping;
        const double lo = block_sigma_lower_bound<double>(delta, a);
        const double hi = block_sigma_upper_bound<double>(a);
        const double kb = kappa_upper_bound<double>(delta);
        const bool ok = c.sigma_min >= lo && c.sigma_max <= hi && c.kappa() < kb;
        t.add({d, delta, "det", a, c.kappa(), kb, c.sigma_min, c.sigma_max, lo, hi, std::int64_t{ok}});
      } else {
        t.add({d, delta, mask_name(ens.kind), nan, c.kappa(), nan, c.sigma_min, c.sigma_max, nan, nan,
               std::int64_t{-1}});
      }
    }
  }
  return t;
}

Table run_flatness(const ExperimentConfig& cfg) {
  Table t;
  t.experiment = "flatness";
  t.columns = {"row_type", "d", "m", "trial", "flat", "flat_before", "norm_error", "roundtrip_error"};
  std::uint64_t point = 0;
  for (Index d : cfg.d) {
    Index flat_count = 0;
    double worst_norm = 0;
    double worst_roundtrip = 0;
    for (Index trial = 0; trial < cfg.trials; ++trial) {
      const auto seed = split_seed(cfg.seed, point * static_cast<std::uint64_t>(cfg.trials) + trial);
      Rng rng(split_seed(seed, kSignal));
      const Signal<double> x = gaussian_signal<double>(d, rng);
      const auto w = FlatteningOperator<double>::random(d, split_seed(seed, kFlattener));
      const Signal<double> wx = w.apply(x);
      const bool flat = is_m_flat(wx, cfg.flat_m).is_flat;
      const double norm_err = std::abs(wx.norm() - x.norm()) / x.norm();
      const double rt_err = (w.apply_inverse(wx) - x).norm() / x.norm();
      flat_count += flat;
      worst_norm = std::max(worst_norm, norm_err);
      worst_roundtrip = std::max(worst_roundtrip, rt_err);
      t.add({"trial", d, cfg.flat_m, trial, std::int64_t{flat}, std::int64_t{is_m_flat(x, cfg.flat_m).is_flat},
             norm_err, rt_err});
    }
    t.add({"fraction", d, cfg.flat_m, cfg.trials,
           static_cast<double>(flat_count) / static_cast<double>(std::max<Index>(cfg.trials, 1)),
           std::numeric_limits<double>::quiet_NaN(), worst_norm, worst_roundtrip});
    ++point;
  }
  return t;
}

Table run_sparse(const ExperimentConfig& cfg) {
  Table t;
  t.experiment = "sparse";
  t.columns = {"row_type", "d", "sketch_rows", "sparsity", "inner_delta", "snr_db", "trial", "seed",
               "relative_error", "converged", "iterations", "decoder_residual", "solve_seconds"};
  std::uint64_t point = 0;
  for (Index d : cfg.d) {
    for (double snr : cfg.snr_db) {
      std::vector<double> errs;
      Index successes = 0;
      for (Index trial = 0; trial < cfg.trials; ++trial) {
        const auto seed = split_seed(cfg.seed, point * static_cast<std::uint64_t>(cfg.trials) + trial);
        Rng rng(split_seed(seed, kSignal));
        const Signal<double> x = sparse_signal<double>(d, cfg.sparsity, rng);
        SparsePipelineConfig sp;
        sp.sparsity = cfg.sparsity;
        sp.sketch_rows = cfg.sketch_rows;
        sp.sketch = cfg.sketch;
        sp.sketch_seed = split_seed(seed, kSketch);
        const auto sketch = make_sketch<double>(sp, d);
        const auto inner = InnerSystem<double>::deterministic(cfg.sketch_rows, cfg.inner_delta,
                                                              split_seed(seed, kFlattener));
        const auto b = add_noise<double>(sparse_measure(x, sketch, inner), snr, split_seed(seed, kNoise));
        const auto t0 = std::chrono::steady_clock::now();
        const auto rec = sparse_recover(b.values, sketch, inner, sp);
        const double secs = seconds_since(t0);
        const double err = global_phase_align(x, rec.x).relative_l2();
        errs.push_back(err);
        successes += err < 1e-4;
        t.add({"trial", d, cfg.sketch_rows, cfg.sparsity, cfg.inner_delta, snr, trial, seed_cell(seed), err,
               std::int64_t{rec.decode.converged}, rec.decode.iterations, rec.decode.residual, secs});
      }
      t.add({"mean", d, cfg.sketch_rows, cfg.sparsity, cfg.inner_delta, snr, successes, std::string(), mean(errs),
             std::int64_t{-1}, std::int64_t{-1}, std::numeric_limits<double>::quiet_NaN(),
             std::numeric_limits<double>::quiet_NaN()});
      ++point;
    }
  }
  return t;
}

Table run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::robustness: return run_robustness(cfg);
    case Experiment::runtime: return run_runtime(cfg);
    case Experiment::condno: return run_condno(cfg);
    case Experiment::flatness: return run_flatness(cfg);
    case Experiment::sparse: return run_sparse(cfg);
    case Experiment::verify:
    case Experiment::recover: break;
  }
  throw DomainError("run_experiment: " + to_string(cfg.experiment) + " is not a table experiment");
}

}  // namespace blockpr::bench
