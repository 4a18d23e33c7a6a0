#pragma once

// Seeded experiment harness. Every random draw in a run derives from the
// master seed through split_seed(master, counter), so results do not depend
// on evaluation order. Columns whose names end in "_seconds" hold wall-clock
// timings and are the only non-reproducible output.

#include "blockpr/core.hpp"
#include "blockpr/lifted_solver.hpp"
#include "blockpr/masks.hpp"
#include "blockpr/sparse_pipeline.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace blockpr::bench {

enum class Experiment { robustness, runtime, condno, flatness, sparse, verify, recover };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
  Experiment experiment = Experiment::robustness;
  std::vector<Index> d{64};
  std::vector<Index> delta{8};
  MaskKind masks = MaskKind::deterministic_fourier;
  std::optional<double> damping;
  double gamma = 1.0;
  std::vector<double> snr_db{10, 20, 30, 40, 50, 60};
  Index trials = 100;
  std::uint64_t seed = 1;
  bool flatten = true;
  bool flat_signals = false;  // m-flat test signals (gaussian background)
  Index flat_m = 2;

  // sparse
  Index sketch_rows = 64;
  Index sparsity = 4;
  SketchKind sketch = SketchKind::subsampled_dft;
  Index inner_delta = 7;
};

// Trial-level outcome of one recovery.
struct TrialResult {
  Index d = 0;
  Index delta = 0;
  double snr_db = 0;
  Index trial = 0;
  std::uint64_t seed = 0;
  double error_db = 0;
  double absolute_error = 0;
  double relative_error = 0;
  double kappa = 0;
  double solve_seconds = 0;
  Index unreached = 0;
  double noise_norm = 0;
  double lifted_noise_inf = 0;
  std::string failure;  // conditioning failure message, empty on success
};

// One seeded recovery of a fresh test signal through the given system.
TrialResult run_recovery_trial(const ExperimentConfig& cfg, const LiftedSystem<double>& sys,
                               const MaskEnsemble<double>& ens, double snr_db, Index trial, std::uint64_t seed);

MaskEnsemble<double> make_ensemble(const ExperimentConfig& cfg, Index d, Index delta, std::uint64_t seed);

// Rectangular result: one header, rows of mixed cells.
using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

inline constexpr const char* kCsvSchema = "blockpr-csv v1";

void write_csv(std::ostream& out, const Table& t);
void write_json(std::ostream& out, const Table& t);

Table run_robustness(const ExperimentConfig& cfg);
Table run_runtime(const ExperimentConfig& cfg);
Table run_condno(const ExperimentConfig& cfg);
Table run_flatness(const ExperimentConfig& cfg);
Table run_sparse(const ExperimentConfig& cfg);
Table run_experiment(const ExperimentConfig& cfg);

// verify: invariant checks with a pass/fail verdict each.
struct Check {
  std::string name;
  double value = 0;
  double bound = 0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<Check> checks;
  bool passed() const;
};

struct VerifyOptions {
  double mask_perturbation = 0;  // test hook: relative noise added to the masks
  std::uint64_t seed = 1;
};

VerifyReport verify(const VerifyOptions& opts = {});
void write_report(std::ostream& out, const VerifyReport& r, bool json);

// Reproducibility descriptor for a mask ensemble (no raw matrices).
std::string ensemble_descriptor(const MaskEnsemble<double>& ens);
MaskEnsemble<double> ensemble_from_descriptor(const std::string& json);

// Files for the recover subcommand. Binary files are little-endian float64:
// measurements as D reals, signals as d interleaved (re, im) pairs. CSV files
// hold one value (measurements) or one "re,im" pair (signals) per line.
enum class FileFormat { binary, csv };

FileFormat format_from_path(const std::string& path);
MeasurementVector<double> read_measurements(const std::string& path, FileFormat fmt);
void write_measurements(const std::string& path, const MeasurementVector<double>& b, FileFormat fmt);
Signal<double> read_signal(const std::string& path, FileFormat fmt);
void write_signal(const std::string& path, const Signal<double>& x, FileFormat fmt);

}  // namespace blockpr::bench
