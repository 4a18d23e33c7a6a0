// blockpr: experiment harness and recovery front end.

#include "blockpr/angular_sync.hpp"
#include "blockpr/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace bench = blockpr::bench;
using blockpr::Index;

namespace {

// "64", "64,128" or "lo:hi". Ranges double for dimensions and step by one otherwise.
std::vector<Index> parse_indices(const std::string& text, bool doubling) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoll(item));
        continue;
      }
      const Index lo = std::stoll(item.substr(0, colon));
      const Index hi = std::stoll(item.substr(colon + 1));
      if (lo < 1 || hi < lo) throw blockpr::DomainError("bad range '" + item + "'");
      for (Index v = lo; v <= hi; v = doubling ? 2 * v : v + 1) out.push_back(v);
    } catch (const std::logic_error&) {
      throw blockpr::DomainError("bad integer list '" + text + "'");
    }
  }
  if (out.empty()) throw blockpr::DomainError("empty integer list");
  return out;
}

std::vector<double> parse_snr(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "+inf")
      out.push_back(std::numeric_limits<double>::infinity());
    else
      try {
        out.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        throw blockpr::DomainError("bad SNR list '" + text + "'");
      }
  }
  return out;
}

struct Options {
  std::string d;
  std::string delta;
  std::string masks = "det";
  double a = 0;
  double gamma = 1.0;
  std::string snr;
  Index trials = 0;
  std::uint64_t seed = 1;
  std::string out;
  bool json = false;
  bool no_flatten = false;
  bool flat_signals = false;
  Index m = 2;
  Index sketch_rows = 64;
  Index sparsity = 4;
  Index inner_delta = 7;
  std::string sketch = "dft";
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--d", o.d, "dimension(s): N, N1,N2 or LO:HI (doubling)");
  sub->add_option("--delta", o.delta, "mask support(s): N, N1,N2 or LO:HI");
  sub->add_option("--masks", o.masks, "mask family")->check(CLI::IsMember({"det", "rand"}));
  sub->add_option("--a", o.a, "damping for det masks (default max(4, (delta-1)/2))");
  sub->add_option("--gamma", o.gamma, "oversampling factor for rand masks");
  sub->add_option("--snr", o.snr, "SNR list in dB ('inf' for noiseless)");
  sub->add_option("--trials", o.trials, "trials per parameter point");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--out", o.out, "output file (default: stdout)");
  sub->add_flag("--json", o.json, "emit JSON instead of CSV");
}

bench::ExperimentConfig to_config(const Options& o, bench::Experiment e, const std::string& d_default,
                                  const std::string& delta_default, const std::string& snr_default,
                                  Index trials_default) {
  bench::ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.d = parse_indices(o.d.empty() ? d_default : o.d, true);
  cfg.delta = parse_indices(o.delta.empty() ? delta_default : o.delta, false);
  cfg.masks = o.masks == "rand" ? blockpr::MaskKind::random_gaussian : blockpr::MaskKind::deterministic_fourier;
  if (o.a > 0) cfg.damping = o.a;
  cfg.gamma = o.gamma;
  cfg.snr_db = parse_snr(o.snr.empty() ? snr_default : o.snr);
  cfg.trials = o.trials > 0 ? o.trials : trials_default;
  cfg.seed = o.seed;
  cfg.flatten = !o.no_flatten;
  cfg.flat_signals = o.flat_signals;
  cfg.flat_m = o.m;
  cfg.sketch_rows = o.sketch_rows;
  cfg.sparsity = o.sparsity;
  cfg.inner_delta = o.inner_delta;
  cfg.sketch = o.sketch == "gaussian" ? blockpr::SketchKind::gaussian : blockpr::SketchKind::subsampled_dft;
  return cfg;
}

template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty()) return write(std::cout);
  std::ofstream f(path);
  if (!f) throw blockpr::DomainError("cannot write " + path);
  write(f);
}

int run_recover(const Options& o, const std::string& signal_path, const std::string& meas_path,
                const std::string& measurements_out, std::int64_t flatten_seed) {
  if (signal_path.empty() == meas_path.empty())
    throw blockpr::DomainError("recover: give exactly one of --signal or --measurements");
  if (o.out.empty()) throw blockpr::DomainError("recover: --out is required");
  const Index delta = parse_indices(o.delta.empty() ? "8" : o.delta, false).front();

  blockpr::Signal<double> truth;
  blockpr::MeasurementVector<double> b;
  Index d = 0;
  const auto mask_count = o.masks == "rand" ? blockpr::random_mask_count(delta, o.gamma) : 2 * delta - 1;
  if (!signal_path.empty()) {
    truth = bench::read_signal(signal_path, bench::format_from_path(signal_path));
    d = truth.size();
  } else {
    b = bench::read_measurements(meas_path, bench::format_from_path(meas_path));
    if (b.size() % mask_count) throw blockpr::DomainError("recover: measurement count is not a multiple of L");
    d = b.size() / mask_count;
  }

  bench::ExperimentConfig cfg;
  cfg.masks = o.masks == "rand" ? blockpr::MaskKind::random_gaussian : blockpr::MaskKind::deterministic_fourier;
  if (o.a > 0) cfg.damping = o.a;
  cfg.gamma = o.gamma;
  const auto ens = bench::make_ensemble(cfg, d, delta, o.seed);
  const auto sys = blockpr::assemble_blocks(ens);
  const auto w = flatten_seed >= 0
                     ? blockpr::FlatteningOperator<double>::random(d, static_cast<std::uint64_t>(flatten_seed))
                     : blockpr::FlatteningOperator<double>::identity(d);

  if (!signal_path.empty()) {
    const double snr = o.snr.empty() ? std::numeric_limits<double>::infinity() : parse_snr(o.snr).front();
    b = blockpr::add_noise<double>(blockpr::correlation_measure(w.apply(truth), ens), snr, o.seed).values;
    if (!measurements_out.empty())
      bench::write_measurements(measurements_out, b, bench::format_from_path(measurements_out));
  }

  const auto rec = blockpr::recover_arbitrary(b, sys, w);
  bench::write_signal(o.out, rec.x, bench::format_from_path(o.out));
  std::cerr << "ensemble " << bench::ensemble_descriptor(ens) << "\n"
            << "kappa " << rec.condition.kappa() << " unreached " << rec.sync.unreached.size() << "\n";
  if (truth.size()) std::cerr << "error_db " << blockpr::global_phase_align(truth, rec.x).error_db() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval from local correlation measurements: experiments and recovery"};
  app.require_subcommand(1);
  Options o;

  auto* robustness = app.add_subcommand("robustness", "error vs SNR");
  add_common(robustness, o);
  robustness->add_flag("--no-flatten", o.no_flatten, "measure x directly instead of W x");
  robustness->add_flag("--flat-signals", o.flat_signals, "use m-flat test signals");
  robustness->add_option("--m", o.m, "flatness block size for --flat-signals");

  auto* runtime = app.add_subcommand("runtime", "solve time vs d");
  add_common(runtime, o);

  auto* condno = app.add_subcommand("condno", "condition number vs delta");
  add_common(condno, o);

  auto* flatness = app.add_subcommand("flatness", "how often W x is m-flat");
  add_common(flatness, o);
  flatness->add_option("--m", o.m, "flatness block size");

  auto* sparse = app.add_subcommand("sparse", "compressive pipeline on sparse signals");
  add_common(sparse, o);
  sparse->add_option("--sketch-rows", o.sketch_rows, "sketch length m");
  sparse->add_option("--sparsity", o.sparsity, "sparsity s");
  sparse->add_option("--inner-delta", o.inner_delta, "mask support of the inner stage");
  sparse->add_option("--sketch", o.sketch, "sketch family")->check(CLI::IsMember({"dft", "gaussian"}));

  double perturb = 0;
  auto* verify = app.add_subcommand("verify", "run invariant checks");
  verify->add_flag("--json", o.json, "emit JSON");
  verify->add_option("--seed", o.seed, "seed for random draws");
  verify->add_option("--out", o.out, "output file (default: stdout)");
  verify->add_option("--perturb-masks", perturb, "test hook: relative mask perturbation")->group("");

  std::string signal_path, meas_path, measurements_out;
  std::int64_t flatten_seed = -1;
  auto* recover = app.add_subcommand("recover", "recover a signal from a file");
  add_common(recover, o);
  recover->add_option("--signal", signal_path, "signal file; measurements are simulated");
  recover->add_option("--measurements", meas_path, "measurement file");
  recover->add_option("--write-measurements", measurements_out, "save simulated measurements");
  recover->add_option("--flatten-seed", flatten_seed, "measure/recover W x with this flattener seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const auto rep = bench::verify({perturb, o.seed});
      with_output(o.out, [&](std::ostream& os) { bench::write_report(os, rep, o.json); });
      return rep.passed() ? 0 : 1;
    }
    if (recover->parsed()) return run_recover(o, signal_path, meas_path, measurements_out, flatten_seed);

    bench::ExperimentConfig cfg;
    if (robustness->parsed())
      cfg = to_config(o, bench::Experiment::robustness, "64", "8", "10,20,30,40,50,60", 100);
    else if (runtime->parsed())
      cfg = to_config(o, bench::Experiment::runtime, "1024:32768", "8", "inf", 20);
    else if (condno->parsed())
      cfg = to_config(o, bench::Experiment::condno, "64", "2:16", "inf", 1);
    else if (flatness->parsed())
      cfg = to_config(o, bench::Experiment::flatness, "1024", "8", "inf", 500);
    else
      cfg = to_config(o, bench::Experiment::sparse, "256", "8", "inf", 100);
    if (flatness->parsed() && flatness->count("--m") == 0) cfg.flat_m = 64;

    const auto table = bench::run_experiment(cfg);
    with_output(o.out, [&](std::ostream& os) {
      if (o.json)
        bench::write_json(os, table);
      else
        bench::write_csv(os, table);
    });
  } catch (const blockpr::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
