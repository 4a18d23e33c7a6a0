#include "blockpr/bench.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace blockpr;
using namespace blockpr::bench;

namespace {

// Drop columns holding wall-clock timings.
Table without_timing(Table t) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    if (!t.columns[i].ends_with("_seconds")) keep.push_back(i);
  Table out;
  out.experiment = t.experiment;
  for (auto i : keep) out.columns.push_back(t.columns[i]);
  for (const auto& row : t.rows) {
    std::vector<Cell> r;
    for (auto i : keep) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) throw std::runtime_error("no column " + name);
  return static_cast<std::size_t>(it - t.columns.begin());
}

ExperimentConfig small_robustness() {
  ExperimentConfig cfg;
  cfg.d = {32};
  cfg.delta = {4};
  cfg.snr_db = {20, 40};
  cfg.trials = 6;
  cfg.seed = 3;
  return cfg;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST(Harness, DeterministicUpToTiming) {
  for (auto e : {Experiment::robustness, Experiment::flatness, Experiment::sparse}) {
    ExperimentConfig cfg = small_robustness();
    cfg.experiment = e;
    if (e == Experiment::flatness) cfg.d = {256}, cfg.flat_m = 8;
    if (e == Experiment::sparse) cfg.d = {128}, cfg.sketch_rows = 32, cfg.snr_db = {std::numeric_limits<double>::infinity()};
    EXPECT_EQ(csv(without_timing(run_experiment(cfg))), csv(without_timing(run_experiment(cfg)))) << to_string(e);
  }
  ExperimentConfig a = small_robustness(), b = small_robustness();
  b.seed = 4;
  EXPECT_NE(csv(without_timing(run_robustness(a))), csv(without_timing(run_robustness(b))));
}

TEST(Harness, RobustnessAggregatesMatchTrials) {
  const Table t = run_robustness(small_robustness());
  const auto type = column(t, "row_type"), snr = column(t, "snr_db"), err = column(t, "error_db");
  for (double level : {20.0, 40.0}) {
    double sum = 0, reported = std::nan("");
    int n = 0;
    for (const auto& row : t.rows) {
      if (std::get<double>(row[snr]) != level) continue;
      if (std::get<std::string>(row[type]) == "trial") {
        sum += std::get<double>(row[err]);
        ++n;
      } else {
        reported = std::get<double>(row[err]);
      }
    }
    EXPECT_EQ(n, 6);
    EXPECT_NEAR(reported, sum / n, 1e-12);
  }
}

TEST(Harness, CsvHeaderAndJson) {
  const Table t = run_robustness(small_robustness());
  const std::string text = csv(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), std::string("# ") + kCsvSchema + " experiment=robustness");
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_EQ(line.substr(0, 15), "row_type,d,delt");
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, t.rows.size());

  std::ostringstream os;
  write_json(os, t);
  const auto doc = nlohmann::json::parse(os.str());
  EXPECT_EQ(doc["schema"], kCsvSchema);
  EXPECT_EQ(doc["experiment"], "robustness");
  EXPECT_EQ(doc["rows"].size(), t.rows.size());
  EXPECT_EQ(doc["rows"][0]["d"], 32);
}

TEST(Harness, CondnoWithinBounds) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::condno;
  cfg.d = {64};
  cfg.delta = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  const Table t = run_condno(cfg);
  ASSERT_EQ(t.rows.size(), 15u);
  const auto ok = column(t, "within_bounds"), kappa = column(t, "kappa"), bound = column(t, "kappa_bound");
  for (const auto& row : t.rows) {
    EXPECT_EQ(std::get<std::int64_t>(row[ok]), 1);
    EXPECT_LE(std::get<double>(row[kappa]), std::get<double>(row[bound]));
  }
}

TEST(Harness, FlatnessFraction) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::flatness;
  cfg.d = {1024};
  cfg.flat_m = 64;
  cfg.trials = 100;
  const Table t = run_flatness(cfg);
  const auto& last = t.rows.back();
  EXPECT_EQ(std::get<std::string>(last[column(t, "row_type")]), "fraction");
  EXPECT_GE(std::get<double>(last[column(t, "flat")]), 0.9);
  EXPECT_LT(std::get<double>(last[column(t, "roundtrip_error")]), 1e-12);
}

TEST(Harness, RejectsNonTableExperiments) {
  ExperimentConfig cfg;
  cfg.experiment = Experiment::verify;
  EXPECT_THROW(run_experiment(cfg), DomainError);
  EXPECT_THROW(parse_experiment("nope"), DomainError);
  EXPECT_EQ(parse_experiment("condno"), Experiment::condno);
}

TEST(Verify, PassesAndDetectsPerturbation) {
  const auto ok = verify();
  for (const auto& c : ok.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value << " vs " << c.bound;
  EXPECT_TRUE(ok.passed());
  EXPECT_FALSE(verify({0.5, 1}).passed());

  std::ostringstream os;
  write_report(os, ok, true);
  const auto doc = nlohmann::json::parse(os.str());
  EXPECT_TRUE(doc["passed"].get<bool>());
}

TEST(Descriptor, RoundTrip) {
  for (const auto& ens : {build_deterministic_masks<double>(32, 5, 4.5), build_random_masks<double>(32, 5, 1.5, 77)}) {
    const auto back = ensemble_from_descriptor(ensemble_descriptor(ens));
    EXPECT_EQ(back.kind, ens.kind);
    EXPECT_EQ(back.d, ens.d);
    EXPECT_EQ(back.delta, ens.delta);
    EXPECT_TRUE(back.support == ens.support);
  }
  CMatrix<double> support = CMatrix<double>::Ones(3, 2);
  EXPECT_THROW(ensemble_descriptor(make_custom_masks<double>(8, support)), DomainError);
  EXPECT_THROW(ensemble_from_descriptor("{\"kind\": \"weird\"}"), DomainError);
  EXPECT_THROW(ensemble_from_descriptor("not json"), DomainError);
}

TEST(Files, RoundTrips) {
  Rng rng(2);
  const Signal<double> x = complex_gaussian_vector<double>(17, rng);
  RVector<double> b(23);
  for (Index i = 0; i < b.size(); ++i) b(i) = std::norm(complex_gaussian<double>(rng));
  for (auto fmt : {FileFormat::binary, FileFormat::csv}) {
    const auto ext = fmt == FileFormat::binary ? ".bin" : ".csv";
    const auto sp = temp_file(std::string("blockpr_signal") + ext).string();
    const auto mp = temp_file(std::string("blockpr_meas") + ext).string();
    EXPECT_EQ(format_from_path(sp), fmt);
    write_signal(sp, x, fmt);
    write_measurements(mp, b, fmt);
    EXPECT_TRUE(read_signal(sp, fmt) == x);
    EXPECT_TRUE(read_measurements(mp, fmt) == b);
    std::remove(sp.c_str());
    std::remove(mp.c_str());
  }
  EXPECT_THROW(read_signal(temp_file("blockpr_missing.bin").string(), FileFormat::binary), DomainError);
}
