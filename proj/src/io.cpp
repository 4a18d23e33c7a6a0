#include "blockpr/bench.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace blockpr::bench {

namespace {

static_assert(std::endian::native == std::endian::little, "binary files assume a little-endian host");

std::vector<double> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % sizeof(double) != 0) throw DomainError(path + ": size is not a multiple of 8 bytes");
  std::vector<double> v(bytes.size() / sizeof(double));
  std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

void write_binary(const std::string& path, const double* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

// Rows of comma-separated numbers; blank lines and '#' comments skipped.
std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw DomainError(path + ": not a number: '" + field + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

FileFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  return dot != std::string::npos && path.substr(dot) == ".csv" ? FileFormat::csv : FileFormat::binary;
}

MeasurementVector<double> read_measurements(const std::string& path, FileFormat fmt) {
  std::vector<double> v;
  if (fmt == FileFormat::binary) {
    v = read_binary(path);
  } else {
    for (const auto& row : read_csv_rows(path)) {
      if (row.size() != 1) throw DomainError(path + ": expected one value per line");
      v.push_back(row[0]);
    }
  }
  return Eigen::Map<const MeasurementVector<double>>(v.data(), static_cast<Index>(v.size()));
}

void write_measurements(const std::string& path, const MeasurementVector<double>& b, FileFormat fmt) {
  if (fmt == FileFormat::binary) return write_binary(path, b.data(), static_cast<std::size_t>(b.size()));
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out.precision(17);
  for (Index i = 0; i < b.size(); ++i) out << b(i) << "\n";
}

Signal<double> read_signal(const std::string& path, FileFormat fmt) {
  std::vector<double> v;
  if (fmt == FileFormat::binary) {
    v = read_binary(path);
    if (v.size() % 2) throw DomainError(path + ": odd number of values for interleaved complex data");
  } else {
    for (const auto& row : read_csv_rows(path)) {
      if (row.size() != 2) throw DomainError(path + ": expected 're,im' per line");
      v.insert(v.end(), row.begin(), row.end());
    }
  }
  Signal<double> x(static_cast<Index>(v.size() / 2));
  for (Index i = 0; i < x.size(); ++i) x(i) = {v[2 * i], v[2 * i + 1]};
  return x;
}

void write_signal(const std::string& path, const Signal<double>& x, FileFormat fmt) {
  if (fmt == FileFormat::binary)
    return write_binary(path, reinterpret_cast<const double*>(x.data()), 2 * static_cast<std::size_t>(x.size()));
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out.precision(17);
  for (Index i = 0; i < x.size(); ++i) out << x(i).real() << "," << x(i).imag() << "\n";
}

std::string ensemble_descriptor(const MaskEnsemble<double>& ens) {
  nlohmann::json j;
  j["d"] = ens.d;
  j["delta"] = ens.delta;
  switch (ens.kind) {
    case MaskKind::deterministic_fourier:
      j["kind"] = "deterministic_fourier";
      j["a"] = ens.damping;
      break;
    case MaskKind::random_gaussian:
      j["kind"] = "random_gaussian";
      j["gamma"] = ens.gamma;
      j["seed"] = ens.seed;
      break;
    case MaskKind::custom:
      throw DomainError("ensemble_descriptor: custom masks have no compact descriptor");
  }
  return j.dump();
}

MaskEnsemble<double> ensemble_from_descriptor(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const auto kind = j.at("kind").get<std::string>();
    const auto d = j.at("d").get<Index>();
    const auto delta = j.at("delta").get<Index>();
    if (kind == "deterministic_fourier") return build_deterministic_masks<double>(d, delta, j.at("a").get<double>());
    if (kind == "random_gaussian")
      return build_random_masks<double>(d, delta, j.at("gamma").get<double>(), j.at("seed").get<std::uint64_t>());
    throw DomainError("ensemble descriptor: unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("ensemble descriptor: ") + e.what());
  }
}

}  // namespace blockpr::bench
