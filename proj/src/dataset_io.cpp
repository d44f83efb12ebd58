#include "heavybo/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "heavybo/csv.hpp"
#include "heavybo/error.hpp"

namespace heavybo {

namespace {

constexpr std::string_view kMagic = "HEAVYBO-DATASET 1";

static_assert(std::endian::native == std::endian::little,
              "binary dataset format assumes a little-endian host");

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

int label_from(std::int8_t v, const char* what) {
  if (v != 1 && v != -1) throw DataError(std::string("invalid ") + what + " value in dataset");
  return v;
}

}  // namespace

void save_dataset_binary(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& c = ds.config;
  out << kMagic << '\n'
      << "p " << ds.dim() << '\n'
      << "n " << ds.size() << '\n'
      << "shape " << format_exact(c.shape) << '\n'
      << "eta " << format_exact(c.noise_rate) << '\n'
      << "seed " << c.seed << '\n'
      << "calibration " << to_string(c.calibration) << '\n'
      << "mixing " << to_string(c.mixing) << '\n'
      << "mean " << c.mean.to_string() << '\n'
      << "data\n";
  write_doubles(out, ds.points.data(), ds.dim() * ds.size());
  write_doubles(out, ds.mu.data(), ds.dim());
  std::vector<std::int8_t> buf(ds.size());
  for (std::size_t k = 0; k < ds.size(); ++k) buf[k] = static_cast<std::int8_t>(ds.labels[k]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  for (std::size_t k = 0; k < ds.size(); ++k) buf[k] = static_cast<std::int8_t>(ds.clean_labels[k]);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  out.write(reinterpret_cast<const char*>(ds.noise_mask.data()),
            static_cast<std::streamsize>(ds.noise_mask.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

Dataset load_dataset_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw DataError(path.string() + ": not a heavybo binary dataset");
  }
  std::map<std::string, std::string> header;
  while (std::getline(in, line) && line != "data") {
    const auto space = line.find(' ');
    if (space == std::string::npos) throw DataError(path.string() + ": malformed header line");
    header[line.substr(0, space)] = line.substr(space + 1);
  }
  if (line != "data") throw DataError(path.string() + ": missing data section");
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw DataError(path.string() + ": header lacks '" + key + "'");
    return it->second;
  };

  Dataset ds;
  auto& c = ds.config;
  try {
    c.p = std::stoull(field("p"));
    c.n = std::stoull(field("n"));
    c.shape = std::stod(field("shape"));
    c.noise_rate = std::stod(field("eta"));
    c.seed = std::stoull(field("seed"));
  } catch (const std::logic_error&) {
    throw DataError(path.string() + ": malformed numeric header field");
  }
  c.calibration = parse_calibration(field("calibration"));
  c.mixing = parse_mixing(field("mixing"));
  const auto& mean = field("mean");
  c.mean = mean == "explicit" ? MeanSpec::explicit_vector({}) : MeanSpec::parse(mean);
  if (c.p == 0 || c.n == 0) throw DataError(path.string() + ": empty dataset");

  const auto p = static_cast<Eigen::Index>(c.p);
  const auto n = static_cast<Eigen::Index>(c.n);
  ds.points.resize(p, n);
  ds.mu.resize(p);
  read_doubles(in, ds.points.data(), c.p * c.n);
  read_doubles(in, ds.mu.data(), c.p);
  if (c.mean.kind == MeanSpec::Kind::kExplicit) c.mean.values = ds.mu;
  std::vector<std::int8_t> labels(c.n), clean(c.n);
  ds.noise_mask.resize(c.n);
  in.read(reinterpret_cast<char*>(labels.data()), n);
  in.read(reinterpret_cast<char*>(clean.data()), n);
  in.read(reinterpret_cast<char*>(ds.noise_mask.data()), n);
  if (!in) throw DataError(path.string() + ": truncated payload");
  ds.labels.resize(c.n);
  ds.clean_labels.resize(c.n);
  for (std::size_t k = 0; k < c.n; ++k) {
    ds.labels[k] = label_from(labels[k], "label");
    ds.clean_labels[k] = label_from(clean[k], "clean label");
    if ((ds.noise_mask[k] != 0) != (ds.labels[k] != ds.clean_labels[k])) {
      throw DataError(path.string() + ": noise mask disagrees with labels");
    }
  }
  return ds;
}

void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < ds.dim(); ++i) out << "x_" << (i + 1) << ',';
  out << "y,y_clean,noisy\n";
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const auto col = ds.points.col(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < col.size(); ++i) out << format_exact(col(i)) << ',';
    out << ds.labels[k] << ',' << ds.clean_labels[k] << ',' << int{ds.noise_mask[k]} << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  const auto table = read_numeric_csv(path);
  const auto cols = table.values.cols();
  if (cols < 4 || table.values.rows() < 1) {
    throw DataError(path.string() + ": dataset CSV needs x columns plus y,y_clean,noisy");
  }
  Dataset ds;
  const auto p = cols - 3;
  const auto n = table.values.rows();
  ds.config.p = static_cast<std::size_t>(p);
  ds.config.n = static_cast<std::size_t>(n);
  ds.points = table.values.leftCols(p).transpose();
  if (!ds.points.allFinite()) throw DataError(path.string() + ": non-finite feature value");
  ds.mu = Vector::Zero(p);
  ds.config.mean = MeanSpec::explicit_vector(ds.mu);
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.clean_labels.resize(static_cast<std::size_t>(n));
  ds.noise_mask.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    ds.labels[idx] = label_from(static_cast<std::int8_t>(table.values(k, p)), "y");
    ds.clean_labels[idx] = label_from(static_cast<std::int8_t>(table.values(k, p + 1)), "y_clean");
    ds.noise_mask[idx] = ds.labels[idx] != ds.clean_labels[idx] ? 1 : 0;
    if (table.values(k, p + 2) != static_cast<double>(ds.noise_mask[idx])) {
      throw DataError(path.string() + ": noisy column disagrees with labels");
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? load_dataset_csv(path) : load_dataset_binary(path);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    save_dataset_csv(ds, path);
  } else {
    save_dataset_binary(ds, path);
  }
}

}  // namespace heavybo
