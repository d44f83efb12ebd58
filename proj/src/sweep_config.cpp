#include <charconv>
#include <fstream>
#include <istream>

#include "heavybo/csv.hpp"
#include "heavybo/error.hpp"
#include "heavybo/harness.hpp"

namespace heavybo {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_scalar(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("sweep setting '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& field : split_csv_line(text)) {
    if (field.empty()) continue;
    out.push_back(parse_scalar<T>(key, field));
  }
  if (out.empty()) throw ConfigError("sweep setting '" + key + "' is empty");
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("sweep setting '" + key + "' expects true/false");
}

}  // namespace

void apply_sweep_setting(SweepGrid& grid, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "p_values") grid.p_values = parse_list<std::size_t>(key, value);
  else if (key == "gamma_values") grid.gamma_values = parse_list<double>(key, value);
  else if (key == "beta_values") grid.beta_values = parse_list<double>(key, value);
  else if (key == "n_train") grid.n_train = parse_scalar<std::size_t>(key, value);
  else if (key == "n_test") grid.n_test = parse_scalar<std::size_t>(key, value);
  else if (key == "eta") grid.eta = parse_scalar<double>(key, value);
  else if (key == "mean") grid.mean = MeanSpec::parse(value);
  else if (key == "mixing") grid.mixing = parse_mixing(value);
  else if (key == "calibration") grid.calibration = parse_calibration(value);
  else if (key == "trials") grid.trials = parse_scalar<std::size_t>(key, value);
  else if (key == "epochs") grid.epochs = parse_scalar<long>(key, value);
  else if (key == "master_seed") grid.master_seed = parse_scalar<std::uint64_t>(key, value);
  else if (key == "shared_test_set") grid.shared_test_set = parse_bool(key, value);
  else throw ConfigError("unknown sweep setting '" + key + "'");
}

SweepGrid parse_sweep_config(std::istream& in) {
  SweepGrid grid;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("sweep config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_sweep_setting(grid, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return grid;
}

SweepGrid load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep config " + path.string());
  return parse_sweep_config(in);
}

}  // namespace heavybo
