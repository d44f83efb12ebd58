#pragma once

// Experiment orchestration: single trials, parameter sweeps over (p, gamma,
// beta), deterministic aggregation, CSV and SVG emission.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heavybo/datagen.hpp"

namespace heavybo {

struct SweepGrid {
  std::vector<std::size_t> p_values;
  std::vector<double> gamma_values;
  std::vector<double> beta_values;
  std::size_t n_train = 200;
  std::size_t n_test = 1000;
  double eta = 0.05;
  MeanSpec mean = MeanSpec::dense_power();
  Mixing mixing = Mixing::kIdentity;
  Calibration calibration = Calibration::kUnitVariance;
  std::size_t trials = 20;
  long epochs = 100000;
  std::uint64_t master_seed = 0;
  /// One test set (and mixing matrix) per cell instead of per trial.
  bool shared_test_set = false;

  void validate() const;
  std::size_t cell_count() const { return p_values.size() * gamma_values.size() * beta_values.size(); }
};

struct CellKey {
  std::size_t p = 0;
  double gamma = 0.0;
  double beta = 0.0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct TrialResult {
  CellKey cell;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double train_error = 0.0;
  double test_error = 0.0;
  /// A separating direction was found (the trained iterate or a solver witness).
  bool separable = false;
  double final_loss = 0.0;
  std::chrono::duration<double> wall_time{0.0};
  bool failed = false;
  std::string failure;
};

struct AggregateCell {
  CellKey cell;
  std::size_t trials_used = 0;
  std::size_t failed_trials = 0;
  double mean_train_error = 0.0;
  double mean_test_error = 0.0;
  /// Absent with fewer than two successful trials.
  std::optional<double> sem_test_error;
  std::optional<double> ci95_halfwidth;

  /// At least one success and at most 20% failures.
  bool valid() const;
};

/// Cells in sweep order: p outermost, then gamma, then beta.
std::vector<CellKey> enumerate_cells(const SweepGrid& grid);

/// hash(master_seed, cell coordinates, trial index).
std::uint64_t trial_seed(std::uint64_t master_seed, const CellKey& cell, std::size_t trial);
std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& cell);

/// Fresh train and test sets from seed, gradient descent, errors of the
/// final iterate. Numerical failures are captured in the result.
TrialResult run_trial(const CellKey& cell, const SweepGrid& grid, std::size_t trial, std::uint64_t seed);

/// Groups results by cell (in enumerate_cells order) and folds them in trial order.
std::vector<AggregateCell> aggregate_trials(const SweepGrid& grid, std::vector<TrialResult> results);

struct SweepResult {
  std::vector<TrialResult> trials;  // sorted by (cell, trial)
  std::vector<AggregateCell> cells;
};

using SweepProgress = std::function<void(const TrialResult&)>;

SweepResult run_sweep(const SweepGrid& grid, unsigned workers = 1, const SweepProgress& progress = {});

inline constexpr const char* kSweepCsvHeader =
    "p,gamma,beta,trials_used,mean_train_error,mean_test_error,sem_test_error,ci95_halfwidth,failed_trials";

void write_sweep_csv(const std::vector<AggregateCell>& table, std::ostream& out);
/// Throws DataError for an empty table or an unwritable path.
void emit_csv(const std::vector<AggregateCell>& table, const std::filesystem::path& path);
std::vector<AggregateCell> read_sweep_csv(const std::filesystem::path& path);

void write_trials_csv(const std::vector<TrialResult>& trials, std::ostream& out);

enum class PlotKind { kErrorVsP, kHeatmap };
PlotKind parse_plot_kind(const std::string& text);

struct PlotOptions {
  /// Noise level drawn as a horizontal rule on error-vs-p plots.
  std::optional<double> eta;
  std::string title;
};

std::string render_svg(const std::vector<AggregateCell>& table, PlotKind kind, const PlotOptions& options = {});
void emit_plot(const std::vector<AggregateCell>& table, PlotKind kind, const std::filesystem::path& path,
               const PlotOptions& options = {});

/// "key = value" lines; sequences are comma separated; '#' starts a comment.
SweepGrid parse_sweep_config(std::istream& in);
SweepGrid load_sweep_config(const std::filesystem::path& path);
/// Applies one setting by key (same keys as the config file).
void apply_sweep_setting(SweepGrid& grid, const std::string& key, const std::string& value);

}  // namespace heavybo
