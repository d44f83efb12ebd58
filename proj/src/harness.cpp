#include "heavybo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

#include "heavybo/csv.hpp"
#include "heavybo/error.hpp"
#include "heavybo/parallel.hpp"
#include "heavybo/rng.hpp"
#include "heavybo/trainer.hpp"

namespace heavybo {

namespace {

constexpr std::uint64_t kTestStream = 0x54455354ULL;
// Sweep budget of the separability fallback inside a trial; the trained
// iterate is tried first and is usually a witness already.
constexpr long kTrialOracleSweeps = 2000;

}  // namespace

void SweepGrid::validate() const {
  if (p_values.empty() || gamma_values.empty() || beta_values.empty()) {
    throw ConfigError("sweep grid axes must be nonempty");
  }
  for (auto p : p_values) {
    if (p < 1) throw ConfigError("p values must be >= 1");
  }
  for (double g : gamma_values) {
    if (!(g > 0.0)) throw ConfigError("gamma values must be positive");
  }
  for (double b : beta_values) {
    if (!(b > 0.0)) throw ConfigError("beta values must be positive");
  }
  if (n_train < 1 || n_test < 1) throw ConfigError("n_train and n_test must be >= 1");
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0, 1]");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

bool AggregateCell::valid() const {
  const std::size_t total = trials_used + failed_trials;
  return trials_used > 0 && 5 * failed_trials <= total;
}

std::vector<CellKey> enumerate_cells(const SweepGrid& grid) {
  std::vector<CellKey> cells;
  cells.reserve(grid.cell_count());
  for (auto p : grid.p_values) {
    for (double g : grid.gamma_values) {
      for (double b : grid.beta_values) cells.push_back({p, g, b});
    }
  }
  return cells;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& cell) {
  return derive_seed(master_seed, {cell.p, double_bits(cell.gamma), double_bits(cell.beta)});
}

std::uint64_t trial_seed(std::uint64_t master_seed, const CellKey& cell, std::size_t trial) {
  return derive_seed(cell_seed(master_seed, cell), {trial});
}

TrialResult run_trial(const CellKey& cell, const SweepGrid& grid, std::size_t trial, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  result.cell = cell;
  result.trial = trial;
  result.seed = seed;
  try {
    MixtureConfig config;
    config.p = cell.p;
    config.n = grid.n_train;
    config.shape = cell.gamma;
    config.calibration = grid.calibration;
    config.mean = grid.mean;
    config.noise_rate = grid.eta;
    config.mixing = grid.mixing;
    config.seed = grid.shared_test_set ? cell_seed(grid.master_seed, cell) : seed;

    const MixtureModel model(config);
    const Dataset train = model.sample(grid.n_train, training_sample_seed(seed));
    const Dataset test = model.sample(grid.n_test, derive_seed(config.seed, {kTestStream}));

    TrainConfig train_cfg;
    train_cfg.learning_rate = cell.beta;
    train_cfg.epochs = grid.epochs;
    const Matrix z = z_matrix(train);
    const ModelState state = gd_train_z(z, train_cfg);

    result.final_loss = state.loss;
    result.train_error = evaluate_error(state.theta, train);
    result.test_error = evaluate_error(state.theta, test);
    if (result.train_error == 0.0) {
      result.separable = true;
    } else {
      try {
        OracleOptions options;
        options.tol = 1e-6;
        options.max_sweeps = kTrialOracleSweeps;
        result.separable = hard_margin_oracle_z(z, options).min_margin > 0.0;
      } catch (const InfeasibleError&) {
        result.separable = false;
      }
    }
  } catch (const Error& e) {
    result.failed = true;
    result.failure = e.what();
  }
  result.wall_time = std::chrono::steady_clock::now() - start;
  return result;
}

std::vector<AggregateCell> aggregate_trials(const SweepGrid& grid, std::vector<TrialResult> results) {
  const auto cells = enumerate_cells(grid);
  std::vector<std::vector<const TrialResult*>> grouped(cells.size());
  for (const auto& r : results) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c] == r.cell) {
        grouped[c].push_back(&r);
        break;
      }
    }
  }
  std::vector<AggregateCell> table;
  table.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& group = grouped[c];
    std::sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->trial < b->trial; });
    AggregateCell agg;
    agg.cell = cells[c];
    double train_sum = 0.0;
    double test_sum = 0.0;
    for (const auto* r : group) {
      if (r->failed) {
        ++agg.failed_trials;
        continue;
      }
      ++agg.trials_used;
      train_sum += r->train_error;
      test_sum += r->test_error;
    }
    if (agg.trials_used > 0) {
      const auto k = static_cast<double>(agg.trials_used);
      agg.mean_train_error = train_sum / k;
      agg.mean_test_error = test_sum / k;
      if (agg.trials_used > 1) {
        double ss = 0.0;
        for (const auto* r : group) {
          if (!r->failed) ss += (r->test_error - agg.mean_test_error) * (r->test_error - agg.mean_test_error);
        }
        const double sem = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
        agg.sem_test_error = sem;
        agg.ci95_halfwidth = 1.96 * sem;
      }
    }
    table.push_back(agg);
  }
  return table;
}

SweepResult run_sweep(const SweepGrid& grid, unsigned workers, const SweepProgress& progress) {
  grid.validate();
  const auto cells = enumerate_cells(grid);
  const std::size_t total = cells.size() * grid.trials;
  SweepResult out;
  out.trials.resize(total);
  std::mutex progress_mutex;
  parallel_for(total, workers, [&](std::size_t task) {
    const auto& cell = cells[task / grid.trials];
    const std::size_t trial = task % grid.trials;
    out.trials[task] = run_trial(cell, grid, trial, trial_seed(grid.master_seed, cell, trial));
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(out.trials[task]);
    }
  });
  out.cells = aggregate_trials(grid, out.trials);
  return out;
}

void write_sweep_csv(const std::vector<AggregateCell>& table, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  for (const auto& c : table) {
    out << c.cell.p << ',' << format_exact(c.cell.gamma) << ',' << format_exact(c.cell.beta) << ','
        << c.trials_used << ',' << format_exact(c.mean_train_error) << ','
        << format_exact(c.mean_test_error) << ','
        << (c.sem_test_error ? format_exact(*c.sem_test_error) : "") << ','
        << (c.ci95_halfwidth ? format_exact(*c.ci95_halfwidth) : "") << ',' << c.failed_trials << '\n';
  }
}

void emit_csv(const std::vector<AggregateCell>& table, const std::filesystem::path& path) {
  if (table.empty()) throw DataError("refusing to write an empty sweep table");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_sweep_csv(table, out);
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<AggregateCell> read_sweep_csv(const std::filesystem::path& path) {
  const auto table = read_numeric_csv(path);
  if (table.values.cols() != 9) throw DataError(path.string() + ": expected the 9-column sweep schema");
  std::vector<AggregateCell> cells;
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    const auto row = table.values.row(r);
    AggregateCell c;
    c.cell = {static_cast<std::size_t>(row(0)), row(1), row(2)};
    c.trials_used = static_cast<std::size_t>(row(3));
    c.mean_train_error = row(4);
    c.mean_test_error = row(5);
    if (!std::isnan(row(6))) c.sem_test_error = row(6);
    if (!std::isnan(row(7))) c.ci95_halfwidth = row(7);
    c.failed_trials = static_cast<std::size_t>(row(8));
    cells.push_back(c);
  }
  if (cells.empty()) throw DataError(path.string() + ": sweep table is empty");
  return cells;
}

void write_trials_csv(const std::vector<TrialResult>& trials, std::ostream& out) {
  out << "p,gamma,beta,trial,seed,train_error,test_error,separable,final_loss,status\n";
  for (const auto& t : trials) {
    out << t.cell.p << ',' << format_exact(t.cell.gamma) << ',' << format_exact(t.cell.beta) << ','
        << t.trial << ',' << t.seed << ',' << format_exact(t.train_error) << ','
        << format_exact(t.test_error) << ',' << (t.separable ? 1 : 0) << ','
        << format_exact(t.final_loss) << ',' << (t.failed ? "failed" : "ok") << '\n';
  }
}

}  // namespace heavybo
