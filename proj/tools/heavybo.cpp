// heavybo: command-line front end for data generation, training, bound
// evaluation, tail-index estimation and experiment sweeps.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "heavybo/bounds.hpp"
#include "heavybo/csv.hpp"
#include "heavybo/datagen.hpp"
#include "heavybo/dataset_io.hpp"
#include "heavybo/error.hpp"
#include "heavybo/harness.hpp"
#include "heavybo/rng.hpp"
#include "heavybo/tailindex.hpp"
#include "heavybo/trainer.hpp"

namespace fs = std::filesystem;
using namespace heavybo;

namespace {

struct GenerateArgs {
  std::size_t p = 100;
  std::size_t n = 200;
  double gamma = 2.0;
  double eta = 0.05;
  std::string mean = "dense";
  std::string mixing = "identity";
  std::string calibration = "variance";
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  MixtureConfig cfg;
  cfg.p = a.p;
  cfg.n = a.n;
  cfg.shape = a.gamma;
  cfg.noise_rate = a.eta;
  cfg.mean = MeanSpec::parse(a.mean);
  cfg.mixing = parse_mixing(a.mixing);
  cfg.calibration = parse_calibration(a.calibration);
  cfg.seed = a.seed;
  const Dataset ds = generate_dataset(cfg);
  save_dataset(ds, a.out);
  std::cout << "wrote " << a.out << ": p=" << ds.dim() << " n=" << ds.size() << " noisy=" << ds.noisy_count()
            << " |mu|=" << ds.mu.norm() << '\n';
  return 0;
}

struct TrainArgs {
  std::string data;
  double beta = 1e-3;
  long epochs = 100000;
  std::uint64_t seed = 0;
  std::string report;
  long log_every = 0;
  bool oracle = false;
  std::size_t test_n = 0;
  double direction_tol = 0.0;
};

int run_train(const TrainArgs& a) {
  const Dataset ds = load_dataset(a.data);
  TrainConfig cfg;
  cfg.learning_rate = a.beta;
  cfg.epochs = a.epochs;
  cfg.direction_tol = a.direction_tol;
  const long log_every = a.log_every > 0 ? a.log_every : std::max(1L, a.epochs / 100);

  std::optional<Vector> oracle_w;
  if (a.oracle) {
    oracle_w = hard_margin_oracle(ds, 1e-8).w;
  }
  std::ofstream report;
  if (!a.report.empty()) {
    report.open(a.report);
    if (!report) throw DataError("cannot write " + a.report);
    report << "epoch,loss,grad_norm,train_error" << (oracle_w ? ",cosine_to_oracle" : "") << '\n';
  }
  auto observer = [&](long epoch, const Vector& theta, double loss, double grad_norm) {
    if (!report.is_open()) return;
    const bool zero = theta.isZero(0.0);
    report << epoch << ',' << format_exact(loss) << ',' << format_exact(grad_norm) << ','
           << format_exact(zero ? 1.0 : evaluate_error(theta, ds));
    if (oracle_w) report << ',' << (zero ? std::string() : format_exact(cosine_similarity(theta, *oracle_w)));
    report << '\n';
  };
  const ModelState state = gd_train(ds, cfg, observer, log_every);
  std::cout << "epochs=" << state.epoch << (state.early_stopped ? " (early stop)" : "") << '\n'
            << "loss=" << state.loss << '\n'
            << "grad_norm=" << state.grad_norm << '\n'
            << "loss_monotone=" << (state.loss_monotone ? "true" : "false") << '\n'
            << "train_error=" << evaluate_error(state.theta, ds) << '\n';
  if (oracle_w) std::cout << "cosine_to_oracle=" << cosine_similarity(state.theta, *oracle_w) << '\n';
  if (a.test_n > 0) {
    if (ds.config.mean.kind == MeanSpec::Kind::kExplicit && ds.mu.isZero(0.0) && a.data.ends_with(".csv")) {
      throw ConfigError("--test-n needs a binary dataset that records its generating configuration");
    }
    const MixtureModel model(ds.config);
    const Dataset test = model.sample(a.test_n, derive_seed(a.seed, {0x7465737431ULL}));
    std::cout << "test_error=" << evaluate_error(state.theta, test) << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string out_dir = "sweep_out";
  unsigned workers = 1;
  std::vector<std::string> settings;
  std::optional<std::string> p, gamma, beta, mean, mixing, calibration;
  std::optional<std::size_t> trials, n_train, n_test;
  std::optional<long> epochs;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int run_sweep_cmd(const SweepArgs& a) {
  SweepGrid grid = a.config.empty() ? SweepGrid{} : load_sweep_config(a.config);
  for (const auto& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value");
    apply_sweep_setting(grid, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.p) apply_sweep_setting(grid, "p_values", *a.p);
  if (a.gamma) apply_sweep_setting(grid, "gamma_values", *a.gamma);
  if (a.beta) apply_sweep_setting(grid, "beta_values", *a.beta);
  if (a.mean) apply_sweep_setting(grid, "mean", *a.mean);
  if (a.mixing) apply_sweep_setting(grid, "mixing", *a.mixing);
  if (a.calibration) apply_sweep_setting(grid, "calibration", *a.calibration);
  if (a.trials) grid.trials = *a.trials;
  if (a.n_train) grid.n_train = *a.n_train;
  if (a.n_test) grid.n_test = *a.n_test;
  if (a.epochs) grid.epochs = *a.epochs;
  if (a.eta) grid.eta = *a.eta;
  if (a.seed) grid.master_seed = *a.seed;
  grid.validate();

  fs::create_directories(a.out_dir);
  std::size_t done = 0;
  const std::size_t total = grid.cell_count() * grid.trials;
  auto progress = [&](const TrialResult& r) {
    ++done;
    if (a.quiet) return;
    std::fprintf(stderr, "[%zu/%zu] p=%zu gamma=%g beta=%g trial=%zu test=%.4f train=%.4f%s (%.1fs)\n", done,
                 total, r.cell.p, r.cell.gamma, r.cell.beta, r.trial, r.test_error, r.train_error,
                 r.failed ? " FAILED" : "", r.wall_time.count());
  };
  const SweepResult result = run_sweep(grid, a.workers, progress);
  emit_csv(result.cells, fs::path(a.out_dir) / "sweep.csv");
  {
    std::ofstream trials(fs::path(a.out_dir) / "trials.csv");
    write_trials_csv(result.trials, trials);
  }
  for (const auto& c : result.cells) {
    std::printf("p=%-6zu gamma=%-6g beta=%-8g test=%.4f", c.cell.p, c.cell.gamma, c.cell.beta, c.mean_test_error);
    if (c.sem_test_error) std::printf(" (sem %.4f)", *c.sem_test_error);
    std::printf(" train=%.4f used=%zu failed=%zu%s\n", c.mean_train_error, c.trials_used, c.failed_trials,
                c.valid() ? "" : " INVALID");
  }
  return 0;
}

struct BoundsArgs {
  double p = 0.0;
  double n = 0.0;
  std::optional<double> mu_norm;
  std::optional<std::string> mean;
  double delta = 0.05;
  double alpha = 2.0;
  double kappa = 1.0;
  double eta = 0.0;
  std::optional<double> beta;
  std::optional<double> s1;
  std::string consts;
};

int run_bounds(const BoundsArgs& a) {
  const BoundConstants consts = a.consts.empty() ? BoundConstants{} : BoundConstants::from_file(a.consts);
  if (!(a.p >= 1.0) || !(a.n >= 1.0)) throw ConfigError("--p and --n must be >= 1");
  Vector mu;
  std::string mu_source;
  if (a.mean) {
    mu = build_mean_vector(MeanSpec::parse(*a.mean), static_cast<std::size_t>(a.p));
    mu_source = *a.mean;
  } else if (a.mu_norm) {
    // Only the norm is known; it is placed on the first coordinate.
    mu = Vector::Zero(static_cast<Eigen::Index>(a.p));
    mu(0) = *a.mu_norm;
    mu_source = "norm on first coordinate";
  } else {
    throw ConfigError("one of --mu-norm or --mean is required");
  }
  const double mu_norm = mu.norm();
  const double s1_bound = singular_value_bound(a.p, a.n, mu, a.delta, a.alpha, consts);
  const double s1 = a.s1.value_or(s1_bound);
  const auto report = check_assumptions(a.p, a.n, mu_norm, a.delta, a.alpha, a.kappa, a.beta, s1, consts);

  std::printf("inputs: p=%g n=%g |mu|=%g (%s) delta=%g alpha=%g kappa=%g\n", a.p, a.n, mu_norm,
              mu_source.c_str(), a.delta, a.alpha, a.kappa);
  std::printf("%-4s %14s %3s %14s  %s\n", "name", "lhs", "", "rhs", "status");
  for (const auto& c : report.checks) {
    std::printf("%-4s %14.6g %3s %14.6g  %s\n", c.name.c_str(), c.lhs, c.relation.c_str(), c.rhs,
                c.satisfied ? "ok" : "VIOLATED");
  }
  std::printf("\n");
  const auto kv = [](const char* key, double v) { std::printf("%s=%s\n", key, format_exact(v).c_str()); };
  kv("c2", report.c2);
  for (const auto& c : report.checks) {
    std::printf("%s.lhs=%s\n%s.rhs=%s\n%s.satisfied=%s\n", c.name.c_str(), format_exact(c.lhs).c_str(),
                c.name.c_str(), format_exact(c.rhs).c_str(), c.name.c_str(), c.satisfied ? "true" : "false");
  }
  kv("s1_used", s1);
  kv("s1_bound", s1_bound);
  kv("lr_bound_a5", report.lr_bound);
  kv("lr_bound_a6", lr_bound_a6(a.p, a.n, mu, a.delta, a.alpha, a.kappa, consts));
  kv("lr_bound_cor7", lr_bound_cor7(a.p, consts.c9));
  if (a.n >= 2.0) kv("lr_bound_cor8", lr_bound_cor8(a.p, a.n, a.alpha, consts.c10));
  kv("theorem1_bound", theorem1_bound(a.eta, mu_norm, a.p, a.alpha, consts.c));
  return 0;
}

struct TailArgs {
  std::string in;
  std::string out;
  double fraction = kDefaultTailFraction;
  unsigned workers = 1;
};

int run_tail_index(const TailArgs& a) {
  const auto table = read_numeric_csv(a.in);
  if (table.values.rows() == 0) throw DataError(a.in + ": no samples");
  const auto report = estimate_dataset_tails(table.values, a.fraction, a.workers);
  std::ofstream out(a.out);
  if (!out) throw DataError("cannot write " + a.out);
  out << "column,xi,a,b,rss,status\n";
  for (const auto& c : report.columns) {
    const std::string id = c.column < table.header.size() ? table.header[c.column] : std::to_string(c.column + 1);
    out << id << ',';
    if (c.fit) {
      out << format_exact(c.fit->xi) << ',' << format_exact(c.fit->a) << ',' << format_exact(c.fit->b) << ','
          << format_exact(c.fit->rss) << ',' << c.status << '\n';
    } else {
      std::string reason = c.status;
      for (char& ch : reason) {
        if (ch == ',') ch = ';';
      }
      out << ",,,," << "failed: " << reason << '\n';
    }
  }
  if (!out) throw DataError("write failed for " + a.out);
  if (!report.summary) throw DataError("no column could be fitted");
  std::printf("fitted=%zu/%zu mean_xi=%.4f variance_xi=%.4f\n", report.summary->fitted, report.columns.size(),
              report.summary->mean_xi, report.summary->variance_xi);
  return 0;
}

struct PlotArgs {
  std::string in;
  std::string out;
  std::string kind = "error-vs-p";
  std::optional<double> eta;
  std::string title;
};

int run_plot(const PlotArgs& a) {
  const auto table = read_sweep_csv(a.in);
  PlotOptions options;
  options.eta = a.eta;
  options.title = a.title;
  emit_plot(table, parse_plot_kind(a.kind), a.out, options);
  std::cout << "wrote " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavybo: benign overfitting with heavy-tailed inputs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a mixture dataset");
  generate->add_option("--p", gen.p, "Dimension")->required();
  generate->add_option("--n", gen.n, "Number of samples")->required();
  generate->add_option("--gamma", gen.gamma, "Shape of the generalized normal cluster noise");
  generate->add_option("--eta", gen.eta, "Label flip probability");
  generate->add_option("--mean", gen.mean, "dense | ones | rareweak:s,lambda");
  generate->add_option("--mixing", gen.mixing, "identity | haar");
  generate->add_option("--calibration", gen.calibration, "variance | orlicz");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out, "Output file (.csv or binary)")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Gradient descent on the logistic loss");
  train->add_option("--data", tr.data, "Dataset file")->required();
  train->add_option("--beta", tr.beta, "Learning rate");
  train->add_option("--epochs", tr.epochs, "Number of epochs");
  train->add_option("--seed", tr.seed, "Seed of the held-out test set drawn with --test-n");
  train->add_option("--report", tr.report, "Per-epoch CSV report");
  train->add_option("--log-every", tr.log_every, "Report interval in epochs (default epochs/100)");
  train->add_flag("--oracle", tr.oracle, "Also solve the hard-margin problem and report cosine similarity");
  train->add_option("--test-n", tr.test_n, "Draw a fresh test set of this size from the recorded model");
  train->add_option("--direction-tol", tr.direction_tol, "Early stop on direction stabilization (0 = off)");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Run a (p, gamma, beta) experiment grid");
  sweep->add_option("--config", sw.config, "Config file of key = value lines");
  sweep->add_option("--set", sw.settings, "Override one config key (key=value), repeatable");
  sweep->add_option("--p", sw.p, "Comma separated p values");
  sweep->add_option("--gamma", sw.gamma, "Comma separated gamma values");
  sweep->add_option("--beta", sw.beta, "Comma separated beta values");
  sweep->add_option("--mean", sw.mean, "dense | ones | rareweak:s,lambda");
  sweep->add_option("--mixing", sw.mixing, "identity | haar");
  sweep->add_option("--calibration", sw.calibration, "variance | orlicz");
  sweep->add_option("--trials", sw.trials, "Trials per cell");
  sweep->add_option("--n-train", sw.n_train, "Training samples");
  sweep->add_option("--n-test", sw.n_test, "Test samples");
  sweep->add_option("--epochs", sw.epochs, "Epochs per trial");
  sweep->add_option("--eta", sw.eta, "Label flip probability");
  sweep->add_option("--seed", sw.seed, "Master seed");
  sweep->add_option("--workers", sw.workers, "Worker threads");
  sweep->add_option("--out-dir", sw.out_dir, "Output directory");
  sweep->add_flag("--quiet", sw.quiet, "No per-trial progress");

  BoundsArgs bd;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the assumptions and analytic bounds");
  bounds->add_option("--p", bd.p, "Dimension")->required();
  bounds->add_option("--n", bd.n, "Sample count")->required();
  bounds->add_option("--mu-norm", bd.mu_norm, "Norm of the mean vector");
  bounds->add_option("--mean", bd.mean, "Mean spec (dense | ones | rareweak:s,lambda) instead of --mu-norm");
  bounds->add_option("--delta", bd.delta, "Failure probability");
  bounds->add_option("--alpha", bd.alpha, "Tail parameter in (0, 2]");
  bounds->add_option("--kappa", bd.kappa, "Lower bound of E|q|^2 / p");
  bounds->add_option("--eta", bd.eta, "Noise level for the generalization bound");
  bounds->add_option("--beta", bd.beta, "Learning rate to check");
  bounds->add_option("--s1", bd.s1, "Top singular value of Z (default: the high-probability bound)");
  bounds->add_option("--consts", bd.consts, "File of constant overrides (C, c, c5..c10)");

  TailArgs ta;
  auto* tail = app.add_subcommand("tail-index", "Estimate tail indices of CSV columns");
  tail->add_option("--in", ta.in, "Input CSV (columns = features)")->required();
  tail->add_option("--out", ta.out, "Report CSV")->required();
  tail->add_option("--fraction", ta.fraction, "Upper tail fraction");
  tail->add_option("--workers", ta.workers, "Worker threads");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Render a sweep CSV as SVG");
  plot->add_option("--in", pl.in, "Sweep CSV")->required();
  plot->add_option("--out", pl.out, "SVG output")->required();
  plot->add_option("--kind", pl.kind, "error-vs-p | heatmap");
  plot->add_option("--eta", pl.eta, "Noise level rule");
  plot->add_option("--title", pl.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::kConfig);
  }

  try {
    if (*generate) return run_generate(gen);
    if (*train) return run_train(tr);
    if (*sweep) return run_sweep_cmd(sw);
    if (*bounds) return run_bounds(bd);
    if (*tail) return run_tail_index(ta);
    if (*plot) return run_plot(pl);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kRuntime);
  }
  return 0;
}
