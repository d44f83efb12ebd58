// Acceptance checks. Each criterion prints one PASS/FAIL line; the process
// exits non-zero when any selected criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/SVD>

#include "heavybo/bounds.hpp"
#include "heavybo/csv.hpp"
#include "heavybo/datagen.hpp"
#include "heavybo/distcore.hpp"
#include "heavybo/harness.hpp"
#include "heavybo/rng.hpp"
#include "heavybo/tailindex.hpp"
#include "heavybo/trainer.hpp"
#include "oracles.hpp"

using namespace heavybo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

// ---- criteria 1 and 2 ------------------------------------------------------

const std::map<std::pair<std::size_t, double>, double> kReferenceErrors = {
    {{100, 0.25}, 0.1288},  {{100, 0.5}, 0.1047},  {{100, 2.0}, 0.0823},
    {{400, 0.25}, 0.0578},  {{400, 0.5}, 0.0519},  {{400, 2.0}, 0.0531},
    {{800, 0.25}, 0.0518},  {{800, 0.5}, 0.0495},  {{800, 2.0}, 0.0512},
    {{1500, 0.25}, 0.0502}, {{1500, 0.5}, 0.0500}, {{1500, 2.0}, 0.0497},
};

SweepGrid reference_grid() {
  SweepGrid g;
  g.p_values = {100, 400, 800, 1500};
  g.gamma_values = {0.25, 0.5, 2.0};
  g.beta_values = {0.001};
  g.n_train = 200;
  g.n_test = 1000;
  g.eta = 0.05;
  g.mean = MeanSpec::ones();
  g.mixing = Mixing::kHaar;
  g.calibration = Calibration::kUnitVariance;
  g.trials = 50;
  g.epochs = 100000;
  g.master_seed = 20240601;
  return g;
}

std::string join(const auto& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ",";
    out += format_exact(static_cast<double>(v));
  }
  return out;
}

std::string grid_fingerprint(const SweepGrid& g) {
  std::ostringstream s;
  s << "p_values = " << join(g.p_values) << "\n"
    << "gamma_values = " << join(g.gamma_values) << "\n"
    << "beta_values = " << join(g.beta_values) << "\n"
    << "n_train = " << g.n_train << "\n"
    << "n_test = " << g.n_test << "\n"
    << "eta = " << format_exact(g.eta) << "\n"
    << "mean = " << g.mean.to_string() << "\n"
    << "mixing = " << to_string(g.mixing) << "\n"
    << "calibration = " << to_string(g.calibration) << "\n"
    << "trials = " << g.trials << "\n"
    << "epochs = " << g.epochs << "\n"
    << "master_seed = " << g.master_seed << "\n";
  return s.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the reference grid, or reuses the table a previous run left behind
/// for the same grid.
std::vector<AggregateCell> reference_sweep() {
  const SweepGrid grid = reference_grid();
  const fs::path dir = fs::path(HEAVYBO_ACCEPTANCE_DIR) / "reference";
  const std::string fingerprint = grid_fingerprint(grid);
  if (fs::exists(dir / "sweep.csv") && slurp(dir / "grid.cfg") == fingerprint) {
    std::printf("# reusing %s\n", (dir / "sweep.csv").c_str());
    return read_sweep_csv(dir / "sweep.csv");
  }
  const auto start = std::chrono::steady_clock::now();
  const SweepResult result = run_sweep(grid, std::max(1u, std::thread::hardware_concurrency()));
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  std::printf("# reference sweep: %zu trials in %.1f min\n", result.trials.size(), minutes);
  fs::create_directories(dir);
  emit_csv(result.cells, dir / "sweep.csv");
  {
    std::ofstream out(dir / "trials.csv");
    write_trials_csv(result.trials, out);
  }
  std::ofstream(dir / "grid.cfg") << fingerprint;
  return result.cells;
}

Outcome criterion1() {
  const auto cells = reference_sweep();
  bool pass = true;
  std::string misses;
  double worst = 0.0;
  for (const auto& c : cells) {
    const double target = kReferenceErrors.at({c.cell.p, c.cell.gamma});
    const double gap = std::abs(c.mean_test_error - target);
    worst = std::max(worst, gap);
    std::printf("#   p=%-5zu gamma=%-5g test=%.4f (reference %.4f, sem %.4f) train=%.4f failed=%zu\n", c.cell.p,
                c.cell.gamma, c.mean_test_error, target, c.sem_test_error.value_or(0.0), c.mean_train_error,
                c.failed_trials);
    if (gap > 0.010 || !c.valid()) {
      pass = false;
      misses += " test(p=" + std::to_string(c.cell.p) + ",g=" + fmt(c.cell.gamma) + ")=" + fmt(c.mean_test_error);
    }
    if (c.cell.p >= 400 && c.mean_train_error > 0.005) {
      pass = false;
      misses += " train(p=" + std::to_string(c.cell.p) + ",g=" + fmt(c.cell.gamma) + ")=" + fmt(c.mean_train_error);
    }
  }
  return {pass, "12 cells, max |test - table| = " + fmt(worst) + (misses.empty() ? "" : ";" + misses)};
}

Outcome criterion2() {
  const auto cells = reference_sweep();
  bool pass = true;
  std::string detail;
  for (const auto& c : cells) {
    if (c.cell.p != 1500) continue;
    const double gap = std::abs(c.mean_test_error - 0.05);
    pass = pass && gap <= 0.01;
    detail += " gamma=" + fmt(c.cell.gamma) + ":" + fmt(c.mean_test_error);
  }
  return {pass, "p=1500 test error vs 0.05:" + detail};
}

// ---- criterion 3 -----------------------------------------------------------

Outcome criterion3() {
  const std::size_t p = 100, n = 20;
  const double delta = 0.5, alpha = 2.0, kappa = 1.0;
  const BoundConstants consts;
  const double mu_norm = consts.C * std::pow(std::log(static_cast<double>(n) / delta), 1.0 / alpha);
  Vector mu = build_mean_vector(MeanSpec::dense_power(), p);
  mu *= mu_norm / mu.norm();

  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    MixtureConfig mc;
    mc.p = p;
    mc.n = n;
    mc.shape = 2.0;
    mc.noise_rate = 0.0;
    mc.mean = MeanSpec::explicit_vector(mu);
    mc.seed = derive_seed(3, {seed});
    const Dataset ds = generate_dataset(mc);
    const Matrix z = z_matrix(ds);
    const double s1 = empirical_top_singular(z, 1e-10);
    const AssumptionReport report = check_assumptions(p, n, mu_norm, delta, alpha, kappa, std::nullopt, s1, consts);
    if (!report.get("A4").satisfied) return {false, "A4 not met by construction"};

    TrainConfig cfg;
    cfg.learning_rate = 0.5 * report.lr_bound;
    cfg.epochs = 200000;
    const ModelState state = gd_train_z(z, cfg);
    OracleOptions opts;
    opts.tol = 1e-10;
    const MarginSolution sol = hard_margin_oracle_z(z, opts);
    const double cos = cosine_similarity(state.theta, sol.w);
    std::printf("#   instance %llu: beta=%.3g cosine=%.5f\n", static_cast<unsigned long long>(seed), cfg.learning_rate, cos);
    worst = std::min(worst, cos);
  }
  return {worst >= 0.99, "min cosine over 10 instances = " + fmt(worst, 5) + " (need >= 0.99)"};
}

// ---- criterion 4 -----------------------------------------------------------

Outcome criterion4() {
  Rng rng(4);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    MixtureConfig mc;
    mc.p = 2 + rng.next_u64() % 19;
    mc.n = 1 + rng.next_u64() % 10;
    mc.shape = 0.5 + 1.5 * rng.uniform();
    mc.noise_rate = 0.2;
    mc.mean = MeanSpec::dense_power();
    mc.seed = rng.next_u64();
    const Dataset ds = generate_dataset(mc);
    const Vector theta = 0.5 * random_matrix(static_cast<Eigen::Index>(mc.p), 1, rng);
    const Vector analytic = loss_gradient(theta, ds);
    const Vector numeric =
        oracle::finite_difference_gradient([&](const Vector& t) { return logistic_loss(t, ds); }, theta, 1e-5);
    worst = std::max(worst, (analytic - numeric).lpNorm<Eigen::Infinity>() / analytic.lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-5, "max relative error = " + fmt(worst, 3)};
}

// ---- criterion 5 -----------------------------------------------------------

Outcome criterion5() {
  Rng rng(5);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    MixtureConfig mc;
    mc.n = 2 + rng.next_u64() % 9;
    mc.p = mc.n + rng.next_u64() % (51 - mc.n);
    mc.shape = 1.0;
    mc.noise_rate = 0.1;
    mc.mean = MeanSpec::dense_power();
    mc.seed = rng.next_u64();
    const Dataset ds = generate_dataset(mc);
    const MarginSolution sol = hard_margin_oracle(ds, 1e-10);
    const double objective = 0.5 * sol.w.squaredNorm();
    const double brute = oracle::projected_gradient_margin_objective(z_matrix(ds), 1000000);
    worst = std::max(worst, std::abs(objective - brute) / brute);
  }
  return {worst <= 1e-4, "max relative objective gap = " + fmt(worst, 3)};
}

// ---- criterion 6 -----------------------------------------------------------

Outcome criterion6() {
  const Eigen::Index rows = 10000, cols = 200;
  Matrix normal(rows, cols), expo(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    Rng rn(6, static_cast<std::uint64_t>(j));
    Rng re(60, static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < rows; ++i) {
      normal(i, j) = rn.normal();
      expo(i, j) = -std::log(re.uniform_open());
    }
  }
  const DatasetTailReport rn = estimate_dataset_tails(normal);
  const DatasetTailReport re = estimate_dataset_tails(expo);
  if (!rn.summary || !re.summary) return {false, "tail fits failed"};
  const double mn = rn.summary->mean_xi, me = re.summary->mean_xi;

  double exact_gap = 0.0;
  for (double xi : {0.5, 1.0, 1.6172, 2.0, 3.0}) {
    TailPoints pts;
    pts.n_total = 10000;
    for (int i = 500; i >= 1; --i) {
      const double t = 1.0 + 0.01 * i;
      pts.pairs.push_back({t, 0.8 * std::pow(t, xi) - 0.3});
    }
    exact_gap = std::max(exact_gap, std::abs(fit_tail_index(pts).xi - xi));
  }
  const bool pass = mn >= 1.3 && mn <= 1.9 && me >= 0.75 && me <= 1.05 && exact_gap <= 1e-3;
  return {pass, "normal mean xi = " + fmt(mn) + " (var " + fmt(rn.summary->variance_xi) + "), exponential mean xi = " +
                    fmt(me) + " (var " + fmt(re.summary->variance_xi) + "), exact-model max error = " + fmt(exact_gap, 3)};
}

// ---- criterion 7 -----------------------------------------------------------

Outcome criterion7() {
  const bool a = c2_constant(2.0, 0.5) == 32.0;

  bool b = true;
  for (double p : {100.0, 1000.0, 10000.0})
    for (double n : {3.0, 30.0, 300.0}) {
      double previous = 0.0;
      for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
        const double v = lr_bound_cor8(p, n, alpha, 1.0);
        b = b && v > previous;
        previous = v;
      }
    }

  bool c = true;
  for (double p : {50.0, 200.0, 1000.0, 5000.0})
    for (double alpha : {0.5, 1.0, 2.0}) {
      double previous = 2.0;
      for (double mu : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double v = theorem1_bound(0.05, mu, p, alpha, 1.0);
        c = c && v <= previous;
        previous = v;
      }
    }
  for (double mu : {1.0, 3.0, 10.0})
    for (double alpha : {0.5, 1.0, 2.0}) {
      double previous = 0.0;
      for (double p : {10.0, 100.0, 1000.0, 1e4, 1e5}) {
        const double v = theorem1_bound(0.05, mu, p, alpha, 1.0);
        c = c && v >= previous;
        previous = v;
      }
    }

  double worst = 0.0;
  const auto shape = [](double n) { return std::pow(1.0 + 1.0 / std::sqrt(std::log(n)), -2.0); };
  for (double p : {100.0, 1e4})
    for (double n1 : {3.0, 10.0, 100.0})
      for (double n2 : {5.0, 1000.0, 1e6}) {
        const double observed = lr_bound_cor8(p, n2, 2.0, 1.0) / lr_bound_cor8(p, n1, 2.0, 1.0);
        worst = std::max(worst, std::abs(observed / (shape(n2) / shape(n1)) - 1.0));
      }
  const bool d = worst <= 1e-12;
  return {a && b && c && d, std::string("(a) ") + (a ? "ok" : "FAIL") + " (b) " + (b ? "ok" : "FAIL") + " (c) " +
                                (c ? "ok" : "FAIL") + " (d) " + (d ? "ok" : "FAIL") + " ratio error " + fmt(worst, 3)};
}

// ---- criterion 8 -----------------------------------------------------------

Outcome criterion8() {
  const std::size_t p = 2000;
  int separable = 0, norms = 0, noise = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MixtureConfig mc;
    mc.p = p;
    mc.n = 50;
    mc.shape = 2.0;
    mc.noise_rate = 0.05;
    mc.mean = MeanSpec::explicit_vector(
        Vector::Constant(static_cast<Eigen::Index>(p), std::pow(static_cast<double>(p), 0.3) / std::sqrt(static_cast<double>(p))));
    mc.seed = derive_seed(8, {seed});
    const ConcentrationAudit audit = concentration_audit(generate_dataset(mc));
    separable += audit.separable ? 1 : 0;
    norms += (audit.norm_ratio.min >= 0.5 && audit.norm_ratio.max <= 2.0) ? 1 : 0;
    noise += (audit.noisy_fraction >= 0.0 && audit.noisy_fraction <= 0.15) ? 1 : 0;
  }
  return {separable >= 95 && norms >= 95 && noise >= 95,
          "separable " + std::to_string(separable) + "/100, norm ratio in band " + std::to_string(norms) +
              "/100, noisy fraction in band " + std::to_string(noise) + "/100"};
}

// ---- criterion 9 -----------------------------------------------------------

double empirical_variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

Outcome criterion9() {
  Rng rng(9);
  double svd_gap = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.next_u64() % 40);
    const auto cols = static_cast<Eigen::Index>(1 + rng.next_u64() % 15);
    const Matrix m = random_matrix(rows, cols, rng);
    const double ref = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
    svd_gap = std::max(svd_gap, std::abs(empirical_top_singular(m, 1e-10) - ref) / ref);
  }

  const Matrix u = random_orthogonal(200, 9).entries;
  const double orth = (u.transpose() * u - Matrix::Identity(200, 200)).norm();

  double mass_gap = 0.0;
  for (double shape : {0.25, 0.5, 1.0, 2.0}) {
    const GenNormalParams prm{0.0, 1.0, shape};
    auto f = [&](double t) { return 2.0 * gennormal_pdf(t, prm); };
    const double upper = std::pow(30.0, 1.0 / shape);
    mass_gap = std::max(mass_gap, std::abs(oracle::integrate_half_line(f, 1e-6, upper) - 1.0));
  }

  double var_gap = 0.0;
  std::string vars;
  for (double shape : {0.5, 1.0, 2.0}) {
    const auto batch = gennormal_sample({0.0, unit_variance_scale(shape), shape}, 100000, derive_seed(9, {double_bits(shape)}));
    const double v = empirical_variance(batch.values);
    var_gap = std::max(var_gap, std::abs(v - 1.0));
    vars += " g=" + fmt(shape) + ":" + fmt(v);
  }
  const auto heavy = gennormal_sample({0.0, unit_variance_scale(0.25), 0.25}, 4000000, 925);
  const double heavy_var = empirical_variance(heavy.values);
  var_gap = std::max(var_gap, std::abs(heavy_var - 1.0));
  vars += " g=0.25(4e6):" + fmt(heavy_var);

  const bool pass = svd_gap <= 1e-6 && orth <= 1e-8 && mass_gap <= 1e-6 && var_gap <= 0.05;
  return {pass, "svd gap " + fmt(svd_gap, 3) + ", |U'U-I| " + fmt(orth, 3) + ", pdf mass gap " + fmt(mass_gap, 3) +
                    ", variances" + vars};
}

// ---- criterion 10 ----------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HEAVYBO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion10() {
  const fs::path dir = fs::path(HEAVYBO_ACCEPTANCE_DIR) / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "grid.cfg");
    cfg << "p_values = 50, 120\ngamma_values = 0.5, 2\nbeta_values = 0.001, 0.01\n"
           "n_train = 30\nn_test = 200\ntrials = 4\nepochs = 2000\nmixing = haar\nmaster_seed = 10\n";
  }
  const std::string base = "sweep --quiet --config " + (dir / "grid.cfg").string();
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"a", " --workers 1"}, {"b", " --workers 1"}, {"c", " --workers 8"}};
  for (const auto& [name, flags] : runs) {
    const int code = run_cli(base + flags + " --out-dir " + (dir / name).string());
    if (code != 0) return {false, "sweep run " + name + " exited with " + std::to_string(code)};
  }
  const std::string a = slurp(dir / "a" / "sweep.csv");
  const bool repeat = !a.empty() && a == slurp(dir / "b" / "sweep.csv") &&
                      slurp(dir / "a" / "trials.csv") == slurp(dir / "b" / "trials.csv");
  const bool workers = a == slurp(dir / "c" / "sweep.csv") &&
                       slurp(dir / "a" / "trials.csv") == slurp(dir / "c" / "trials.csv");
  return {repeat && workers, std::string("repeat ") + (repeat ? "identical" : "DIFFERENT") + ", 1 vs 8 workers " +
                                 (workers ? "identical" : "DIFFERENT")};
}

const std::vector<std::function<Outcome()>> kCriteria = {
    criterion1, criterion2, criterion3, criterion4, criterion5,
    criterion6, criterion7, criterion8, criterion9, criterion10,
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 1;
    }
  }
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(kCriteria.size()); ++k) selected.push_back(k);

  int failures = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 1;
    }
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = kCriteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d: %s  %s [%.1fs]\n", k, out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
