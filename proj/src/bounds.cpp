#include "heavybo/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "heavybo/distcore.hpp"
#include "heavybo/error.hpp"
#include "heavybo/trainer.hpp"

namespace heavybo {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// The bracket of the singular-value bound, i.e. s1 bound / sqrt(p).
double singular_value_bracket(double p, double n, const Vector& mu, double delta, double alpha,
                              const BoundConstants& consts) {
  require_positive(p, "p");
  require_positive(n, "n");
  require_delta(delta);
  require_alpha(alpha);
  consts.validate();
  const double l1 = mu.size() ? mu.cwiseAbs().sum() : 0.0;
  const double linf = mu.size() ? mu.cwiseAbs().maxCoeff() : 0.0;
  const double sq = mu.squaredNorm();
  const double tail = std::pow(n * std::log(9.0) + std::log(4.0 / delta), 2.0 / alpha);
  return consts.c5 + consts.c6 * std::sqrt(n) * l1 / p + 2.0 * n * sq / p +
         (consts.c7 + consts.c8 * linf * std::sqrt(n)) / p * tail;
}

// exp(-c x^a / p^{b}) evaluated in log space; x = 0 gives exp(0).
double decay_term(double c, double x, double a, double p, double b) {
  if (x <= 0.0) return 1.0;
  const double log_exponent = std::log(c) + a * std::log(x) - b * std::log(p);
  return std::exp(-std::exp(log_exponent));
}

}  // namespace

void BoundConstants::validate() const {
  for (double v : {C, c, c5, c6, c7, c8, c9, c10}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("bound constants must be positive");
  }
}

BoundConstants BoundConstants::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open constants file " + path.string());
  BoundConstants consts;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("constants file: expected 'name = value'");
    const auto key = trim(line.substr(0, eq));
    double value = 0.0;
    try {
      value = std::stod(trim(line.substr(eq + 1)));
    } catch (const std::logic_error&) {
      throw ConfigError("constants file: bad value for " + key);
    }
    if (key == "C") consts.C = value;
    else if (key == "c") consts.c = value;
    else if (key == "c5") consts.c5 = value;
    else if (key == "c6") consts.c6 = value;
    else if (key == "c7") consts.c7 = value;
    else if (key == "c8") consts.c8 = value;
    else if (key == "c9") consts.c9 = value;
    else if (key == "c10") consts.c10 = value;
    else throw ConfigError("constants file: unknown constant '" + key + "'");
  }
  consts.validate();
  return consts;
}

const AssumptionCheck& AssumptionReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw ConfigError("assumption " + name + " was not evaluated");
}

bool AssumptionReport::all_satisfied() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.satisfied; });
}

double c2_constant(double alpha, double kappa) {
  require_alpha(alpha);
  require_positive(kappa, "kappa");
  return 2.0 * std::max(8.0 / kappa, 8.0 / alpha * gamma_fn(2.0 / alpha) + kappa + 2.0);
}

double lr_bound_a5(double p, double n, double mu_norm, double delta, double alpha, double kappa,
                   double s1) {
  require_positive(p, "p");
  require_positive(n, "n");
  require_delta(delta);
  require_positive(s1, "s1");
  const double c2 = c2_constant(alpha, kappa);
  const double log_term = std::pow(std::log(n / delta), 1.0 / alpha);
  const double second = 1.0 / (c2 * (p + 2.0 * n * (mu_norm * mu_norm + std::sqrt(p) * log_term)));
  return std::min(8.0 / (s1 * s1), second);
}

AssumptionReport check_assumptions(double p, double n, double mu_norm, double delta, double alpha,
                                   double kappa, std::optional<double> beta, double s1,
                                   const BoundConstants& consts) {
  require_positive(p, "p");
  require_positive(n, "n");
  require_alpha(alpha);
  require_delta(delta);
  require_positive(kappa, "kappa");
  if (!(mu_norm >= 0.0)) throw DomainError("mu norm must be >= 0");
  if (beta) require_positive(*beta, "beta");
  consts.validate();

  AssumptionReport report;
  report.inputs = {p, n, mu_norm, delta, alpha, kappa, beta, s1};
  report.c2 = c2_constant(alpha, kappa);
  const double log_n_delta = std::log(n / delta);
  const double C = consts.C;

  auto add = [&](std::string name, std::string relation, double lhs, double rhs, bool ok) {
    report.checks.push_back({std::move(name), std::move(relation), lhs, rhs, ok});
  };
  add("A1", "<", delta, 1.0 / C, delta < 1.0 / C);
  const double a2 = C * std::log(1.0 / delta);
  add("A2", ">=", n, a2, n >= a2);
  const double a3 = C * std::max(mu_norm * mu_norm * n, n * n * std::pow(log_n_delta, 2.0 / alpha));
  add("A3", ">=", p, a3, p >= a3);
  const double a4 = C * std::pow(log_n_delta, 1.0 / alpha);
  add("A4", ">=", mu_norm, a4, mu_norm >= a4);
  if (s1 > 0.0) {
    report.lr_bound = lr_bound_a5(p, n, mu_norm, delta, alpha, kappa, s1);
    if (beta) add("A5", "<=", *beta, report.lr_bound, *beta <= report.lr_bound);
  }
  return report;
}

double singular_value_bound(double p, double n, const Vector& mu, double delta, double alpha,
                            const BoundConstants& consts) {
  return std::sqrt(p) * singular_value_bracket(p, n, mu, delta, alpha, consts);
}

double lr_bound_a6(double p, double n, const Vector& mu, double delta, double alpha, double kappa,
                   const BoundConstants& consts) {
  const double bracket = singular_value_bracket(p, n, mu, delta, alpha, consts);
  const double c2 = c2_constant(alpha, kappa);
  const double first = 8.0 / p / (bracket * bracket);
  const double log_term = std::pow(std::log(n / delta), 1.0 / alpha);
  const double second =
      1.0 / (c2 * p) / (1.0 + 2.0 * n / p * (mu.squaredNorm() + std::sqrt(p) * log_term));
  return std::min(first, second);
}

double lr_bound_cor7(double p, double c9) {
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
  require_positive(c9, "c9");
  return c9 / p;
}

double lr_bound_cor8(double p, double n, double alpha, double c10) {
  if (!(p >= 1.0)) throw DomainError("p must be >= 1");
  if (!(n >= 2.0)) throw DomainError("n must be >= 2 so that log n > 0");
  require_alpha(alpha);
  require_positive(c10, "c10");
  const double log_n = std::log(n);
  const double growth = std::exp((2.0 / alpha - 1.0) * log_n - std::log(log_n) / alpha);
  const double factor = 1.0 + growth;
  return c10 / p / (factor * factor);
}

double theorem1_bound(double eta, double mu_norm, double p, double alpha, double c) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  if (!(mu_norm >= 0.0)) throw DomainError("mu norm must be >= 0");
  require_positive(p, "p");
  require_alpha(alpha);
  require_positive(c, "c");
  return std::min(1.0, eta + decay_term(c, mu_norm, 2.0 * alpha, p, alpha / 2.0));
}

double rareweak_bound(double eta, double lambda, double s, double p, double alpha, double c) {
  if (!(lambda >= 0.0) || !(s >= 0.0)) throw DomainError("lambda and s must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  require_positive(p, "p");
  require_alpha(alpha);
  require_positive(c, "c");
  return std::min(1.0, eta + decay_term(c, lambda * lambda * s, alpha, p, alpha / 2.0));
}

double empirical_top_singular(const Matrix& z, double tol) {
  PowerIterationOptions options;
  options.tol = tol;
  return empirical_top_singular(z, options);
}

double empirical_top_singular(const Matrix& z, const PowerIterationOptions& options) {
  if (!(options.tol > 0.0)) throw ConfigError("power iteration tolerance must be positive");
  if (z.size() == 0 || z.isZero(0.0)) throw DataError("top singular value of a zero matrix");
  const Matrix gram = z.rows() < z.cols() ? Matrix(z * z.transpose()) : Matrix(z.transpose() * z);
  const auto m = gram.rows();
  Vector v = Vector::Ones(m) / std::sqrt(static_cast<double>(m));
  Vector w = gram * v;
  if (w.norm() <= 1e-14 * gram.diagonal().sum()) {
    // The all-ones start is (numerically) in the null space; start from the heaviest column.
    Eigen::Index j = 0;
    gram.diagonal().maxCoeff(&j);
    v = gram.col(j).normalized();
    w = gram * v;
  }
  double rayleigh = v.dot(w);
  const double stop = options.tol * 1e-2;
  for (long it = 1; it <= options.max_iterations; ++it) {
    v = w / w.norm();
    w.noalias() = gram * v;
    const double next = v.dot(w);
    if (std::abs(next - rayleigh) <= stop * std::abs(next)) return std::sqrt(next);
    rayleigh = next;
  }
  throw RuntimeFailure("power iteration did not converge within " +
                       std::to_string(options.max_iterations) + " iterations");
}

ConcentrationAudit concentration_audit(const Dataset& ds) {
  const Matrix z = z_matrix(ds);
  const auto n = z.cols();
  const double p = static_cast<double>(ds.dim());
  ConcentrationAudit audit;

  const Matrix gram = z.transpose() * z;
  audit.norm_ratio = {gram.diagonal().minCoeff() / p, gram.diagonal().maxCoeff() / p};
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) audit.max_cross = std::max(audit.max_cross, std::abs(gram(i, j)));
  }

  const Vector mu_dot = z.transpose() * ds.mu;
  auto extend = [](std::optional<Range>& r, double v) {
    if (!r) r = Range{v, v};
    r->min = std::min(r->min, v);
    r->max = std::max(r->max, v);
  };
  double kappa_sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    extend(ds.noise_mask[idx] ? audit.noisy_mu_dot : audit.clean_mu_dot, mu_dot(k));
    kappa_sum += (ds.points.col(k) - static_cast<double>(ds.clean_labels[idx]) * ds.mu).squaredNorm();
  }
  audit.noisy_fraction = static_cast<double>(ds.noisy_count()) / static_cast<double>(n);
  audit.empirical_kappa = kappa_sum / (p * static_cast<double>(n));
  audit.separable = is_linearly_separable(ds).separable;
  return audit;
}

}  // namespace heavybo
