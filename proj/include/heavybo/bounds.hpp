#pragma once

// Closed-form evaluation of the benign-overfitting assumptions, the
// generalization and learning-rate bounds, and empirical counterparts
// (top singular value of Z, concentration audit).

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heavybo/datagen.hpp"
#include "heavybo/linalg.hpp"

namespace heavybo {

/// Unnamed universal constants. Their true values are not known; every one
/// defaults to 1 so the evaluated bounds are structural.
struct BoundConstants {
  double C = 1.0;
  double c = 1.0;
  double c5 = 1.0;
  double c6 = 1.0;
  double c7 = 1.0;
  double c8 = 1.0;
  double c9 = 1.0;
  double c10 = 1.0;

  void validate() const;
  /// Reads "name = value" lines; unknown names are a ConfigError, '#' starts a comment.
  static BoundConstants from_file(const std::filesystem::path& path);
};

struct AssumptionCheck {
  std::string name;      // "A1" .. "A5"
  std::string relation;  // how lhs compares with rhs when satisfied
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
};

struct AssumptionInputs {
  double p = 0.0;
  double n = 0.0;
  double mu_norm = 0.0;
  double delta = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  std::optional<double> beta;
  double s1 = 0.0;
};

struct AssumptionReport {
  AssumptionInputs inputs;
  double c2 = 0.0;
  /// Right-hand side of the learning-rate assumption, reported even without beta.
  double lr_bound = 0.0;
  std::vector<AssumptionCheck> checks;

  /// Throws ConfigError if the name was not evaluated.
  const AssumptionCheck& get(const std::string& name) const;
  bool all_satisfied() const;
};

/// c2 = 2 max(8 / kappa, (8 / alpha) Gamma(2 / alpha) + kappa + 2).
double c2_constant(double alpha, double kappa);

/// Evaluates A1..A4, and A5 when beta is given. s1 is the top singular
/// value of Z (realized or bounded).
AssumptionReport check_assumptions(double p, double n, double mu_norm, double delta, double alpha,
                                   double kappa, std::optional<double> beta, double s1,
                                   const BoundConstants& consts);

/// min(8 s1^{-2}, (1/c2) (p + 2n(|mu|^2 + sqrt(p) log(n/delta)^{1/alpha}))^{-1}).
double lr_bound_a5(double p, double n, double mu_norm, double delta, double alpha, double kappa,
                   double s1);

/// High-probability upper bound on the top singular value of Z.
double singular_value_bound(double p, double n, const Vector& mu, double delta, double alpha,
                            const BoundConstants& consts);

/// Learning-rate condition with s1 replaced by singular_value_bound.
double lr_bound_a6(double p, double n, const Vector& mu, double delta, double alpha, double kappa,
                   const BoundConstants& consts);

/// c9 / p.
double lr_bound_cor7(double p, double c9);
/// c10 p^{-1} (1 + n^{2/alpha - 1} (log n)^{-1/alpha})^{-2}; needs n >= 2.
double lr_bound_cor8(double p, double n, double alpha, double c10);

/// min(1, eta + exp(-c |mu|^{2 alpha} / p^{alpha/2})).
double theorem1_bound(double eta, double mu_norm, double p, double alpha, double c);
/// min(1, eta + exp(-c (lambda^2 s)^alpha / p^{alpha/2})).
double rareweak_bound(double eta, double lambda, double s, double p, double alpha, double c);

struct PowerIterationOptions {
  double tol = 1e-10;
  long max_iterations = 10000;
};

/// Largest singular value by power iteration on the smaller Gram matrix,
/// started from the normalized all-ones vector. Throws DataError for a zero
/// matrix and RuntimeFailure if the Rayleigh quotient has not settled to
/// tol * 1e-2 relative change within max_iterations.
double empirical_top_singular(const Matrix& z, double tol);
double empirical_top_singular(const Matrix& z, const PowerIterationOptions& options);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

struct ConcentrationAudit {
  Range norm_ratio;  // |z_k|^2 / p
  double max_cross = 0.0;  // max over i != j of |z_i . z_j|
  std::optional<Range> clean_mu_dot;  // mu . z_k over clean samples
  std::optional<Range> noisy_mu_dot;  // mu . z_k over flipped samples
  double noisy_fraction = 0.0;
  bool separable = false;
  /// Mean of |x_k - clean_k mu|^2 / p, the realized kappa.
  double empirical_kappa = 0.0;
};

ConcentrationAudit concentration_audit(const Dataset& ds);

}  // namespace heavybo
