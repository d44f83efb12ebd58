#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "heavybo/datagen.hpp"
#include "heavybo/linalg.hpp"

namespace heavybo {

struct TrainConfig {
  double learning_rate = 1e-3;
  long epochs = 100000;
  /// Early stop once the normalized iterate moves less than this over
  /// kDirectionWindow epochs. 0 disables.
  double direction_tol = 0.0;

  static constexpr long kDirectionWindow = 1000;

  void validate() const;
};

struct ModelState {
  Vector theta;
  long epoch = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  /// False once any epoch increased the loss.
  bool loss_monotone = true;
  /// First epoch at which the loss went up, or -1.
  long first_loss_increase = -1;
  bool early_stopped = false;
};

/// Called with the current iterate (before the update of that epoch).
using TrainObserver = std::function<void(long epoch, const Vector& theta, double loss, double grad_norm)>;

/// Numerically stable log(1 + exp(-m)).
double softplus_neg(double margin);

/// sum_k log(1 + exp(-z_k . theta)) for the columns z_k of z.
double logistic_loss_z(const Matrix& z, const Vector& theta);
/// -sum_k z_k / (1 + exp(z_k . theta)).
Vector loss_gradient_z(const Matrix& z, const Vector& theta);

double logistic_loss(const Vector& theta, const Dataset& ds);
Vector loss_gradient(const Vector& theta, const Dataset& ds);

/// Full-batch gradient descent from theta = 0. The observer, if set, fires
/// every log_every epochs and at the final state.
ModelState gd_train(const Dataset& ds, const TrainConfig& cfg, const TrainObserver& observer = {},
                    long log_every = 0);
ModelState gd_train_z(const Matrix& z, const TrainConfig& cfg, const TrainObserver& observer = {},
                      long log_every = 0);

struct MarginSolution {
  Vector w;
  double min_margin = 0.0;
  Vector dual;
  long sweeps = 0;
  double kkt_violation = 0.0;
  bool converged = false;
};

struct OracleOptions {
  double tol = 1e-8;
  long max_sweeps = 100000;
};

/// Minimum-norm u with y_k u . x_k >= 1, by cyclic dual coordinate ascent on
/// max sum(a) - |Z a|^2 / 2, a >= 0. Throws InfeasibleError when no iterate
/// ever separates the data before the sweep budget runs out, or when the
/// margin upper bound |Z a| / sum(a) collapses below numerical resolution.
MarginSolution hard_margin_oracle(const Dataset& ds, double tol);
MarginSolution hard_margin_oracle_z(const Matrix& z, const OracleOptions& options);

/// Fraction of samples with sign(w . x_k) != y_k, counting sign(0) as wrong.
double evaluate_error(const Vector& w, const Dataset& ds);

struct Separability {
  bool separable = false;
  std::optional<Vector> witness;
};

/// Tries v = sum_k z_k first, then the hard-margin solver.
Separability is_linearly_separable(const Dataset& ds);

double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace heavybo
