#include "heavybo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heavybo/error.hpp"

namespace heavybo {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(direction_tol >= 0.0)) throw ConfigError("direction tolerance must be >= 0");
}

double softplus_neg(double margin) {
  if (margin >= 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

namespace {

void check_dims(const Matrix& z, const Vector& theta) {
  if (z.rows() != theta.size()) {
    throw ConfigError("dimension mismatch: theta has " + std::to_string(theta.size()) +
                      " entries, data has " + std::to_string(z.rows()) + " features");
  }
}

double loss_from_margins(const Vector& margins) {
  double loss = 0.0;
  for (Eigen::Index k = 0; k < margins.size(); ++k) loss += softplus_neg(margins(k));
  return loss;
}

// Weights 1 / (1 + exp(m_k)); the gradient is -Z * weights.
void sigmoid_weights(const Vector& margins, Vector& weights) {
  for (Eigen::Index k = 0; k < margins.size(); ++k) weights(k) = 1.0 / (1.0 + std::exp(margins(k)));
}

}  // namespace

double logistic_loss_z(const Matrix& z, const Vector& theta) {
  check_dims(z, theta);
  const Vector margins = z.transpose() * theta;
  return loss_from_margins(margins);
}

Vector loss_gradient_z(const Matrix& z, const Vector& theta) {
  check_dims(z, theta);
  const Vector margins = z.transpose() * theta;
  Vector weights(margins.size());
  sigmoid_weights(margins, weights);
  return -(z * weights);
}

double logistic_loss(const Vector& theta, const Dataset& ds) {
  return logistic_loss_z(z_matrix(ds), theta);
}

Vector loss_gradient(const Vector& theta, const Dataset& ds) {
  return loss_gradient_z(z_matrix(ds), theta);
}

ModelState gd_train(const Dataset& ds, const TrainConfig& cfg, const TrainObserver& observer,
                    long log_every) {
  return gd_train_z(z_matrix(ds), cfg, observer, log_every);
}

ModelState gd_train_z(const Matrix& z, const TrainConfig& cfg, const TrainObserver& observer,
                      long log_every) {
  cfg.validate();
  const auto p = z.rows();
  const auto n = z.cols();
  ModelState state;
  state.theta = Vector::Zero(p);
  Vector margins = Vector::Zero(n);
  Vector weights(n);
  Vector grad(p);
  Vector anchor_direction;
  double previous_loss = std::numeric_limits<double>::infinity();

  auto evaluate = [&](long epoch) {
    margins.noalias() = z.transpose() * state.theta;
    state.loss = loss_from_margins(margins);
    if (!std::isfinite(state.loss)) {
      throw DivergedError("loss is not finite at epoch " + std::to_string(epoch), epoch);
    }
    sigmoid_weights(margins, weights);
    grad.noalias() = -(z * weights);
    state.grad_norm = grad.norm();
    if (state.loss > previous_loss && state.loss_monotone) {
      state.loss_monotone = false;
      state.first_loss_increase = epoch;
    }
    previous_loss = state.loss;
  };

  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    evaluate(epoch);
    if (observer && log_every > 0 && epoch % log_every == 0) {
      observer(epoch, state.theta, state.loss, state.grad_norm);
    }
    state.theta.noalias() -= cfg.learning_rate * grad;
    state.epoch = epoch + 1;

    if (cfg.direction_tol > 0.0 && state.epoch % TrainConfig::kDirectionWindow == 0) {
      const double norm = state.theta.norm();
      if (norm > 0.0) {
        Vector direction = state.theta / norm;
        if (anchor_direction.size() == direction.size() &&
            (direction - anchor_direction).norm() <= cfg.direction_tol) {
          state.early_stopped = true;
          break;
        }
        anchor_direction = std::move(direction);
      }
    }
  }
  evaluate(state.epoch);
  if (!state.theta.allFinite()) throw DivergedError("parameters are not finite", state.epoch);
  if (observer) observer(state.epoch, state.theta, state.loss, state.grad_norm);
  return state;
}

MarginSolution hard_margin_oracle(const Dataset& ds, double tol) {
  OracleOptions options;
  options.tol = tol;
  return hard_margin_oracle_z(z_matrix(ds), options);
}

MarginSolution hard_margin_oracle_z(const Matrix& z, const OracleOptions& options) {
  if (!(options.tol > 0.0)) throw ConfigError("oracle tolerance must be positive");
  const auto n = z.cols();
  if (n < 1) throw DataError("hard-margin oracle needs at least one sample");
  const Matrix gram = z.transpose() * z;
  const double max_sq_norm = gram.diagonal().maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(gram(i, i) > 0.0)) throw InfeasibleError("a zero sample cannot attain a positive margin");
  }
  // Geometric margins below this are indistinguishable from zero.
  const double margin_floor = 1e-10 * std::sqrt(max_sq_norm);

  Vector alpha = Vector::Zero(n);
  Vector gram_alpha = Vector::Zero(n);  // z_i . w for w = Z alpha
  bool separating_iterate_seen = false;
  MarginSolution sol;

  for (long sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double updated = std::max(0.0, alpha(i) + (1.0 - gram_alpha(i)) / gram(i, i));
      const double delta = updated - alpha(i);
      if (delta != 0.0) {
        alpha(i) = updated;
        gram_alpha += delta * gram.col(i);
      }
    }
    double violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double slack = 1.0 - gram_alpha(i);
      violation = std::max(violation, alpha(i) > 0.0 ? std::abs(slack) : std::max(0.0, slack));
    }
    sol.sweeps = sweep;
    sol.kkt_violation = violation;
    if (gram_alpha.minCoeff() > 0.0) separating_iterate_seen = true;
    if (violation <= options.tol) {
      sol.converged = true;
      break;
    }
    if (!separating_iterate_seen) {
      const double mass = alpha.sum();
      const double margin_upper = std::sqrt(std::max(0.0, alpha.dot(gram_alpha))) / mass;
      if (mass > 0.0 && margin_upper < margin_floor) {
        throw InfeasibleError("data are not linearly separable (margin bound collapsed to " +
                              std::to_string(margin_upper) + ")");
      }
    }
  }
  if (!separating_iterate_seen) {
    throw InfeasibleError("data are not linearly separable: no separating iterate within " +
                          std::to_string(options.max_sweeps) + " sweeps");
  }
  sol.w = z * alpha;
  sol.dual = std::move(alpha);
  sol.min_margin = (z.transpose() * sol.w).minCoeff();
  return sol;
}

double evaluate_error(const Vector& w, const Dataset& ds) {
  if (w.size() != static_cast<Eigen::Index>(ds.dim())) {
    throw ConfigError("classifier dimension does not match the data");
  }
  if (w.isZero(0.0)) throw DomainError("zero weight vector does not define a classifier");
  const Vector scores = ds.points.transpose() * w;
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    if (static_cast<double>(ds.labels[k]) * scores(static_cast<Eigen::Index>(k)) <= 0.0) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(ds.size());
}

Separability is_linearly_separable(const Dataset& ds) {
  const Matrix z = z_matrix(ds);
  Vector v = z.rowwise().sum();
  if ((z.transpose() * v).minCoeff() > 0.0) return {true, std::move(v)};
  try {
    OracleOptions options;
    options.tol = 1e-6;
    auto sol = hard_margin_oracle_z(z, options);
    if (sol.min_margin > 0.0) return {true, std::move(sol.w)};
    return {false, std::nullopt};
  } catch (const InfeasibleError&) {
    return {false, std::nullopt};
  }
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double denom = a.norm() * b.norm();
  if (!(denom > 0.0)) throw DomainError("cosine similarity of a zero vector");
  return a.dot(b) / denom;
}

}  // namespace heavybo
