#include <doctest.h>

#include <cmath>
#include <vector>

#include "heavybo/bounds.hpp"
#include "heavybo/datagen.hpp"
#include "heavybo/error.hpp"
#include "heavybo/rng.hpp"
#include "heavybo/trainer.hpp"
#include "oracles.hpp"

using namespace heavybo;

namespace {

Dataset make_dataset(Matrix points, std::vector<int> labels) {
  Dataset ds;
  ds.points = std::move(points);
  ds.clean_labels = labels;
  ds.noise_mask.assign(labels.size(), 0);
  ds.labels = std::move(labels);
  ds.mu = Vector::Zero(ds.points.rows());
  ds.config.p = ds.dim();
  ds.config.n = ds.size();
  return ds;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

/// Columns shifted along e_1 so that every z_k has first coordinate >= 1.
Matrix separable_z(Eigen::Index p, Eigen::Index n, Rng& rng) {
  Matrix z = random_matrix(p, n, rng);
  for (Eigen::Index k = 0; k < n; ++k) z(0, k) = 1.0 + std::abs(z(0, k));
  return z;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("logistic_loss examples") {
  Rng rng(1);
  const Matrix pts = random_matrix(4, 7, rng);
  const Dataset ds = make_dataset(pts, {1, -1, 1, 1, -1, -1, 1});
  CHECK(logistic_loss(Vector::Zero(4), ds) == doctest::Approx(7.0 * std::log(2.0)).epsilon(1e-14));

  const Matrix single = (Matrix(1, 1) << 20.0).finished();
  CHECK(logistic_loss_z(single, Vector::Ones(1)) == doctest::Approx(std::log1p(std::exp(-20.0))).epsilon(1e-12));
  CHECK(logistic_loss_z(single, Vector::Ones(1)) == doctest::Approx(2.06115e-9).epsilon(1e-5));

  const Matrix pair = (Matrix(1, 2) << 1.0, -1.0).finished();
  CHECK(logistic_loss_z(pair, Vector::Ones(1)) == doctest::Approx(1.62652).epsilon(1e-5));

  CHECK(softplus_neg(-800.0) == doctest::Approx(800.0));
  CHECK(softplus_neg(800.0) == 0.0);
  CHECK_THROWS_AS(logistic_loss(Vector::Zero(3), ds), ConfigError);
}

TEST_CASE("loss matches naive summation") {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix z = random_matrix(6, 9, rng);
    const Vector theta = random_matrix(6, 1, rng);
    CHECK(logistic_loss_z(z, theta) == doctest::Approx(oracle::naive_logistic_loss(z, theta)).epsilon(1e-12));
  }
}

TEST_CASE("gradient at zero is minus half the sum of z") {
  Rng rng(3);
  const Matrix pts = random_matrix(5, 6, rng);
  const Dataset ds = make_dataset(pts, {1, 1, -1, 1, -1, -1});
  const Vector expected = -0.5 * z_matrix(ds).rowwise().sum();
  CHECK((loss_gradient(Vector::Zero(5), ds) - expected).norm() <= 1e-14);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = static_cast<Eigen::Index>(2 + rng.next_u64() % 19);
    const auto n = static_cast<Eigen::Index>(1 + rng.next_u64() % 10);
    const Matrix z = random_matrix(p, n, rng);
    const Vector theta = 0.7 * random_matrix(p, 1, rng);
    const Vector analytic = loss_gradient_z(z, theta);
    const Vector numeric = oracle::finite_difference_gradient(
        [&](const Vector& t) { return logistic_loss_z(z, t); }, theta, 1e-5);
    const double rel = (analytic - numeric).lpNorm<Eigen::Infinity>() / analytic.lpNorm<Eigen::Infinity>();
    CAPTURE(rep);
    CHECK(rel <= 1e-5);
  }
}

TEST_CASE("saturated sample has a vanishing gradient") {
  const Matrix z = (Matrix(2, 1) << 3.0, 4.0).finished();
  const Vector theta = (Vector(2) << 30.0, 40.0).finished();
  CHECK(loss_gradient_z(z, theta).norm() <= 1e-6 * 5.0);
}

TEST_CASE("gd_train on a separable two-point instance") {
  const Matrix pts = (Matrix(2, 2) << 1.0, -1.0, 0.5, 0.2).finished();
  const Dataset ds = make_dataset(pts, {1, -1});
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 10000;
  const ModelState state = gd_train(ds, cfg);
  CHECK(state.epoch == 10000);
  CHECK(evaluate_error(state.theta, ds) == 0.0);
  CHECK(state.loss == doctest::Approx(logistic_loss(state.theta, ds)).epsilon(1e-14));
  CHECK(state.loss_monotone);

  const MarginSolution sol = hard_margin_oracle(ds, 1e-10);
  CHECK(cosine_similarity(state.theta, sol.w) >= 0.99);
}

TEST_CASE("loss is monotone under the smoothness step") {
  MixtureConfig mc;
  mc.p = 60;
  mc.n = 30;
  mc.shape = 1.0;
  mc.noise_rate = 0.1;
  mc.seed = 5;
  const Dataset ds = generate_dataset(mc);
  const double s1 = empirical_top_singular(z_matrix(ds), 1e-10);
  TrainConfig cfg;
  cfg.learning_rate = 0.99 * 8.0 / (s1 * s1);
  cfg.epochs = 3000;
  double previous = std::numeric_limits<double>::infinity();
  bool monotone = true;
  const ModelState state = gd_train(
      ds, cfg,
      [&](long, const Vector&, double loss, double) {
        monotone = monotone && loss <= previous;
        previous = loss;
      },
      10);
  CHECK(monotone);
  CHECK(state.loss_monotone);
  CHECK(state.first_loss_increase == -1);
}

TEST_CASE("oversized step is flagged") {
  const Matrix z = (Matrix(2, 2) << 10.0, -20.0, 1.0, 1.0).finished();
  TrainConfig cfg;
  cfg.learning_rate = 10.0;
  cfg.epochs = 50;
  bool flagged = false;
  try {
    flagged = !gd_train_z(z, cfg).loss_monotone;
  } catch (const DivergedError&) {
    flagged = true;
  }
  CHECK(flagged);
}

TEST_CASE("non-finite loss raises a diverged error") {
  const Matrix z = (Matrix(1, 1) << std::numeric_limits<double>::infinity()).finished();
  TrainConfig cfg;
  cfg.epochs = 3;
  try {
    gd_train_z(-z, cfg);
    FAIL("expected divergence");
  } catch (const DivergedError& e) {
    CHECK(e.epoch() >= 0);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.learning_rate = 1.0;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.epochs = 1;
  cfg.direction_tol = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("direction early stop") {
  const Matrix pts = (Matrix(2, 2) << 1.0, -1.0, 0.5, 0.2).finished();
  const Dataset ds = make_dataset(pts, {1, -1});
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 1000000;
  cfg.direction_tol = 1e-3;
  const ModelState state = gd_train(ds, cfg);
  CHECK(state.early_stopped);
  CHECK(state.epoch < 1000000);
  CHECK(state.epoch % TrainConfig::kDirectionWindow == 0);
}

TEST_CASE("hard-margin oracle examples") {
  const Dataset one = make_dataset((Matrix(2, 1) << 2.0, 0.0).finished(), {1});
  const MarginSolution s1 = hard_margin_oracle(one, 1e-10);
  CHECK(s1.w(0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::abs(s1.w(1)) <= 1e-12);
  CHECK(s1.w.norm() == doctest::Approx(0.5).epsilon(1e-9));

  const Dataset two = make_dataset((Matrix(2, 2) << 1.0, -1.0, 0.0, 0.0).finished(), {1, -1});
  const MarginSolution s2 = hard_margin_oracle(two, 1e-10);
  CHECK(s2.w(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(s2.w(1)) <= 1e-12);
  CHECK(s2.min_margin >= 1.0 - 1e-10);
  CHECK(s2.converged);
}

TEST_CASE("hard-margin oracle matches projected-gradient brute force") {
  Rng rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix z = separable_z(50, 10, rng);
    OracleOptions opts;
    opts.tol = 1e-10;
    const MarginSolution sol = hard_margin_oracle_z(z, opts);
    const double objective = 0.5 * sol.w.squaredNorm();
    const double brute = oracle::projected_gradient_margin_objective(z, 200000);
    CAPTURE(rep);
    CHECK(std::abs(objective - brute) <= 1e-4 * brute);
    CHECK((z.transpose() * sol.w).minCoeff() >= 1.0 - 1e-10);
  }
}

TEST_CASE("oracle solution lies in the span of the samples") {
  Rng rng(7);
  const Matrix z = separable_z(40, 15, rng);
  const MarginSolution sol = hard_margin_oracle_z(z, {});
  CHECK((sol.dual.array() >= 0.0).all());
  CHECK((z * sol.dual - sol.w).norm() <= 1e-8);
}

TEST_CASE("oracle rejects non-separable data") {
  const Dataset clash = make_dataset((Matrix(2, 2) << 1.0, 1.0, 2.0, 2.0).finished(), {1, -1});
  CHECK_THROWS_AS(hard_margin_oracle(clash, 1e-8), InfeasibleError);

  Rng rng(8);
  Matrix z = random_matrix(3, 40, rng);
  CHECK_THROWS_AS(hard_margin_oracle_z(z, {}), InfeasibleError);
}

TEST_CASE("evaluate_error examples") {
  MixtureConfig mc;
  mc.p = 20;
  mc.n = 50;
  mc.mean = MeanSpec::dense_power();
  mc.seed = 3;
  const MixtureModel model(mc);
  const Dataset ds = model.assemble(Matrix::Zero(20, 50), 4);
  CHECK(evaluate_error(model.mu(), ds) == 0.0);
  CHECK(evaluate_error(-model.mu(), ds) == 1.0);
  CHECK_THROWS_AS(evaluate_error(Vector::Zero(20), ds), DomainError);

  Vector orth = Vector::Zero(20);
  orth(19) = 1.0;
  CHECK(evaluate_error(orth, ds) == 1.0);

  MixtureConfig sym;
  sym.p = 10;
  sym.n = 100000;
  sym.mean = MeanSpec::explicit_vector(Vector::Zero(10));
  sym.seed = 12;
  const Dataset big = generate_dataset(sym);
  Rng rng(13);
  const Vector w = random_matrix(10, 1, rng);
  CHECK(std::abs(evaluate_error(w, big) - 0.5) <= 0.01);
}

TEST_CASE("error is invariant to positive scaling") {
  MixtureConfig mc;
  mc.p = 30;
  mc.n = 200;
  mc.noise_rate = 0.1;
  mc.seed = 44;
  const Dataset ds = generate_dataset(mc);
  Rng rng(45);
  const Vector w = random_matrix(30, 1, rng);
  for (double c : {1e-6, 0.3, 7.0, 1e8}) CHECK(evaluate_error(c * w, ds) == evaluate_error(w, ds));
}

TEST_CASE("separability examples") {
  const Dataset clash = make_dataset((Matrix(2, 2) << 1.0, 1.0, 2.0, 2.0).finished(), {1, -1});
  CHECK_FALSE(is_linearly_separable(clash).separable);

  const Dataset single = make_dataset((Matrix(3, 1) << 1.0, -2.0, 0.5).finished(), {-1});
  const Separability s = is_linearly_separable(single);
  CHECK(s.separable);
  REQUIRE(s.witness);
  CHECK(evaluate_error(*s.witness, single) == 0.0);

  // Sum of z fails here but a separator exists.
  const Dataset tricky = make_dataset((Matrix(2, 3) << 1.0, 1.0, -10.0, 0.0, 0.1, 1.0).finished(), {1, 1, 1});
  const Separability t = is_linearly_separable(tricky);
  CHECK(t.separable);
  REQUIRE(t.witness);
  CHECK(evaluate_error(*t.witness, tricky) == 0.0);
}

TEST_CASE("high-dimensional mixtures are separable") {
  int separable = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    MixtureConfig mc;
    mc.p = 2000;
    mc.n = 50;
    mc.shape = 2.0;
    mc.noise_rate = 0.05;
    mc.mean = MeanSpec::explicit_vector(Vector::Constant(2000, std::pow(2000.0, 0.3) / std::sqrt(2000.0)));
    mc.seed = seed;
    if (is_linearly_separable(generate_dataset(mc)).separable) ++separable;
  }
  CHECK(separable >= 95);
}

TEST_CASE("cosine similarity") {
  const Vector a = (Vector(2) << 1.0, 0.0).finished();
  const Vector b = (Vector(2) << 3.0, 3.0).finished();
  CHECK(cosine_similarity(a, b) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(cosine_similarity(a, -a) == doctest::Approx(-1.0));
}

}  // TEST_SUITE
