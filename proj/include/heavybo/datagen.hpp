#pragma once

// Mixture data: clean labels, product generalized-normal cluster noise,
// orthogonal mixing, mean shift and independent label flips.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heavybo/linalg.hpp"

namespace heavybo {

struct MeanSpec {
  enum class Kind {
    kDensePower,  // first floor(p^{2/3}) coordinates are 1
    kOnes,        // every coordinate is 1
    kRareWeak,    // first s coordinates are lambda
    kExplicit,
  };

  Kind kind = Kind::kDensePower;
  std::size_t s = 0;
  double lambda = 0.0;
  Vector values;

  static MeanSpec dense_power() { return {}; }
  static MeanSpec ones() { return {Kind::kOnes, 0, 0.0, {}}; }
  static MeanSpec rare_weak(std::size_t s, double lambda) { return {Kind::kRareWeak, s, lambda, {}}; }
  static MeanSpec explicit_vector(Vector v) { return {Kind::kExplicit, 0, 0.0, std::move(v)}; }

  /// Accepts "dense", "ones" and "rareweak:s,lambda".
  static MeanSpec parse(std::string_view text);
  std::string to_string() const;
};

/// floor(p^{2/3}) computed in integers, so exact cubes are not lost to rounding.
std::size_t dense_power_count(std::size_t p);

Vector build_mean_vector(const MeanSpec& spec, std::size_t p);

enum class Calibration { kUnitVariance, kUnitOrlicz };
enum class Mixing { kIdentity, kHaar };

Calibration parse_calibration(std::string_view text);
Mixing parse_mixing(std::string_view text);
std::string_view to_string(Calibration c);
std::string_view to_string(Mixing m);

struct MixtureConfig {
  std::size_t p = 0;
  std::size_t n = 0;
  double shape = 2.0;
  Calibration calibration = Calibration::kUnitVariance;
  MeanSpec mean;
  double noise_rate = 0.0;
  Mixing mixing = Mixing::kIdentity;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  /// Per-coordinate scale implied by the calibration.
  double cluster_scale() const;
};

struct Dataset {
  Matrix points;                         // p x n, column k is x_k
  std::vector<int> labels;               // observed y_k in {-1, +1}
  std::vector<int> clean_labels;         // clean label before flipping
  std::vector<std::uint8_t> noise_mask;  // 1 iff labels[k] != clean_labels[k]
  Vector mu;
  MixtureConfig config;

  std::size_t dim() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  std::size_t noisy_count() const;
};

struct OrthogonalMatrix {
  Matrix entries;
};

/// Haar-distributed orthogonal matrix: QR of a standard normal matrix with
/// the signs of diag(R) folded into Q.
OrthogonalMatrix random_orthogonal(std::size_t p, std::uint64_t seed);

/// Fixed (mu, U) for one configuration. Train and test sets drawn from the
/// same model share the mean and the mixing matrix.
class MixtureModel {
 public:
  explicit MixtureModel(MixtureConfig config);

  const MixtureConfig& config() const { return config_; }
  const Vector& mu() const { return mu_; }
  /// Empty when mixing is the identity.
  const std::optional<OrthogonalMatrix>& mixing() const { return mixing_; }

  /// n samples; sample k is driven by the substream (sample_seed, k) only.
  Dataset sample(std::size_t n, std::uint64_t sample_seed) const;

  /// Builds a dataset from explicit cluster noise (p x n), drawing labels
  /// from sample_seed. Lets tests inject degenerate noise.
  Dataset assemble(Matrix cluster_noise, std::uint64_t sample_seed) const;

 private:
  MixtureConfig config_;
  Vector mu_;
  std::optional<OrthogonalMatrix> mixing_;
};

/// Seeds of the training sample stream and the mixing matrix derived from config.seed.
std::uint64_t training_sample_seed(std::uint64_t seed);
std::uint64_t mixing_seed(std::uint64_t seed);

/// MixtureModel(config).sample(config.n, training_sample_seed(config.seed)).
Dataset generate_dataset(const MixtureConfig& config);

/// Column k is y_k * x_k.
Matrix z_matrix(const Dataset& ds);

}  // namespace heavybo
