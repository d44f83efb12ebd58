#pragma once

// Generalized normal distribution: density, exact sampling, exponential
// Orlicz norm and the two per-coordinate calibrations used for cluster noise.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "heavybo/rng.hpp"

namespace heavybo {

/// Largest argument accepted by gamma_fn.
inline constexpr double kGammaMaxArg = 171.0;

/// Gamma function for 0 < x <= kGammaMaxArg (Lanczos, g = 7, with reflection below 1/2).
/// Throws DomainError outside that range.
double gamma_fn(double x);

struct GenNormalParams {
  double location = 0.0;
  double scale = 1.0;
  double shape = 2.0;

  /// Throws DomainError unless scale > 0 and shape > 0 (and all finite).
  void validate() const;
};

struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  GenNormalParams params;
};

/// Density gamma / (2 sigma Gamma(1/gamma)) * exp(-|(x - x0) / sigma|^gamma).
double gennormal_pdf(double x, const GenNormalParams& params);

/// One draw: x0 + sign * sigma * G^{1/gamma}, G ~ Gamma(1/gamma, 1).
double draw_gennormal(Rng& rng, const GenNormalParams& params);

/// count i.i.d. draws from a single stream keyed by seed. Throws DataError for count == 0.
SampleBatch gennormal_sample(const GenNormalParams& params, std::size_t count, std::uint64_t seed);

/// sigma^2 Gamma(3/gamma) / Gamma(1/gamma).
double gennormal_variance(const GenNormalParams& params);

/// Exponential Orlicz norm of a centred generalized normal with tail parameter equal to its shape.
double orlicz_norm_gennormal(double scale, double shape);

/// Scale giving unit variance for the given shape.
double unit_variance_scale(double shape);

/// Scale giving unit exponential Orlicz norm for the given shape.
double unit_orlicz_scale(double shape);

}  // namespace heavybo
