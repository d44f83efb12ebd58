#include "heavybo/distcore.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "heavybo/error.hpp"

namespace heavybo {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

double lanczos_gamma(double x) {
  // Valid for x >= 0.5.
  const double z = x - 1.0;
  double series = kLanczosCoeffs[0];
  for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) {
    series += kLanczosCoeffs[i] / (z + static_cast<double>(i));
  }
  const double t = z + kLanczosG + 0.5;
  // t^{z+1/2} is split in two halves so the product stays finite up to x = 171.
  const double half_power = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half_power * std::exp(-t) * half_power * series;
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0) || !(x <= kGammaMaxArg)) {
    throw DomainError("gamma_fn: argument " + std::to_string(x) + " outside (0, 171]");
  }
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
  }
  return lanczos_gamma(x);
}

void GenNormalParams::validate() const {
  if (!std::isfinite(location) || !(scale > 0.0) || !std::isfinite(scale) || !(shape > 0.0) ||
      !std::isfinite(shape)) {
    throw DomainError("generalized normal requires scale > 0 and shape > 0");
  }
}

double gennormal_pdf(double x, const GenNormalParams& params) {
  params.validate();
  const double norm = params.shape / (2.0 * params.scale * gamma_fn(1.0 / params.shape));
  const double r = std::abs(x - params.location) / params.scale;
  return norm * std::exp(-std::pow(r, params.shape));
}

double draw_gennormal(Rng& rng, const GenNormalParams& params) {
  const double g = rng.gamma(1.0 / params.shape);
  const double magnitude = params.scale * std::exp(std::log(g) / params.shape);
  return params.location + static_cast<double>(rng.sign()) * magnitude;
}

SampleBatch gennormal_sample(const GenNormalParams& params, std::size_t count, std::uint64_t seed) {
  params.validate();
  if (count == 0) throw DataError("gennormal_sample: empty batch requested");
  SampleBatch batch{std::vector<double>(count), seed, params};
  Rng rng(seed);
  for (double& v : batch.values) v = draw_gennormal(rng, params);
  return batch;
}

double gennormal_variance(const GenNormalParams& params) {
  params.validate();
  return params.scale * params.scale * gamma_fn(3.0 / params.shape) / gamma_fn(1.0 / params.shape);
}

double orlicz_norm_gennormal(double scale, double shape) {
  GenNormalParams{0.0, scale, shape}.validate();
  return scale / std::pow(1.0 - std::exp2(-shape), 1.0 / shape);
}

double unit_variance_scale(double shape) {
  GenNormalParams{0.0, 1.0, shape}.validate();
  return std::sqrt(gamma_fn(1.0 / shape) / gamma_fn(3.0 / shape));
}

double unit_orlicz_scale(double shape) {
  GenNormalParams{0.0, 1.0, shape}.validate();
  return std::pow(1.0 - std::exp2(-shape), 1.0 / shape);
}

}  // namespace heavybo
