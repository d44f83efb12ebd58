#include "heavybo/datagen.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "heavybo/distcore.hpp"
#include "heavybo/error.hpp"
#include "heavybo/rng.hpp"

namespace heavybo {

namespace {

constexpr std::uint64_t kMixingStream = 0x4d49584eULL;
constexpr std::uint64_t kTrainStream = 0x5452414eULL;

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

MeanSpec MeanSpec::parse(std::string_view text) {
  if (text == "dense" || text == "dense-power") return dense_power();
  if (text == "ones") return ones();
  constexpr std::string_view kRareWeak = "rareweak:";
  if (text.starts_with(kRareWeak)) {
    const auto body = text.substr(kRareWeak.size());
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) {
      throw ConfigError("rare-weak mean expects 'rareweak:s,lambda'");
    }
    const double s = parse_double(body.substr(0, comma), "s");
    const double lambda = parse_double(body.substr(comma + 1), "lambda");
    if (s < 0.0 || s != std::floor(s)) throw ConfigError("rare-weak s must be a natural number");
    if (!(lambda > 0.0)) throw ConfigError("rare-weak lambda must be positive");
    return rare_weak(static_cast<std::size_t>(s), lambda);
  }
  throw ConfigError("unknown mean spec '" + std::string(text) + "' (dense | ones | rareweak:s,lambda)");
}

std::string MeanSpec::to_string() const {
  switch (kind) {
    case Kind::kDensePower:
      return "dense";
    case Kind::kOnes:
      return "ones";
    case Kind::kRareWeak: {
      std::ostringstream os;
      os.precision(17);
      os << "rareweak:" << s << ',' << lambda;
      return os.str();
    }
    case Kind::kExplicit:
      return "explicit";
  }
  return "explicit";
}

std::size_t dense_power_count(std::size_t p) {
  const auto p2 = static_cast<unsigned long long>(p) * p;
  auto k = static_cast<unsigned long long>(std::cbrt(static_cast<double>(p2)));
  while (k * k * k > p2) --k;
  while ((k + 1) * (k + 1) * (k + 1) <= p2) ++k;
  return static_cast<std::size_t>(k);
}

Vector build_mean_vector(const MeanSpec& spec, std::size_t p) {
  if (p == 0) throw ConfigError("mean vector needs p >= 1");
  const auto dim = static_cast<Eigen::Index>(p);
  Vector mu = Vector::Zero(dim);
  switch (spec.kind) {
    case MeanSpec::Kind::kDensePower:
      mu.head(static_cast<Eigen::Index>(dense_power_count(p))).setOnes();
      break;
    case MeanSpec::Kind::kOnes:
      mu.setOnes();
      break;
    case MeanSpec::Kind::kRareWeak:
      if (spec.s > p) throw ConfigError("rare-weak mean: s exceeds p");
      if (!(spec.lambda > 0.0)) throw ConfigError("rare-weak mean: lambda must be positive");
      mu.head(static_cast<Eigen::Index>(spec.s)).setConstant(spec.lambda);
      break;
    case MeanSpec::Kind::kExplicit:
      if (spec.values.size() != dim) throw ConfigError("explicit mean vector has wrong length");
      mu = spec.values;
      break;
  }
  return mu;
}

Calibration parse_calibration(std::string_view text) {
  if (text == "variance" || text == "unit-variance") return Calibration::kUnitVariance;
  if (text == "orlicz" || text == "unit-orlicz") return Calibration::kUnitOrlicz;
  throw ConfigError("unknown calibration '" + std::string(text) + "' (variance | orlicz)");
}

Mixing parse_mixing(std::string_view text) {
  if (text == "identity") return Mixing::kIdentity;
  if (text == "haar") return Mixing::kHaar;
  throw ConfigError("unknown mixing '" + std::string(text) + "' (identity | haar)");
}

std::string_view to_string(Calibration c) {
  return c == Calibration::kUnitVariance ? "variance" : "orlicz";
}

std::string_view to_string(Mixing m) { return m == Mixing::kIdentity ? "identity" : "haar"; }

void MixtureConfig::validate() const {
  if (p < 1) throw ConfigError("p must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(shape > 0.0) || !std::isfinite(shape)) throw ConfigError("shape must be positive");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw ConfigError("noise rate must lie in [0, 1]");
}

double MixtureConfig::cluster_scale() const {
  return calibration == Calibration::kUnitVariance ? unit_variance_scale(shape)
                                                   : unit_orlicz_scale(shape);
}

std::size_t Dataset::noisy_count() const {
  std::size_t count = 0;
  for (auto m : noise_mask) count += m;
  return count;
}

OrthogonalMatrix random_orthogonal(std::size_t p, std::uint64_t seed) {
  if (p < 1) throw ConfigError("random_orthogonal: p must be >= 1");
  const auto dim = static_cast<Eigen::Index>(p);
  Matrix a(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    Rng rng(seed, static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < dim; ++i) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return {std::move(q)};
}

std::uint64_t training_sample_seed(std::uint64_t seed) { return derive_seed(seed, {kTrainStream}); }
std::uint64_t mixing_seed(std::uint64_t seed) { return derive_seed(seed, {kMixingStream}); }

MixtureModel::MixtureModel(MixtureConfig config) : config_(std::move(config)) {
  config_.validate();
  mu_ = build_mean_vector(config_.mean, config_.p);
  if (config_.mixing == Mixing::kHaar) {
    mixing_ = random_orthogonal(config_.p, mixing_seed(config_.seed));
  }
}

namespace {

struct LabelDraw {
  int clean;
  bool flipped;
};

// First two draws of every per-sample substream; the cluster noise follows.
LabelDraw draw_labels(Rng& rng, double noise_rate) {
  const int clean = rng.sign();
  const bool flipped = rng.uniform() < noise_rate;
  return {clean, flipped};
}

}  // namespace

Dataset MixtureModel::sample(std::size_t n, std::uint64_t sample_seed) const {
  if (n == 0) throw ConfigError("sample size must be >= 1");
  const auto p = static_cast<Eigen::Index>(config_.p);
  const GenNormalParams params{0.0, config_.cluster_scale(), config_.shape};
  Matrix q(p, static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(sample_seed, k);
    draw_labels(rng, config_.noise_rate);
    auto col = q.col(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < p; ++i) col(i) = draw_gennormal(rng, params);
  }
  return assemble(std::move(q), sample_seed);
}

Dataset MixtureModel::assemble(Matrix cluster_noise, std::uint64_t sample_seed) const {
  const auto p = static_cast<Eigen::Index>(config_.p);
  if (cluster_noise.rows() != p || cluster_noise.cols() < 1) {
    throw ConfigError("cluster noise must have p rows and at least one column");
  }
  const auto n = static_cast<std::size_t>(cluster_noise.cols());
  Dataset ds;
  ds.config = config_;
  ds.config.n = n;
  ds.mu = mu_;
  ds.labels.resize(n);
  ds.clean_labels.resize(n);
  ds.noise_mask.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(sample_seed, k);
    const auto draw = draw_labels(rng, config_.noise_rate);
    ds.clean_labels[k] = draw.clean;
    ds.labels[k] = draw.flipped ? -draw.clean : draw.clean;
    ds.noise_mask[k] = draw.flipped ? 1 : 0;
  }
  if (mixing_) {
    ds.points.noalias() = mixing_->entries * cluster_noise;
  } else {
    ds.points = std::move(cluster_noise);
  }
  for (std::size_t k = 0; k < n; ++k) {
    ds.points.col(static_cast<Eigen::Index>(k)) += static_cast<double>(ds.clean_labels[k]) * mu_;
  }
  return ds;
}

Dataset generate_dataset(const MixtureConfig& config) {
  return MixtureModel(config).sample(config.n, training_sample_seed(config.seed));
}

Matrix z_matrix(const Dataset& ds) {
  Matrix z = ds.points;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    if (ds.labels[k] < 0) z.col(static_cast<Eigen::Index>(k)) *= -1.0;
  }
  return z;
}

}  // namespace heavybo
