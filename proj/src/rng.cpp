#include "heavybo/rng.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

namespace heavybo {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t c : coords) {
    h = splitmix64(h ^ splitmix64(c + 0x3c6ef372fe94f82bULL));
  }
  return h;
}

std::uint64_t double_bits(double v) noexcept {
  if (v == 0.0) v = 0.0;  // fold -0.0
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t state = derive_seed(seed, {stream});
  for (auto& word : s_) {
    state += 0x9e3779b97f4a7c15ULL;
    word = splitmix64(state);
  }
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() noexcept {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

int Rng::sign() noexcept { return (next_u64() >> 63) ? 1 : -1; }

double Rng::normal() noexcept {
  // Box-Muller, one output per call.
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gamma(double shape) noexcept {
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^{1/a}, done in log space so tiny shapes do not underflow to 0 early.
    const double g = gamma(shape + 1.0);
    const double u = uniform_open();
    return std::exp(std::log(g) + std::log(u) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace heavybo
