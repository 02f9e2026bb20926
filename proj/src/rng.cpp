#include "cblab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cblab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t RngStream::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double RngStream::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::exponential(double mean) {
  return -mean * std::log1p(-uniform01());
}

double RngStream::normal() {
  double u1 = uniform01();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RngStream::gamma(double shape, double scale) {
  if (shape < 0.0) throw std::invalid_argument("gamma: negative shape");
  if (shape == 0.0) return 0.0;
  // Marsaglia-Tsang squeeze; shape < 1 boosted through G(a) = G(a+1) U^{1/a}.
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    double u = uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    boost = std::pow(u, 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return boost * d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return boost * d * v * scale;
    }
  }
}

long long RngStream::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Knuth product-of-uniforms inversion.
    const double limit = std::exp(-mean);
    double prod = 1.0;
    long long n = -1;
    do {
      prod *= uniform01();
      ++n;
    } while (prod > limit);
    return n;
  }
  // Hormann's PTRS transformed rejection (exact for mean >= 10).
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = uniform01() - 0.5;
    const double v = uniform01();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - std::lgamma(k + 1.0)) {
      return static_cast<long long>(kf);
    }
  }
}

long long RngStream::binomial(long long n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binomial: bad arguments");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  // Count over the rarer outcome with geometric skips between hits;
  // expected cost O(n * min(p, 1-p)).
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  const double log1mq = std::log1p(-q);
  long long hits = 0;
  long long i = 0;
  for (;;) {
    double u = uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    i += static_cast<long long>(std::floor(std::log(u) / log1mq)) + 1;
    if (i > n) break;
    ++hits;
  }
  return flip ? n - hits : hits;
}

long long RngStream::negative_binomial(double successes, double p) {
  if (successes < 0.0 || p <= 0.0 || p > 1.0) {
    throw std::invalid_argument("negative_binomial: bad arguments");
  }
  if (successes == 0.0 || p == 1.0) return 0;
  // NB(r, p) is Poisson with Gamma(r, (1-p)/p) mean.
  return poisson(gamma(successes, (1.0 - p) / p));
}

}  // namespace cblab
