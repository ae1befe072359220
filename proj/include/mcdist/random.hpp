#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

// Counter-split random streams. Every consumer derives its own generator from
// (seed, stream labels), so realizations can run in any order and on any
// number of threads while producing identical results.

namespace mcdist::rng {

// Finalizer from SplitMix64; bijective on 64-bit values.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}
  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256++ (Blackman & Vigna). Satisfies UniformRandomBitGenerator so it
// can drive the standard distributions.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& s : state_) s = sm.next();
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// Derives an independent stream for (seed, a, b, c). The chain of bijective
// mixes makes the derived key unique per label tuple.
inline Xoshiro256pp make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0x6d63646973743031ULL);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return Xoshiro256pp(h);
}

// Stream labels used by the library. Tests may use their own labels.
enum class Stream : std::uint64_t {
  kParticleSim = 1,
  kPoissonSeries = 2,
  kEstimator = 3,
};

inline Xoshiro256pp make_stream(std::uint64_t seed, Stream purpose, std::uint64_t a,
                                std::uint64_t b = 0) {
  return make_stream(seed, static_cast<std::uint64_t>(purpose), a, b);
}

// Standard normal draws via a 128-layer ziggurat (Marsaglia & Tsang).
// Inverse-free and fast: the common path is one 64-bit draw, one table lookup
// and one multiply.
class ZigguratNormal {
 public:
  ZigguratNormal() {
    const double f_r = std::exp(-0.5 * kR * kR);
    x_[0] = kV / f_r;  // base strip width, wider than R to carry the tail mass
    x_[1] = kR;
    x_[128] = 0.0;
    for (int i = 2; i < 128; ++i) {
      const double arg = kV / x_[i - 1] + std::exp(-0.5 * x_[i - 1] * x_[i - 1]);
      x_[i] = (arg < 1.0) ? std::sqrt(-2.0 * std::log(arg)) : 0.0;
    }
    for (int i = 0; i <= 128; ++i) f_[i] = std::exp(-0.5 * x_[i] * x_[i]);
    f_[128] = 1.0;
  }

  template <class Rng>
  double operator()(Rng& rng) const {
    for (;;) {
      const std::uint64_t bits = rng.next();
      const int i = static_cast<int>(bits & 127u);
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53 * 2.0 - 1.0;
      const double x = u * x_[i];
      if (std::abs(x) < x_[i + 1]) return x;
      if (i == 0) return tail(rng, x > 0.0);
      const double y = f_[i] + rng.uniform() * (f_[i + 1] - f_[i]);
      if (y < std::exp(-0.5 * x * x)) return x;
    }
  }

 private:
  template <class Rng>
  static double tail(Rng& rng, bool positive) {
    double xx, yy;
    do {
      xx = -std::log(1.0 - rng.uniform()) / kR;
      yy = -std::log(1.0 - rng.uniform());
    } while (yy + yy < xx * xx);
    return positive ? kR + xx : -(kR + xx);
  }

  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  double x_[129];
  double f_[129];
};

inline const ZigguratNormal& ziggurat() {
  static const ZigguratNormal z;
  return z;
}

template <class Rng>
inline long poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<long> dist(mean);
  return dist(rng);
}

}  // namespace mcdist::rng
