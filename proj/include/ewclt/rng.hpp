#pragma once

// Reproducible random streams.
//
// The generator is xoshiro256** (Blackman & Vigna). A stream is identified by
// a 64-bit seed and a 64-bit stream id; its initial state is obtained by
// running SplitMix64 over a hash of both, so streams with different ids are
// statistically independent for all practical purposes and the output of
// every stream is identical on every platform with 64-bit unsigned
// arithmetic. Only the raw integer output and the derived uniform doubles are
// bit-stable; Poisson variates additionally depend on libm's exp().

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace ewclt {

inline std::uint64_t splitmix64(std::uint64_t &state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class RngStream {
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t mix = seed;
    const std::uint64_t seed_hash = splitmix64(mix);
    mix = stream_id ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t id_hash = splitmix64(mix);
    std::uint64_t sm = seed_hash ^ (id_hash * 0xA24BAED4963EE407ULL);
    for (auto &word : state_) {
      word = splitmix64(sm);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
      state_[0] = 1;
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_open_low() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // A child stream derived from this stream's identity, not its state.
  RngStream substream(std::uint64_t index) const {
    std::uint64_t mix = stream_id_ ^ (index * 0x9E3779B97F4A7C15ULL);
    return RngStream(seed_, splitmix64(mix) ^ index);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
};

// Poisson variate by sequential inversion. Means above 30 are split into
// chunks so exp(-lambda) never underflows and the search stays short.
inline std::uint64_t sample_poisson(double lambda, RngStream &rng) {
  if (!(lambda > 0.0)) {
    return 0;
  }
  constexpr double chunk = 30.0;
  std::uint64_t total = 0;
  while (lambda > 0.0) {
    const double part = lambda > chunk ? chunk : lambda;
    lambda -= part;
    double p = std::exp(-part);
    double cdf = p;
    const double u = rng.uniform();
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= part / static_cast<double>(k);
      const double next = cdf + p;
      if (next == cdf) {
        break;
      }
      cdf = next;
    }
    total += k;
  }
  return total;
}

// Index m in {1..n} with probability proportional to 1/m. Proposal m =
// floor((n+1)^U) has mass log(1+1/m)/log(n+1); accepting with probability
// log(2) / (m log(1+1/m)) yields the harmonic law with acceptance >= log 2.
inline std::uint64_t sample_harmonic_index(std::uint64_t n, RngStream &rng) {
  const double log_span = std::log(static_cast<double>(n) + 1.0);
  for (;;) {
    const double x = std::exp(rng.uniform() * log_span);
    auto m = static_cast<std::uint64_t>(x);
    if (m < 1) {
      m = 1;
    }
    if (m > n) {
      m = n;
    }
    const double md = static_cast<double>(m);
    const double accept = std::log(2.0) / (md * std::log1p(1.0 / md));
    if (rng.uniform() < accept) {
      return m;
    }
  }
}

} // namespace ewclt
