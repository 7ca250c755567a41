#ifndef LUNGLINE_RNG_HPP
#define LUNGLINE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace lungline {

// splitmix64 (Vigna, public domain reference implementation). Used for seed
// expansion and stream derivation. Matches the published test vector: seeded
// with 0 the first output is 0xE220A8397B1DCDAF.
inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** (Blackman/Vigna), seeded through splitmix64. This is the
// single PRNG behind every randomized decision in the toolkit (splits, batch
// shuffling, augmentation, weight init), so results reproduce across
// implementations from the algorithm name and the vectors in docs/rng.md.
class Rng {
public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  // Seed of the independent substream `stream` of `seed`; streams with
  // distinct ids are decorrelated through the splitmix64 mix of the pair.
  static uint64_t stream_seed(uint64_t seed, uint64_t stream) {
    uint64_t sm = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    return splitmix64_next(sm);
  }

  // Independent deterministic substream.
  static Rng for_stream(uint64_t seed, uint64_t stream) {
    return Rng(stream_seed(seed, stream));
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Unbiased integer in [0,n) by rejection (arc4random_uniform scheme).
  uint64_t bounded(uint64_t n) {
    if (n < 2) return 0;
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller; draws two uniforms per call and keeps no
  // cached spare, so the draw count per call is fixed.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Fisher-Yates with bounded(); the one shuffle used everywhere.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  static uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  uint64_t s_[4];
};

}  // namespace lungline

#endif  // LUNGLINE_RNG_HPP
