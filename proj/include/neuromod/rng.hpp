#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace neuromod {

// splitmix64 finalizer. Used both as the xoshiro seeding routine and to
// derive independent stream seeds from (base seed, stream tag, index).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t index) {
  return mix64(mix64(mix64(base) ^ stream) ^ index);
}

// Stream tags for the independent PRNG streams of a run. Keeping them in one
// place guarantees two streams never collide for the same (seed, generation).
namespace stream {
inline constexpr std::uint64_t kInitParams = 0x01;
inline constexpr std::uint64_t kSamplePairs = 0x02;
inline constexpr std::uint64_t kEvaluationPlan = 0x03;
inline constexpr std::uint64_t kCentroidCurve = 0x04;
inline constexpr std::uint64_t kAnalysis = 0x05;
}  // namespace stream

// xoshiro256++ (Blackman & Vigna). Small, fast, and fully specified, so runs
// are exactly repeatable; seeded from a single 64-bit value via splitmix64.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = sm;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
    has_spare_ = false;
    spare_ = 0.0;
  }

  std::uint64_t next_u64() {
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

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  // Standard normal via Box-Muller; the paired value is cached. Uses only
  // next_u64 bits, so the sequence is reproducible bit for bit.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
  double spare_;
  bool has_spare_;
};

}  // namespace neuromod
