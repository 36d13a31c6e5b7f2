#ifndef APPTSCHED_RNG_HPP
#define APPTSCHED_RNG_HPP

#include <cstdint>

namespace apptsched {

/// Counter-based random stream. Output i of stream (seed, stream_id) is a
/// pure function of (seed, stream_id, i), so parallel trials can draw from
/// independently derived streams and reproduce regardless of scheduling.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(mix(mix(seed) ^ mix(stream_id * kGamma + 0x1f123bb5159a55e5ULL))) {}

  /// Independent stream derived from this one; derivation does not advance
  /// the parent counter.
  RandomStream derive(std::uint64_t idx) const {
    return RandomStream(key_, idx + 1);
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform index in [0, n). n must be nonzero.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection-free modulo is biased for huge n; fine here since n << 2^64,
    // but use 128-bit multiply-shift to keep the bias at 2^-64.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace apptsched

#endif
