#ifndef ADP_RANDOM_HPP
#define ADP_RANDOM_HPP

#include <cstdint>

namespace adp {

/// Counter-based uniform generator. The n-th output is a pure function of
/// (seed, stream, n), so any (seed, stream) pair names a reproducible sample
/// sequence and workers can derive independent streams without coordination.
///
/// Core is the splitmix64 finalizer over a keyed counter; the key folds seed
/// and stream together so distinct streams land far apart on the +gamma orbit.
class RandomSource {
 public:
  static constexpr const char* kGeneratorId = "splitmix64-counter/v1";

  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
                   mix(stream + 0xD1B54A32D192ED03ULL))) {}

  /// Independent generator for a sub-stream of this source's stream.
  RandomSource split(std::uint64_t substream) const {
    RandomSource r(0, 0);
    r.state_ = mix(state_ ^ mix(substream + 0x8CB92BA72F3D8DD7ULL));
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform double in the open interval (0, 1); safe to feed into log().
  double next_unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    // 53-bit path keeps the draw deterministic and unbiased to ~2^-53.
    return static_cast<std::uint64_t>(
        static_cast<double>(next_u64() >> 11) * 0x1.0p-53 *
        static_cast<double>(n));
  }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace adp

#endif  // ADP_RANDOM_HPP
