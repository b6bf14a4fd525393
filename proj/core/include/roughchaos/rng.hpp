#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace roughchaos {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace detail

/// Hash-chains a list of 64-bit words into a stream seed. Used to derive
/// independent substreams from (seed, experiment, n, replication, ...).
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x8c2f1e0d5b97a311ull;
  for (std::uint64_t w : words) {
    h = detail::mix64(h ^ (w + detail::kGolden + (h << 6) + (h >> 2)));
  }
  return h;
}

/// Counter-based random stream: the state is a strong mix of (seed, stream)
/// and advances by a fixed increment, so every (seed, stream) pair owns a
/// deterministic sequence independent of evaluation order. Normals come from
/// Box-Muller on the stream's own uniforms; no library distribution is used,
/// which keeps output bit-stable across platforms and schedules.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : state_(detail::mix64(detail::mix64(seed) ^
                             detail::mix64(stream * detail::kGolden + 1))) {}

  std::uint64_t next_u64() {
    state_ += detail::kGolden;
    return detail::mix64(state_);
  }

  /// Uniform on (0, 1].
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace roughchaos
