#pragma once

#include <cmath>
#include <cstdint>

namespace smom {

/// Splittable counter-based random stream.
///
/// A stream is identified by a 64-bit root seed plus a path of child labels.
/// Two streams built from the same (seed, path) replay the same sequence;
/// streams on disjoint paths produce unrelated sequences, so parallel workers
/// can each own a child without coordination. Draws do not mutate the stream
/// identity, only the draw counter.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ 0x5851F42D4C957F2Dull)) {}

  /// Derives the child stream for `label`, independent of draws made so far.
  [[nodiscard]] RngStream child(std::uint64_t label) const {
    return RngStream(mix(key_ ^ mix(label ^ 0xD1B54A32D192ED03ull)), raw_tag{});
  }

  std::uint64_t next_u64() {
    ctr_ += 1;
    return mix(key_ + ctr_ * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); safe to pass through log/tan.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Consumes two uniforms per call and keeps
  /// no spare, so replay only depends on the call sequence.
  double gaussian() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Exp(1) draw.
  double exponential() { return -std::log(uniform_open()); }

  /// Standard Cauchy draw, tan(pi (U - 1/2)).
  double cauchy() {
    return std::tan(3.1415926535897932384626433832795 * (uniform_open() - 0.5));
  }

 private:
  struct raw_tag {};
  RngStream(std::uint64_t key, raw_tag) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace smom
