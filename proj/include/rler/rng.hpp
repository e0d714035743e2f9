#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rler {

/// Tags separating the random streams used by different pipeline stages, so
/// that turning one stage on or off never shifts the draws of another.
enum class StreamTag : std::uint64_t {
  corpus = 1,
  batch,
  sample,
  judge,
  noise,
  select,
  allocate,
  eval,
  init,
  bridge,
};

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A deterministic random stream. Streams are derived from a run seed plus a
/// key path (tag, step, question id, source, ...), which makes every draw
/// independent of thread scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream keyed(std::uint64_t seed, StreamTag tag,
                         std::initializer_list<std::uint64_t> key = {}) {
    std::uint64_t h = mix64(seed ^ 0x5eed5eed5eed5eedULL);
    h = mix64(h ^ static_cast<std::uint64_t>(tag));
    for (std::uint64_t k : key) h = mix64(h ^ k);
    return RngStream(h);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace rler
