#pragma once

#include <cstdint>
#include <random>

namespace ltrlab {

/// Mixes a base seed with a stream id (splitmix64 finalizer) so that each
/// query, day or purpose gets an independent, scheduling-free generator.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// mt19937_64 plus hand-rolled draws. The standard distributions are
/// implementation-defined, which would break byte-identical logs across
/// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  bool coin() { return (engine_() >> 63) != 0; }
  /// Standard normal via Box-Muller; the second value of each pair is kept
  /// for the next call.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ltrlab
