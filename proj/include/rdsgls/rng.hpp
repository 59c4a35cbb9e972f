#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace rdsgls {

// Seeds the run when neither --seed nor RDSGLS_SEED is given.
inline constexpr std::uint64_t kDefaultSeed = 20170601;

/// Counter-based seed derivation: a splitmix64 finalizer applied to
/// (seed, stream). Stream 0 of seed s is not s itself, so derived streams
/// never alias the caller's raw seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Thin wrapper over mt19937_64. Every draw goes through uniform() or
/// below() so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(derive_seed(seed, stream)) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform double in (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Index i with probability proportional to cdf[i] - cdf[i-1]; cdf is a
  /// nondecreasing cumulative table whose last entry is the total mass.
  std::size_t from_cdf(std::span<const double> cdf);
  /// Marsaglia-Tsang gamma variate with the given shape and rate.
  double gamma(double shape, double rate);
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rdsgls
