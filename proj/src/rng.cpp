#include "rdsgls/rng.hpp"

#include <algorithm>
#include <cmath>

#include "rdsgls/error.hpp"

namespace rdsgls {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateNode: return "degenerate-node";
    case ErrorCode::kDegenerateBlock: return "degenerate-block";
    case ErrorCode::kInvalidParameters: return "invalid-parameters";
    case ErrorCode::kReversibilityViolation: return "reversibility-violation";
    case ErrorCode::kImpossibleTarget: return "impossible-target";
    case ErrorCode::kSamplingFailed: return "sampling-failed";
    case ErrorCode::kMissingLabel: return "missing-label";
    case ErrorCode::kSingular: return "singular";
    case ErrorCode::kFactorization: return "factorization";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kInsufficientDepth: return "insufficient-depth";
    case ErrorCode::kReducedSystemUnsupported: return "reduced-system-unsupported";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::size_t Rng::from_cdf(std::span<const double> cdf) {
  const double u = uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  // upper_bound never lands on a zero-mass entry.
  return static_cast<std::size_t>(it - cdf.begin());
}

double Rng::normal() {
  // Box-Muller; one of the pair is discarded to stay stateless.
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape, double rate) {
  if (shape < 1.0) {
    const double u = uniform_pos();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

}  // namespace rdsgls
