#include "skipstop/rng.hpp"

#include <cmath>
#include <numbers>

#include "skipstop/error.hpp"

namespace skipstop {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Data: return "data";
    case ErrorKind::NormalizationUndefined: return "normalization-undefined";
    case ErrorKind::InputMissing: return "input-missing";
    case ErrorKind::Constraint: return "constraint-violation";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

std::uint64_t Rng::splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, ErrorKind::Internal, "Rng::below called with n = 0");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double mean) {
  require(mean >= 0.0 && std::isfinite(mean), ErrorKind::Data,
          "Poisson mean must be finite and nonnegative");
  constexpr double kChunk = 16.0;
  std::uint64_t total = 0;
  double left = mean;
  while (left > 0.0) {
    const double m = left > kChunk ? kChunk : left;
    left -= m;
    const double limit = std::exp(-m);
    double prod = uniform();
    while (prod > limit) {
      ++total;
      prod *= uniform();
    }
  }
  return total;
}

}  // namespace skipstop
