#include "gazekit/rng.hpp"

#include <cmath>
#include <numbers>

namespace gazekit {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ tag) + index);
}

std::uint64_t Rng::next_u64() noexcept { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gazekit
