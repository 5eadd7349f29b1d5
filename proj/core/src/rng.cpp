#include "zeus/rng.hpp"

#include <cmath>
#include <numbers>

namespace zeus {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

CounterRng CounterRng::for_stream(std::string_view experiment, std::uint64_t seed,
                                  std::string_view purpose) noexcept {
  std::uint64_t k = splitmix64(fnv1a64(experiment));
  k = splitmix64(k ^ splitmix64(seed));
  k = splitmix64(k ^ fnv1a64(purpose));
  return CounterRng(k);
}

std::uint64_t CounterRng::next_u64() noexcept {
  // Weyl-sequence counter fed through the finalizer.
  return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * (counter_++));
}

double CounterRng::uniform() noexcept {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace zeus
