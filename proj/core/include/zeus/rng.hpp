#pragma once

#include <cstdint>
#include <string_view>

namespace zeus {

/// Counter-based generator: draw n is mix(key, n) with the SplitMix64
/// finalizer, so any stream position can be reproduced from (key, n) alone.
/// Normals come from Box-Muller on two consecutive uniforms, which keeps
/// output identical across standard-library implementations.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  /// Stream keyed by an experiment name, a seed and a purpose tag.
  static CounterRng for_stream(std::string_view experiment, std::uint64_t seed,
                               std::string_view purpose) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;

}  // namespace zeus
