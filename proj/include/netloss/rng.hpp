#pragma once

// xoshiro256** seeded through splitmix64. The output stream is fully
// determined by the 64-bit seed on every platform; tests pin reference
// vectors.

#include <array>
#include <cstdint>

namespace netloss {

[[nodiscard]] std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;
  // Raw state constructor, used by the reference-vector tests.
  explicit Rng(const std::array<std::uint64_t, 4>& state) noexcept : s_(state) {}

  std::uint64_t next() noexcept;
  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) noexcept { return uniform() < p; }

  [[nodiscard]] const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }

 private:
  std::array<std::uint64_t, 4> s_;
};

// Seed of Monte Carlo path `path` under batch seed `base`.
[[nodiscard]] inline std::uint64_t path_seed(std::uint64_t base, std::uint64_t path) noexcept {
  return base ^ splitmix64_mix(path);
}

}  // namespace netloss
