#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hlpm {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
// each output block is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block generate(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// Random numbers addressed by (seed, particle, step). `negate` flips the sign
// of every normal, which mirrors a whole-line ensemble exactly.
class CounterRng {
 public:
  static constexpr std::uint64_t kInitStep = ~std::uint64_t{0};

  explicit CounterRng(std::uint64_t seed, bool negate = false) : seed_(seed), negate_(negate) {}

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] bool negated() const { return negate_; }

  [[nodiscard]] Philox4x32::Block block(std::uint64_t particle, std::uint64_t step) const {
    return Philox4x32::generate(
        {static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32),
         static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  }

  // uniform in the open interval (0, 1) from two 32-bit words
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 12;
    return (static_cast<double>(x) + 0.5) * 0x1.0p-52;
  }

  [[nodiscard]] double uniform(std::uint64_t particle, std::uint64_t step) const {
    const auto b = block(particle, step);
    return to_open_unit(b[0], b[1]);
  }

  // Box-Muller on the 128-bit block
  [[nodiscard]] double normal(std::uint64_t particle, std::uint64_t step) const {
    const auto b = block(particle, step);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return negate_ ? -z : z;
  }

 private:
  std::uint64_t seed_;
  bool negate_;
};

}  // namespace hlpm
