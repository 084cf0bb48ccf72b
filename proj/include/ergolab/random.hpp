#pragma once

#include <complex>
#include <cstdint>
#include <numbers>

namespace ergolab {

// Counter-based generator: the i-th draw of stream s under seed k is
//
//   splitmix64_mix(k + (c + 1) * 0x9E3779B97F4A7C15),  c = (s << 32) | i
//
// which for s = 0 is exactly the SplitMix64 output sequence seeded with k.
// Test vectors (k = 0, s = 0): 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4,
// 0x06C45D188009454F.
inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
public:
  static constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

  constexpr CounterRng(std::uint64_t seed, std::uint32_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  [[nodiscard]] constexpr std::uint64_t bits(std::uint32_t index) const noexcept {
    const std::uint64_t counter = (static_cast<std::uint64_t>(stream_) << 32) | index;
    return splitmix64_mix(seed_ + (counter + 1) * golden_gamma);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  [[nodiscard]] constexpr double uniform(std::uint32_t index) const noexcept {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  // +1 or -1 from the top bit.
  [[nodiscard]] constexpr int sign(std::uint32_t index) const noexcept {
    return (bits(index) >> 63) != 0U ? -1 : 1;
  }

  // Point on the unit circle, angle 2*pi*uniform(index).
  [[nodiscard]] std::complex<double> unit(std::uint32_t index) const {
    return std::polar(1.0, 2.0 * std::numbers::pi * uniform(index));
  }

  // Integer in [0, bound) by multiply-shift; bound > 0.
  [[nodiscard]] std::uint64_t below(std::uint32_t index, std::uint64_t bound) const noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits(index)) * bound) >> 64);
  }

  [[nodiscard]] constexpr std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] constexpr std::uint32_t stream() const noexcept { return stream_; }

private:
  std::uint64_t seed_;
  std::uint32_t stream_;
};

} // namespace ergolab
