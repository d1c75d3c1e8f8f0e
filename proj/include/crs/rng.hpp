#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace crs {

// Counter-based generator: the n-th draw is a pure function of (key, n), so
// streams keyed by (master seed, trial) reproduce under any thread schedule.
// The mixing function is the SplitMix64 finalizer.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Independent child stream, e.g. one per Monte-Carlo trial.
  CounterRng split(std::uint64_t stream) const noexcept {
    return CounterRng(mix(key_ ^ mix(stream + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept {
    return mix(key_ + 0x9e3779b97f4a7c15ULL * (++counter_));
  }

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double next_unit() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; both halves of the pair are consumed.
  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_unit()));
    const double phi = 2.0 * std::numbers::pi * next_unit();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  // CN(0, variance): (x + iy) * sqrt(variance / 2).
  std::complex<double> next_complex_gaussian(double variance) noexcept {
    const double s = std::sqrt(variance / 2.0);
    const double x = next_normal();
    const double y = next_normal();
    return {x * s, y * s};
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace crs
