#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace sdidml {

/// Portable random stream: std::mt19937_64 (fully specified by the standard)
/// with hand-written conversions, so a given seed yields the same draws on
/// every conforming platform. The std:: distributions are implementation
/// defined and are deliberately not used.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+polar";
  static constexpr std::string_view kVersion = "1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via the Marsaglia polar method; the second variate of
  /// each accepted pair is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates shuffle driven by below().
  template <class T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seed for the r-th derived stream of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) { return base + index; }

}  // namespace sdidml
