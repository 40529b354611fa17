// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fracprop {

// Seeded generator whose output is identical on every platform.
//
// std::mt19937_64 is fully specified by the standard; the distributions on top
// of it are not, so bounded integers, uniforms and normals are derived here.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/lemire-bounded/polar-normal/v1";

  // Fixed offsets for the streams derived from one run seed.
  static constexpr std::uint64_t kMaskStream = 0;
  static constexpr std::uint64_t kGraphStream = 1;
  static constexpr std::uint64_t kSamplingStream = 2;
  static constexpr std::uint64_t kLabelStream = 3;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t offset) {
    return Rng(seed + offset);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). Unbiased (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fracprop
