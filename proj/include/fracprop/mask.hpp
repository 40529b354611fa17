// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>

#include "fracprop/types.hpp"

namespace fracprop {

enum class MissingMode { Structural, Uniform };

// Binary observation mask, 1 = observed.
class Mask {
 public:
  using Bits = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  Mask() = default;
  Mask(Index rows, Index cols, bool observed = true)
      : bits_(Bits::Constant(rows, cols, observed ? 1 : 0)) {}
  explicit Mask(Bits bits);

  Index rows() const noexcept { return bits_.rows(); }
  Index cols() const noexcept { return bits_.cols(); }
  bool observed(Index i, Index l) const { return bits_(i, l) != 0; }
  void set(Index i, Index l, bool observed) { bits_(i, l) = observed ? 1 : 0; }

  const Bits& bits() const noexcept { return bits_; }
  // 0/1 mask as doubles, handy for elementwise products.
  Eigen::ArrayXXd as_real() const { return bits_.cast<double>(); }

  Index observed_count() const;
  Index masked_count() const { return rows() * cols() - observed_count(); }
  bool row_fully_observed(Index i) const;
  bool row_any_masked(Index i) const;

  bool operator==(const Mask& other) const;

 private:
  Bits bits_;
};

// Round-half-up of a non-negative product, as used for all mask counts.
Index round_half_up(double value);

// Masks exactly round(mr * n) whole rows, chosen uniformly without replacement.
Mask generate_structural_mask(Index n, Index num_features, double missing_rate,
                              std::uint64_t seed);

// Masks exactly round(mr * n * F) entries, chosen uniformly without replacement.
Mask generate_uniform_mask(Index n, Index num_features, double missing_rate,
                           std::uint64_t seed);

Mask generate_mask(MissingMode mode, Index n, Index num_features,
                   double missing_rate, std::uint64_t seed);

FeatureMatrix apply_mask(const FeatureMatrix& x, const Mask& mask);

// Binary layout, little-endian: "FPMK", uint32 n, uint32 F, then each row
// bit-packed into ceil(F / 8) bytes, channel l at bit (l % 8) of byte l / 8.
void write_mask(const std::filesystem::path& path, const Mask& mask);
Mask read_mask(const std::filesystem::path& path);

void write_mask_csv(const std::filesystem::path& path, const Mask& mask);

}  // namespace fracprop
