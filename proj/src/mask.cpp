// SPDX-License-Identifier: Apache-2.0
#include "fracprop/mask.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "fracprop/error.hpp"
#include "fracprop/rng.hpp"

namespace fracprop {

namespace {

constexpr std::array<char, 4> kMaskMagic{'F', 'P', 'M', 'K'};

void check_rate(double missing_rate) {
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) {
    throw ConfigError("missing rate must lie in [0, 1), got " +
                      std::to_string(missing_rate));
  }
}

// First `k` entries of a uniformly random permutation of 0..n-1.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n,
                                                      std::uint64_t k,
                                                      std::uint64_t seed) {
  std::vector<std::uint64_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::uint64_t{0});
  Rng rng(seed);
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + rng.below(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<unsigned char, 4> bytes{
      static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes.data()), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Mask::Mask(Bits bits) : bits_(std::move(bits)) {
  if ((bits_ > 1).any()) throw ConfigError("mask entries must be 0 or 1");
}

Index Mask::observed_count() const {
  return bits_.cast<Index>().sum();
}

bool Mask::row_fully_observed(Index i) const { return (bits_.row(i) != 0).all(); }

bool Mask::row_any_masked(Index i) const { return (bits_.row(i) == 0).any(); }

bool Mask::operator==(const Mask& other) const {
  return rows() == other.rows() && cols() == other.cols() &&
         (bits_ == other.bits_).all();
}

Index round_half_up(double value) {
  return static_cast<Index>(std::floor(value + 0.5));
}

Mask generate_structural_mask(Index n, Index num_features, double missing_rate,
                              std::uint64_t seed) {
  check_rate(missing_rate);
  if (n <= 0 || num_features <= 0) throw ConfigError("mask shape must be positive");
  const Index masked = round_half_up(missing_rate * static_cast<double>(n));
  if (masked >= n) {
    throw ConfigError("structural mask would hide every row (mr=" +
                      std::to_string(missing_rate) + ", n=" + std::to_string(n) + ")");
  }
  Mask mask(n, num_features, true);
  for (std::uint64_t row : sample_without_replacement(n, masked, seed)) {
    for (Index l = 0; l < num_features; ++l) mask.set(static_cast<Index>(row), l, false);
  }
  return mask;
}

Mask generate_uniform_mask(Index n, Index num_features, double missing_rate,
                           std::uint64_t seed) {
  check_rate(missing_rate);
  if (n <= 0 || num_features <= 0) throw ConfigError("mask shape must be positive");
  const Index total = n * num_features;
  const Index masked = round_half_up(missing_rate * static_cast<double>(total));
  if (masked >= total) {
    throw ConfigError("uniform mask would hide every entry (mr=" +
                      std::to_string(missing_rate) + ")");
  }
  Mask mask(n, num_features, true);
  for (std::uint64_t flat : sample_without_replacement(total, masked, seed)) {
    const auto i = static_cast<Index>(flat / num_features);
    const auto l = static_cast<Index>(flat % num_features);
    mask.set(i, l, false);
  }
  return mask;
}

Mask generate_mask(MissingMode mode, Index n, Index num_features,
                   double missing_rate, std::uint64_t seed) {
  return mode == MissingMode::Structural
             ? generate_structural_mask(n, num_features, missing_rate, seed)
             : generate_uniform_mask(n, num_features, missing_rate, seed);
}

FeatureMatrix apply_mask(const FeatureMatrix& x, const Mask& mask) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) {
    throw ShapeError("apply_mask: features are " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + " but mask is " +
                     std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
  }
  return (mask.bits() != 0).select(x.array(), 0.0).matrix();
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write mask " + path.string());
  out.write(kMaskMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(mask.rows()));
  put_u32(out, static_cast<std::uint32_t>(mask.cols()));
  const Index row_bytes = (mask.cols() + 7) / 8;
  std::vector<unsigned char> packed(static_cast<std::size_t>(row_bytes));
  for (Index i = 0; i < mask.rows(); ++i) {
    std::fill(packed.begin(), packed.end(), 0);
    for (Index l = 0; l < mask.cols(); ++l) {
      if (mask.observed(i, l)) packed[l / 8] |= static_cast<unsigned char>(1u << (l % 8));
    }
    out.write(reinterpret_cast<const char*>(packed.data()), row_bytes);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Mask read_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mask " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMaskMagic) throw IoError(path.string() + ": not a mask file");
  const Index n = get_u32(in);
  const Index f = get_u32(in);
  if (!in) throw IoError(path.string() + ": truncated header");
  const Index row_bytes = (f + 7) / 8;
  Mask mask(n, f, false);
  std::vector<unsigned char> packed(static_cast<std::size_t>(row_bytes));
  for (Index i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(packed.data()), row_bytes);
    if (!in) throw IoError(path.string() + ": truncated payload");
    for (Index l = 0; l < f; ++l) mask.set(i, l, (packed[l / 8] >> (l % 8)) & 1u);
  }
  return mask;
}

void write_mask_csv(const std::filesystem::path& path, const Mask& mask) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Index i = 0; i < mask.rows(); ++i) {
    for (Index l = 0; l < mask.cols(); ++l) {
      if (l) out << ',';
      out << (mask.observed(i, l) ? '1' : '0');
    }
    out << '\n';
  }
}

}  // namespace fracprop
