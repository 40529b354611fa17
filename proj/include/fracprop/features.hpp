// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "fracprop/types.hpp"

namespace fracprop {

// Headerless CSV, one node per row. Commas and/or whitespace separate values.
FeatureMatrix read_features_csv(const std::filesystem::path& path);
void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& x);

// 16-byte header ("FPFX", uint32 n, uint32 F, 4 zero bytes) followed by n*F
// little-endian float64 values in row-major order.
FeatureMatrix read_features_binary(const std::filesystem::path& path);
void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& x);

// Picks the binary reader when the file starts with the binary magic.
FeatureMatrix read_features(const std::filesystem::path& path);

// Numeric table with a fixed column count per row; used for scores and labels.
std::vector<std::vector<double>> read_numeric_table(const std::filesystem::path& path);

void require_finite(const FeatureMatrix& x, const char* what);

// Rows of `x` listed in `rows`, in that order.
FeatureMatrix select_rows(const FeatureMatrix& x, const std::vector<Index>& rows);

}  // namespace fracprop
