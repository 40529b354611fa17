// SPDX-License-Identifier: Apache-2.0
#include "fracprop/features.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "fracprop/error.hpp"

namespace fracprop {

namespace {

constexpr std::array<char, 4> kFeatureMagic{'F', 'P', 'F', 'X'};

static_assert(std::endian::native == std::endian::little,
              "binary feature I/O assumes a little-endian host");

std::vector<double> parse_row(const std::string& line, const std::string& source,
                              std::size_t line_no) {
  std::vector<double> row;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ',' || *p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{}) {
      throw ParseError(source, line_no, "not a number near '" +
                                            std::string(p, std::min<std::size_t>(16, end - p)) + "'");
    }
    row.push_back(v);
    p = next;
    if (p < end && *p != ',' && *p != ' ' && *p != '\t' && *p != '\r') {
      throw ParseError(source, line_no, "unexpected character '" + std::string(1, *p) + "'");
    }
  }
  return row;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto row = parse_row(line, path.string(), line_no);
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(rows.front().size()) +
                           " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

FeatureMatrix read_features_csv(const std::filesystem::path& path) {
  const auto rows = read_numeric_table(path);
  if (rows.empty()) throw IoError(path.string() + ": no feature rows");
  FeatureMatrix x(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index l = 0; l < x.cols(); ++l) x(i, l) = rows[i][l];
  }
  return x;
}

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& x) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::array<char, 32> buf{};
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index l = 0; l < x.cols(); ++l) {
      if (l) out << ',';
      auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x(i, l));
      out.write(buf.data(), end - buf.data());
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureMatrix read_features_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 16> header{};
  in.read(header.data(), header.size());
  if (!in || std::memcmp(header.data(), kFeatureMagic.data(), 4) != 0) {
    throw IoError(path.string() + ": not a binary feature file");
  }
  std::uint32_t n = 0;
  std::uint32_t f = 0;
  std::memcpy(&n, header.data() + 4, 4);
  std::memcpy(&f, header.data() + 8, 4);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(n, f);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(sizeof(double) * rows.size()));
  if (!in) throw IoError(path.string() + ": truncated payload");
  return rows;
}

void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::array<char, 16> header{};
  std::memcpy(header.data(), kFeatureMagic.data(), 4);
  const auto n = static_cast<std::uint32_t>(x.rows());
  const auto f = static_cast<std::uint32_t>(x.cols());
  std::memcpy(header.data() + 4, &n, 4);
  std::memcpy(header.data() + 8, &f, 4);
  out.write(header.data(), header.size());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = x;
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(sizeof(double) * rows.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  probe.read(magic.data(), 4);
  if (probe && magic == kFeatureMagic) return read_features_binary(path);
  return read_features_csv(path);
}

void require_finite(const FeatureMatrix& x, const char* what) {
  if (!x.allFinite()) throw NumericError(std::string(what) + " contains NaN or infinite values");
}

FeatureMatrix select_rows(const FeatureMatrix& x, const std::vector<Index>& rows) {
  FeatureMatrix out(static_cast<Index>(rows.size()), x.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = x.row(rows[i]);
  return out;
}

}  // namespace fracprop
