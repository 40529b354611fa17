// SPDX-License-Identifier: Apache-2.0
#include "fracprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fracprop/error.hpp"

namespace fracprop {

ReconstructionError reconstruction_error(const FeatureMatrix& xhat, const FeatureMatrix& xtrue,
                                         const Mask& mask) {
  if (xhat.rows() != xtrue.rows() || xhat.cols() != xtrue.cols() ||
      mask.rows() != xhat.rows() || mask.cols() != xhat.cols()) {
    throw ShapeError("reconstruction_error: shapes differ");
  }
  const auto masked = (mask.bits() == 0);
  ReconstructionError out;
  out.count = masked.cast<Index>().sum();
  if (out.count == 0) throw ConfigError("reconstruction_error: no masked entries");
  const Eigen::ArrayXXd diff = masked.select(xhat.array() - xtrue.array(), 0.0);
  out.rmse = std::sqrt(diff.square().sum() / static_cast<double>(out.count));
  out.mae = diff.abs().sum() / static_cast<double>(out.count);
  return out;
}

SimilarityReport class_similarity(const FeatureMatrix& x, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != x.rows()) {
    throw ShapeError("class_similarity: labels do not cover every row");
  }
  const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  SimilarityReport out;
  out.intra.assign(static_cast<std::size_t>(std::max(classes, 0)), std::nullopt);
  out.class_rows.assign(out.intra.size(), 0);

  MatrixXd sums = MatrixXd::Zero(std::max(classes, 0), x.cols());
  VectorXd self_dot = VectorXd::Zero(std::max(classes, 0));
  for (Index i = 0; i < x.rows(); ++i) {
    if (labels[i] < 0) continue;
    const double norm = x.row(i).norm();
    if (norm == 0.0) {
      ++out.zero_norm_rows;
      continue;
    }
    const Eigen::RowVectorXd unit = x.row(i) / norm;
    sums.row(labels[i]) += unit;
    self_dot[labels[i]] += unit.squaredNorm();
    ++out.class_rows[labels[i]];
  }

  Index populated = 0;
  double intra_total = 0.0;
  Index intra_defined = 0;
  for (int c = 0; c < classes; ++c) {
    const auto k = static_cast<double>(out.class_rows[c]);
    if (out.class_rows[c] > 0) ++populated;
    if (out.class_rows[c] < 2) {
      if (out.class_rows[c] > 0 || classes > 0) out.undefined_classes.push_back(c);
      continue;
    }
    const double pair_sum = 0.5 * (sums.row(c).squaredNorm() - self_dot[c]);
    out.intra[c] = pair_sum / (0.5 * k * (k - 1.0));
    intra_total += *out.intra[c];
    ++intra_defined;
  }
  if (populated < 2) throw ConfigError("class_similarity: need at least two classes with nonzero rows");
  if (intra_defined == 0) throw ConfigError("class_similarity: no class has two nonzero rows");

  double cross_sum = 0.0;
  double cross_pairs = 0.0;
  for (int a = 0; a < classes; ++a) {
    for (int b = a + 1; b < classes; ++b) {
      cross_sum += sums.row(a).dot(sums.row(b));
      cross_pairs += static_cast<double>(out.class_rows[a]) * static_cast<double>(out.class_rows[b]);
    }
  }
  out.inter = cross_sum / cross_pairs;
  out.average_intra = intra_total / static_cast<double>(intra_defined);
  if (out.inter == 0.0) {
    out.ratio_infinite = true;
    out.ratio = kInfinity;
  } else {
    out.ratio = out.average_intra / out.inter;
  }
  return out;
}

Index DistanceReport::total() const {
  Index sum = unreachable_count;
  for (const auto& b : buckets) sum += b.count;
  return sum;
}

DistanceReport distance_report(const std::vector<Index>& distance, const VectorXd& metric,
                               const std::vector<bool>& include) {
  if (static_cast<Index>(distance.size()) != metric.size() ||
      (!include.empty() && include.size() != distance.size())) {
    throw ShapeError("distance_report: inputs are not aligned");
  }
  std::map<Index, std::pair<Index, double>> acc;
  DistanceReport out;
  double unreachable_sum = 0.0;
  for (std::size_t i = 0; i < distance.size(); ++i) {
    if (!include.empty() && !include[i]) continue;
    if (distance[i] == kUnreachable) {
      ++out.unreachable_count;
      unreachable_sum += metric[static_cast<Index>(i)];
      continue;
    }
    auto& [count, sum] = acc[distance[i]];
    ++count;
    sum += metric[static_cast<Index>(i)];
  }
  for (const auto& [d, entry] : acc) {
    out.buckets.push_back({d, entry.first, entry.second / static_cast<double>(entry.first)});
  }
  if (out.unreachable_count > 0) {
    out.unreachable_mean = unreachable_sum / static_cast<double>(out.unreachable_count);
  }
  return out;
}

double dirichlet_energy(const Graph& g, const NormalizedAdjacency& adj, const FeatureMatrix& x) {
  if (x.rows() != g.num_nodes() || static_cast<Index>(adj.degrees.size()) != g.num_nodes()) {
    throw ShapeError("dirichlet_energy: shapes differ");
  }
  const VectorXd inv_sqrt =
      Eigen::Map<const VectorXd>(adj.degrees.data(), g.num_nodes()).array().rsqrt().matrix();
  const FeatureMatrix scaled = inv_sqrt.asDiagonal() * x;
  double energy = 0.0;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    for (Index j : g.neighbors(i)) {
      if (j > i) energy += (scaled.row(i) - scaled.row(j)).squaredNorm();
    }
  }
  return 0.5 * energy;
}

}  // namespace fracprop
