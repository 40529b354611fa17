// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "fracprop/graph.hpp"
#include "fracprop/mask.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

struct ReconstructionError {
  double rmse = 0.0;
  double mae = 0.0;
  Index count = 0;
};

// Errors over masked entries only (mask == 0).
ReconstructionError reconstruction_error(const FeatureMatrix& xhat, const FeatureMatrix& xtrue,
                                         const Mask& mask);

inline constexpr std::string_view kSimilarityMethod = "mean-of-pairwise-cosine";

struct SimilarityReport {
  // Mean cosine over same-class pairs; unset for classes with < 2 usable rows.
  std::vector<std::optional<double>> intra;
  std::vector<Index> class_rows;
  double inter = 0.0;
  double average_intra = 0.0;
  // average_intra / inter; infinite when inter == 0.
  double ratio = 0.0;
  bool ratio_infinite = false;
  std::vector<int> undefined_classes;
  // Rows with zero norm, left out of every statistic.
  Index zero_norm_rows = 0;
};

// Every same-class and cross-class pair is averaged exactly, using per-class
// sums of unit rows. Nodes with a negative label are ignored.
SimilarityReport class_similarity(const FeatureMatrix& x, const std::vector<int>& labels);

struct DistanceBucket {
  Index distance = 0;
  Index count = 0;
  double mean = 0.0;
};

struct DistanceReport {
  std::vector<DistanceBucket> buckets;
  Index unreachable_count = 0;
  double unreachable_mean = 0.0;
  Index total() const;
};

// Groups the included nodes by hop distance. `include` may be empty, meaning
// every node.
DistanceReport distance_report(const std::vector<Index>& distance, const VectorXd& metric,
                               const std::vector<bool>& include = {});

inline constexpr std::string_view kDirichletFormula =
    "0.5 * sum over undirected edges (i,j) of ||x_i/sqrt(d_i) - x_j/sqrt(d_j)||^2";

double dirichlet_energy(const Graph& g, const NormalizedAdjacency& adj, const FeatureMatrix& x);

}  // namespace fracprop
