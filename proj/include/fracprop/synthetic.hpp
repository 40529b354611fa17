// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "fracprop/graph.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

// Stochastic block model with planted class means.
struct SbmConfig {
  int communities = 5;
  Index nodes = 400;
  double p_in = 0.05;
  double p_out = 0.005;
  Index feature_dim = 16;
  // Class c has mean mean_scale * e_c.
  double mean_scale = 1.0;
  double noise_std = 0.3;

  void validate() const;
};

struct SyntheticDataset {
  Graph graph;
  FeatureMatrix features;
  // Community of every node; node i belongs to floor(i * C / n).
  std::vector<int> labels;
};

// Edges and features both come from Rng::stream(seed, Rng::kGraphStream).
SyntheticDataset generate_sbm(const SbmConfig& cfg, std::uint64_t seed);

}  // namespace fracprop
