// SPDX-License-Identifier: Apache-2.0
#include "fracprop/synthetic.hpp"

#include "fracprop/error.hpp"
#include "fracprop/rng.hpp"

namespace fracprop {

void SbmConfig::validate() const {
  if (communities < 2) throw ConfigError("sbm: need at least two communities");
  if (nodes < communities) throw ConfigError("sbm: fewer nodes than communities");
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw ConfigError("sbm: edge probabilities must lie in [0, 1]");
  }
  if (feature_dim < communities) {
    throw ConfigError("sbm: feature_dim must be at least the number of communities");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("sbm: noise_std must be >= 0");
}

SyntheticDataset generate_sbm(const SbmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = Rng::stream(seed, Rng::kGraphStream);
  SyntheticDataset out;
  out.labels.resize(static_cast<std::size_t>(cfg.nodes));
  for (Index i = 0; i < cfg.nodes; ++i) {
    out.labels[i] = static_cast<int>(i * cfg.communities / cfg.nodes);
  }

  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < cfg.nodes; ++i) {
    for (Index j = i + 1; j < cfg.nodes; ++j) {
      const double p = out.labels[i] == out.labels[j] ? cfg.p_in : cfg.p_out;
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  out.graph = Graph::from_edges(cfg.nodes, edges);

  out.features.resize(cfg.nodes, cfg.feature_dim);
  for (Index i = 0; i < cfg.nodes; ++i) {
    for (Index l = 0; l < cfg.feature_dim; ++l) {
      const double mean = (l == out.labels[i]) ? cfg.mean_scale : 0.0;
      out.features(i, l) = mean + cfg.noise_std * rng.normal();
    }
  }
  return out;
}

}  // namespace fracprop
