// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fracprop/fractional.hpp"
#include "fracprop/graph.hpp"
#include "fracprop/mask.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

struct FsdConfig {
  double gamma = 1.0;
  // Retention weight on the previous layer's converged values. Any lambda > 0
  // enters the fixed point: missing entries solve x = A x + lambda * x_prev.
  double lambda = 0.0;
  // Iterations per layer (upper bound; see convergence_tol).
  Index iterations = 100;
  // Cap on the hop radius. Unset: expand until the view stops growing.
  std::optional<Index> max_layers;
  // A layer stops early once max |x(t) - x(t-1)| drops below this.
  double convergence_tol = 1e-7;
  DegreeSource degrees = DegreeSource::Parent;
  // Worker threads for channel-parallel execution; 0 picks hardware concurrency.
  unsigned threads = 1;

  void validate() const;
};

// Working state of one channel on one layer view. Vectors are indexed by the
// view's local indices.
struct ChannelState {
  Index channel = 0;
  Index layer = 0;
  // Starting values; observed entries hold the input and never change.
  VectorXd values;
  // Converged values of the previous layer, zero for nodes new to this layer.
  VectorXd previous;
  Eigen::Array<bool, Eigen::Dynamic, 1> observed;
};

struct LayerResult {
  VectorXd values;
  // Largest iteration count over the view's components.
  Index iterations = 0;
  // Largest final update size over the view's components.
  double residual = 0.0;
  // Components without an observed node; their values are left as given.
  Index skipped_components = 0;
};

// Runs x(t) = x(0) . M + (A x(t-1) + lambda x_prev) . (1 - M) for up to
// cfg.iterations steps, independently on every component of the view that
// contains an observed node.
LayerResult layer_iterate(const SubgraphView& view, const FracOperator& op,
                          const ChannelState& state, const FsdConfig& cfg);

struct ChannelDiagnostics {
  Index channel = 0;
  // Layers processed (hop radii 0..layers-1).
  Index layers = 0;
  // Sum of iterations over all layers.
  Index iterations = 0;
  // Final update size of the last layer.
  double residual = 0.0;
  // Nodes with no path to an observed node; they stay 0.
  Index unreachable = 0;
  // Reachable nodes left outside the last view because of max_layers.
  Index uncovered = 0;
  bool no_observed = false;
};

struct FsdReport {
  std::vector<ChannelDiagnostics> channels;
  std::vector<Index> empty_channels;
  // Distinct observed sets; layer views and operators are built once per set.
  Index observed_set_groups = 0;
};

// Progressive subgraph diffusion of every channel.
//
// Observed entries of the result are bit-identical to `x`. Channels without a
// single observed entry come back as zeros and are listed in the report.
// Masked entries of `x` are never read.
FeatureMatrix fsd_impute(const Graph& g, const NormalizedAdjacency& adj,
                         const FeatureMatrix& x, const Mask& mask,
                         const FsdConfig& cfg, FsdReport* report = nullptr);

// One channel. `layer_trace`, when given, receives the full-length channel
// vector after each layer.
VectorXd fsd_impute_channel(const Graph& g, const NormalizedAdjacency& adj,
                            const Eigen::Ref<const VectorXd>& x,
                            const Eigen::Array<bool, Eigen::Dynamic, 1>& observed,
                            const FsdConfig& cfg,
                            ChannelDiagnostics* diagnostics = nullptr,
                            std::vector<VectorXd>* layer_trace = nullptr);

struct IterationStats {
  Index iterations = 0;
  double residual = 0.0;
};

// Whole-graph masked diffusion with the gamma = 1 operator and no retention.
FeatureMatrix fp_baseline(const Graph& g, const NormalizedAdjacency& adj,
                          const FeatureMatrix& x, const Mask& mask,
                          Index iterations = 100, double convergence_tol = 1e-7,
                          IterationStats* stats = nullptr);

}  // namespace fracprop
