// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <vector>

#include "fracprop/error.hpp"
#include "fracprop/graph.hpp"
#include "fracprop/labels.hpp"
#include "fracprop/mask.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

// Normalized pseudo-label entropy of each node's closed neighborhood.
struct EntropyWeights {
  // S_i in [0, 1]; 0 when the whole neighborhood agrees.
  VectorXd entropy;
  // Confidence 1 - S_i.
  VectorXd weight;
};

// S_i = -(1 / log |N_i + i|) * sum_c P_i(c) log P_i(c), where P_i(c) is the
// share of label c in the closed neighborhood. Isolated nodes get S_i = 0.
EntropyWeights neighborhood_entropy(const Graph& g, const std::vector<int>& labels,
                                    int num_classes);
inline EntropyWeights neighborhood_entropy(const Graph& g, const PseudoLabelSet& labels) {
  return neighborhood_entropy(g, labels.labels, labels.num_classes);
}

// softmax(z / T), shifted by the maximum before exponentiation.
template <typename Derived>
Vector<typename Derived::Scalar> temperature_softmax(const Eigen::MatrixBase<Derived>& z,
                                                     typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  if (!(temperature > Scalar(0)) || !std::isfinite(static_cast<double>(temperature))) {
    throw ConfigError("temperature must be positive and finite");
  }
  Vector<Scalar> p = z.derived().reshaped() / temperature;
  const Scalar top = p.maxCoeff();
  p = p.unaryExpr([top](Scalar v) { using std::exp; return exp(v - top); });
  p /= p.sum();
  return p;
}

struct ClassAnchors {
  // C x F; rows of absent classes are zero.
  MatrixXd features;
  std::vector<bool> present;
  // Classes whose confidence weights summed to zero; unweighted mean used.
  std::vector<int> fallback_classes;
  std::vector<int> empty_classes;
};

// Confidence-weighted mean feature of every node carrying each pseudo-label.
ClassAnchors class_anchor(const FeatureMatrix& xt, const PseudoLabelSet& labels,
                          const EntropyWeights& weights);

// One class's star: the nodes with this pseudo-label and at least one masked
// entry, plus a virtual anchor node placed last.
struct ClassGraph {
  int class_id = 0;
  std::vector<Index> missing_nodes;
  VectorXd anchor;
  // Softmax probability of class_id at temperature T, per missing node.
  VectorXd self_weights;

  Index size() const noexcept { return static_cast<Index>(missing_nodes.size()) + 1; }
  // Dense propagation matrix: diagonal self weights, (1 - self weight) in the
  // anchor column, and 1 on the anchor's own diagonal.
  MatrixXd propagation_matrix() const;
  // Imputed rows of the missing nodes followed by the anchor row.
  MatrixXd feature_block(const FeatureMatrix& xt) const;
};

std::vector<ClassGraph> build_class_graphs(const FeatureMatrix& xt, const Mask& mask,
                                           const PseudoLabelSet& labels, double temperature,
                                           const ClassAnchors& anchors);

struct CapReport {
  ClassAnchors anchors;
  EntropyWeights entropy;
  // Per-node softmax probability of its own pseudo-label (all nodes).
  VectorXd confidence;
  Index refined_nodes = 0;
};

// One propagation step per class graph, then restoration of observed entries.
// Observed entries of the result are bit-identical to those of `xt`.
FeatureMatrix cap_refine(const Graph& g, const FeatureMatrix& xt, const Mask& mask,
                         const PseudoLabelSet& labels, double temperature,
                         const EntropyWeights& weights, CapReport* report = nullptr);

// Debug dumps: anchors as "class,f0,f1,..." and per-node "node,label,entropy,confidence".
void write_anchors_csv(const std::filesystem::path& path, const ClassAnchors& anchors);
void write_node_confidence_csv(const std::filesystem::path& path, const PseudoLabelSet& labels,
                               const CapReport& report);

}  // namespace fracprop
