// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "fracprop/graph.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

struct LabeledNode {
  Index node = 0;
  int label = 0;
  bool operator==(const LabeledNode&) const = default;
};

enum class ScoreKind {
  // Classifier logits, fed to the temperature softmax as-is.
  Logits,
  // Nonnegative propagation mass; log(mass + 1e-12) serves as the logit.
  Mass,
};

struct PseudoLabelSet {
  // Per-node class in [0, num_classes). Ground truth on labeled nodes.
  std::vector<int> labels;
  // N x C.
  MatrixXd scores;
  ScoreKind kind = ScoreKind::Logits;
  int num_classes = 0;
  std::vector<Index> labeled;

  Index size() const noexcept { return static_cast<Index>(labels.size()); }
  // Logits per node (N x C) regardless of score kind.
  MatrixXd logits() const;
};

inline constexpr double kMassLogEpsilon = 1e-12;

// Lowest class index among the maxima.
template <typename Derived>
int argmax_lowest(const Eigen::DenseBase<Derived>& row) {
  Index best = 0;
  for (Index c = 1; c < row.size(); ++c) {
    if (row(c) > row(best)) best = c;
  }
  return static_cast<int>(best);
}

// Score file: CSV, one node per row, one column per class.
PseudoLabelSet load_pseudo_labels(const std::filesystem::path& path,
                                  const std::vector<LabeledNode>& labeled,
                                  std::optional<Index> num_nodes = std::nullopt);

// Builds the label set from an in-memory score matrix (logits).
PseudoLabelSet pseudo_labels_from_scores(MatrixXd scores,
                                         const std::vector<LabeledNode>& labeled,
                                         ScoreKind kind = ScoreKind::Logits);

// Synchronous propagation s <- alpha * A_row s + (1 - alpha) * s(0), with the
// labeled rows clamped to their one-hot vectors after every step. A_row is
// the row-normalized symmetric adjacency.
PseudoLabelSet label_propagation(const Graph& g, const NormalizedAdjacency& adj,
                                 const std::vector<LabeledNode>& labeled,
                                 int num_classes, Index iterations = 50,
                                 double alpha = 0.9);

// Two-column CSV of (node, class). Duplicate nodes are rejected.
std::vector<LabeledNode> read_labeled_pairs(const std::filesystem::path& path);
void write_labeled_pairs(const std::filesystem::path& path,
                         const std::vector<LabeledNode>& pairs);

}  // namespace fracprop
