// SPDX-License-Identifier: Apache-2.0
#include "fracprop/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "fracprop/error.hpp"
#include "fracprop/features.hpp"
#include "fracprop/fractional.hpp"

namespace fracprop {

namespace {

void check_labeled(const std::vector<LabeledNode>& labeled, Index n, int num_classes) {
  std::set<Index> seen;
  for (const auto& [node, label] : labeled) {
    if (node < 0 || node >= n) {
      throw ConfigError("labeled node " + std::to_string(node) + " out of range");
    }
    if (label < 0 || label >= num_classes) {
      throw ConfigError("class index " + std::to_string(label) + " out of range for " +
                        std::to_string(num_classes) + " classes");
    }
    if (!seen.insert(node).second) {
      throw ConfigError("node " + std::to_string(node) + " labeled twice");
    }
  }
}

}  // namespace

MatrixXd PseudoLabelSet::logits() const {
  if (kind == ScoreKind::Logits) return scores;
  return (scores.array() + kMassLogEpsilon).log().matrix();
}

PseudoLabelSet pseudo_labels_from_scores(MatrixXd scores,
                                         const std::vector<LabeledNode>& labeled,
                                         ScoreKind kind) {
  if (scores.cols() < 1) throw ConfigError("score matrix has no class columns");
  if (!scores.allFinite()) throw NumericError("score matrix contains non-finite values");
  const Index n = scores.rows();
  const int num_classes = static_cast<int>(scores.cols());
  check_labeled(labeled, n, num_classes);

  PseudoLabelSet set;
  set.num_classes = num_classes;
  set.kind = kind;
  set.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) set.labels[i] = argmax_lowest(scores.row(i));
  for (const auto& [node, label] : labeled) {
    set.labels[node] = label;
    set.labeled.push_back(node);
  }
  std::sort(set.labeled.begin(), set.labeled.end());
  set.scores = std::move(scores);
  return set;
}

PseudoLabelSet load_pseudo_labels(const std::filesystem::path& path,
                                  const std::vector<LabeledNode>& labeled,
                                  std::optional<Index> num_nodes) {
  const auto rows = read_numeric_table(path);
  if (rows.empty()) throw IoError(path.string() + ": no score rows");
  if (num_nodes && static_cast<Index>(rows.size()) != *num_nodes) {
    throw ShapeError(path.string() + ": " + std::to_string(rows.size()) + " score rows for " +
                     std::to_string(*num_nodes) + " nodes");
  }
  MatrixXd scores(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < scores.rows(); ++i) {
    for (Index c = 0; c < scores.cols(); ++c) scores(i, c) = rows[i][c];
  }
  return pseudo_labels_from_scores(std::move(scores), labeled, ScoreKind::Logits);
}

PseudoLabelSet label_propagation(const Graph& g, const NormalizedAdjacency& adj,
                                 const std::vector<LabeledNode>& labeled,
                                 int num_classes, Index iterations, double alpha) {
  if (num_classes < 2) throw ConfigError("label propagation needs at least 2 classes");
  if (labeled.empty()) throw ConfigError("label propagation needs labeled nodes");
  if (iterations < 1) throw ConfigError("label propagation needs iterations >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const Index n = g.num_nodes();
  check_labeled(labeled, n, num_classes);

  const FracOperator walk = build_fractional(SubgraphView::full(g), adj, 1.0);
  MatrixXd seed = MatrixXd::Zero(n, num_classes);
  for (const auto& [node, label] : labeled) seed(node, label) = 1.0;

  MatrixXd s = seed;
  MatrixXd next(n, num_classes);
  for (Index t = 0; t < iterations; ++t) {
    next.noalias() = alpha * (walk.weights() * s);
    next += (1.0 - alpha) * seed;
    for (const auto& lab : labeled) next.row(lab.node) = seed.row(lab.node);
    s.swap(next);
  }
  return pseudo_labels_from_scores(std::move(s), labeled, ScoreKind::Mass);
}

std::vector<LabeledNode> read_labeled_pairs(const std::filesystem::path& path) {
  const auto rows = read_numeric_table(path);
  std::vector<LabeledNode> out;
  out.reserve(rows.size());
  std::set<Index> seen;
  for (const auto& row : rows) {
    if (row.size() != 2) throw IoError(path.string() + ": expected two columns (node, class)");
    const double node = row[0];
    const double label = row[1];
    if (node != std::floor(node) || label != std::floor(label) || node < 0 || label < 0) {
      throw ConfigError(path.string() + ": node and class must be non-negative integers");
    }
    if (!seen.insert(static_cast<Index>(node)).second) {
      throw ConfigError(path.string() + ": node " + std::to_string(static_cast<Index>(node)) +
                        " labeled twice");
    }
    out.push_back({static_cast<Index>(node), static_cast<int>(label)});
  }
  return out;
}

void write_labeled_pairs(const std::filesystem::path& path,
                         const std::vector<LabeledNode>& pairs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [node, label] : pairs) out << node << ',' << label << '\n';
}

}  // namespace fracprop
