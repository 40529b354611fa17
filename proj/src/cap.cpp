// SPDX-License-Identifier: Apache-2.0
#include "fracprop/cap.hpp"

#include <algorithm>
#include <fstream>
#include <string>

namespace fracprop {

namespace {

void check_inputs(const FeatureMatrix& xt, const PseudoLabelSet& labels) {
  if (labels.size() != xt.rows()) {
    throw ShapeError("pseudo-labels cover " + std::to_string(labels.size()) +
                     " nodes but features have " + std::to_string(xt.rows()) + " rows");
  }
  for (int label : labels.labels) {
    if (label < 0 || label >= labels.num_classes) throw ConfigError("pseudo-label out of range");
  }
}

}  // namespace

EntropyWeights neighborhood_entropy(const Graph& g, const std::vector<int>& labels,
                                    int num_classes) {
  const Index n = g.num_nodes();
  if (static_cast<Index>(labels.size()) != n) {
    throw ShapeError("labels do not cover every node");
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes) throw ConfigError("pseudo-label out of range");
  }
  EntropyWeights out;
  out.entropy = VectorXd::Zero(n);
  std::vector<int> hood;
  for (Index i = 0; i < n; ++i) {
    hood.clear();
    hood.push_back(labels[i]);
    for (Index nb : g.neighbors(i)) hood.push_back(labels[nb]);
    const auto size = static_cast<double>(hood.size());
    if (hood.size() == 1) continue;

    std::sort(hood.begin(), hood.end());
    double sum = 0.0;
    for (std::size_t a = 0; a < hood.size();) {
      std::size_t b = a;
      while (b < hood.size() && hood[b] == hood[a]) ++b;
      const double p = static_cast<double>(b - a) / size;
      sum += p * std::log(p);
      a = b;
    }
    out.entropy[i] = std::clamp(0.0 - sum / std::log(size), 0.0, 1.0);
  }
  out.weight = (1.0 - out.entropy.array()).matrix();
  return out;
}

ClassAnchors class_anchor(const FeatureMatrix& xt, const PseudoLabelSet& labels,
                          const EntropyWeights& weights) {
  check_inputs(xt, labels);
  if (weights.weight.size() != xt.rows()) throw ShapeError("entropy weights do not cover every node");
  const int classes = labels.num_classes;
  ClassAnchors out;
  out.features = MatrixXd::Zero(classes, xt.cols());
  out.present.assign(static_cast<std::size_t>(classes), false);

  MatrixXd weighted = MatrixXd::Zero(classes, xt.cols());
  MatrixXd plain = MatrixXd::Zero(classes, xt.cols());
  VectorXd weight_sum = VectorXd::Zero(classes);
  VectorXd count = VectorXd::Zero(classes);
  for (Index i = 0; i < xt.rows(); ++i) {
    const int c = labels.labels[i];
    weighted.row(c) += weights.weight[i] * xt.row(i);
    plain.row(c) += xt.row(i);
    weight_sum[c] += weights.weight[i];
    count[c] += 1.0;
  }
  for (int c = 0; c < classes; ++c) {
    if (count[c] == 0.0) {
      out.empty_classes.push_back(c);
      continue;
    }
    out.present[c] = true;
    if (weight_sum[c] > 0.0) {
      out.features.row(c) = weighted.row(c) / weight_sum[c];
    } else {
      out.features.row(c) = plain.row(c) / count[c];
      out.fallback_classes.push_back(c);
    }
  }
  return out;
}

MatrixXd ClassGraph::propagation_matrix() const {
  const Index k = static_cast<Index>(missing_nodes.size());
  MatrixXd w = MatrixXd::Zero(k + 1, k + 1);
  for (Index i = 0; i < k; ++i) {
    w(i, i) = self_weights[i];
    w(i, k) = 1.0 - self_weights[i];
  }
  w(k, k) = 1.0;
  return w;
}

MatrixXd ClassGraph::feature_block(const FeatureMatrix& xt) const {
  const Index k = static_cast<Index>(missing_nodes.size());
  MatrixXd block(k + 1, xt.cols());
  for (Index i = 0; i < k; ++i) block.row(i) = xt.row(missing_nodes[i]);
  block.row(k) = anchor.transpose();
  return block;
}

std::vector<ClassGraph> build_class_graphs(const FeatureMatrix& xt, const Mask& mask,
                                           const PseudoLabelSet& labels, double temperature,
                                           const ClassAnchors& anchors) {
  check_inputs(xt, labels);
  if (mask.rows() != xt.rows() || mask.cols() != xt.cols()) {
    throw ShapeError("mask shape does not match the features");
  }
  const MatrixXd logits = labels.logits();
  std::vector<ClassGraph> graphs;
  for (int c = 0; c < labels.num_classes; ++c) {
    ClassGraph cg;
    cg.class_id = c;
    for (Index i = 0; i < xt.rows(); ++i) {
      if (labels.labels[i] == c && mask.row_any_masked(i)) cg.missing_nodes.push_back(i);
    }
    if (cg.missing_nodes.empty() || !anchors.present[c]) continue;
    cg.anchor = anchors.features.row(c).transpose();
    cg.self_weights.resize(static_cast<Index>(cg.missing_nodes.size()));
    for (std::size_t k = 0; k < cg.missing_nodes.size(); ++k) {
      cg.self_weights[static_cast<Index>(k)] =
          temperature_softmax(logits.row(cg.missing_nodes[k]), temperature)[c];
    }
    graphs.push_back(std::move(cg));
  }
  return graphs;
}

FeatureMatrix cap_refine(const Graph& g, const FeatureMatrix& xt, const Mask& mask,
                         const PseudoLabelSet& labels, double temperature,
                         const EntropyWeights& weights, CapReport* report) {
  check_inputs(xt, labels);
  if (g.num_nodes() != xt.rows()) throw ShapeError("graph and features disagree in size");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive and finite");
  }
  ClassAnchors anchors = class_anchor(xt, labels, weights);
  const auto graphs = build_class_graphs(xt, mask, labels, temperature, anchors);

  FeatureMatrix refined = xt;
  Index refined_nodes = 0;
  for (const ClassGraph& cg : graphs) {
    for (std::size_t k = 0; k < cg.missing_nodes.size(); ++k) {
      const Index i = cg.missing_nodes[k];
      const double self = cg.self_weights[static_cast<Index>(k)];
      const auto own = xt.row(i).array();
      const auto anchor = cg.anchor.transpose().array();
      // Clamp keeps rounding from stepping outside the segment [own, anchor].
      refined.row(i) = (self * own + (1.0 - self) * anchor)
                           .max(own.min(anchor))
                           .min(own.max(anchor))
                           .matrix();
      ++refined_nodes;
    }
  }
  FeatureMatrix out = (mask.bits() != 0).select(xt.array(), refined.array()).matrix();

  if (report) {
    report->refined_nodes = refined_nodes;
    report->entropy = weights;
    const MatrixXd logits = labels.logits();
    report->confidence.resize(xt.rows());
    for (Index i = 0; i < xt.rows(); ++i) {
      report->confidence[i] = temperature_softmax(logits.row(i), temperature)[labels.labels[i]];
    }
    report->anchors = std::move(anchors);
  }
  return out;
}

void write_anchors_csv(const std::filesystem::path& path, const ClassAnchors& anchors) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (Index c = 0; c < anchors.features.rows(); ++c) {
    if (!anchors.present[c]) continue;
    out << c;
    for (Index l = 0; l < anchors.features.cols(); ++l) out << ',' << anchors.features(c, l);
    out << '\n';
  }
}

void write_node_confidence_csv(const std::filesystem::path& path, const PseudoLabelSet& labels,
                               const CapReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "node,label,entropy,confidence\n";
  for (Index i = 0; i < labels.size(); ++i) {
    out << i << ',' << labels.labels[i] << ',' << report.entropy.entropy[i] << ','
        << report.confidence[i] << '\n';
  }
}

}  // namespace fracprop
