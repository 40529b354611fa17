// SPDX-License-Identifier: Apache-2.0
// Graph builders and dense reference computations shared by the tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracprop/graph.hpp"
#include "fracprop/rng.hpp"

namespace fracprop::test {

using Edges = std::vector<std::pair<Index, Index>>;

inline Graph make_graph(Index n, const Edges& edges) { return Graph::from_edges(n, edges); }

inline Graph path_graph(Index n) {
  Edges e;
  for (Index i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

inline Graph star_graph(Index leaves) {
  Edges e;
  for (Index i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

inline Graph clique(Index n, Index offset = 0, Edges* out = nullptr) {
  Edges e;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) e.emplace_back(offset + i, offset + j);
  }
  if (out) out->insert(out->end(), e.begin(), e.end());
  return make_graph(offset + n, e);
}

// Random spanning tree plus extra edges with probability p.
inline Graph random_connected_graph(Index n, double p, Rng& rng) {
  Edges e;
  for (Index i = 1; i < n; ++i) e.emplace_back(static_cast<Index>(rng.below(i)), i);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) e.emplace_back(i, j);
    }
  }
  return make_graph(n, e);
}

inline Graph random_graph(Index n, double p, Rng& rng) {
  Edges e;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) e.emplace_back(i, j);
    }
  }
  return make_graph(n, e);
}

inline Eigen::MatrixXd dense_adjacency(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
  for (Index i = 0; i < g.num_nodes(); ++i) {
    for (Index j : g.neighbors(i)) a(i, j) = 1.0;
  }
  return a;
}

// D^{-1/2} A D^{-1/2}, built densely.
inline Eigen::MatrixXd dense_sym_normalized(const Graph& g) {
  const Eigen::MatrixXd a = dense_adjacency(g);
  const Eigen::VectorXd d = a.rowwise().sum();
  const Eigen::VectorXd s = d.array().rsqrt().matrix();
  return s.asDiagonal() * a * s.asDiagonal();
}

// Elementwise power and row normalization on a dense matrix.
inline Eigen::MatrixXd dense_fractional(const Eigen::MatrixXd& a, double gamma) {
  Eigen::MatrixXd w = (a.array() > 0.0).select(a.array().pow(gamma), 0.0).matrix();
  for (Index i = 0; i < w.rows(); ++i) {
    const double s = w.row(i).sum();
    if (s > 0.0) w.row(i) /= s;
  }
  return w;
}

// Fixed point of x = P x0 + Q (W x + lambda x_prev) by a dense solve.
inline Eigen::VectorXd dense_fixed_point(const Eigen::MatrixXd& w, const Eigen::VectorXd& x0,
                                         const std::vector<bool>& observed,
                                         const Eigen::VectorXd& x_prev, double lambda) {
  const Index n = w.rows();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) (observed[i] ? p : q)(i, i) = 1.0;
  const Eigen::MatrixXd g = q * w;
  const Eigen::VectorXd b = p * x0 + lambda * q * x_prev;
  return (Eigen::MatrixXd::Identity(n, n) - g).partialPivLu().solve(b);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fracprop-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fracprop::test
