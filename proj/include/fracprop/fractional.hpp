// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fracprop/error.hpp"
#include "fracprop/graph.hpp"
#include "fracprop/types.hpp"

namespace fracprop {

inline void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be positive and finite");
  }
}

// Elementwise power followed by normalization of one positive weight row:
// w_j = a_j^gamma / sum_k a_k^gamma.
//
// Powers are taken of a_j / max_k a_k, so large gamma cannot underflow the
// whole row. gamma == 1 reduces to plain a_j / sum_k a_k. Tied maxima share
// the mass evenly. Entries that would underflow are clamped to the smallest
// normal double so the support never shrinks.
template <typename Derived>
Vector<typename Derived::Scalar> fractional_weights(
    const Eigen::MatrixBase<Derived>& row, typename Derived::Scalar gamma) {
  using Scalar = typename Derived::Scalar;
  check_gamma(static_cast<double>(gamma));
  Vector<Scalar> w(row.size());
  if (row.size() == 0) return w;
  if (gamma == Scalar(1)) {
    w = row / row.sum();
    return w;
  }
  const Scalar top = row.maxCoeff();
  w = (row.array() / top).pow(gamma).matrix();
  w /= w.sum();
  w = w.cwiseMax(std::numeric_limits<Scalar>::min());
  return w;
}

// Which degrees define the symmetric weights inside a view.
enum class DegreeSource {
  // Weights of the host graph's normalized adjacency, restricted to the view.
  Parent,
  // Renormalize with in-view degrees.
  View,
};

// Row-stochastic operator over a subgraph view. Row i holds the fractional
// weights of node i's in-view neighbors; rows of nodes without in-view
// neighbors are empty.
class FracOperator {
 public:
  FracOperator(double gamma, SparseRowMatrix weights);

  double gamma() const noexcept { return gamma_; }
  Index size() const noexcept { return weights_.rows(); }
  const SparseRowMatrix& weights() const noexcept { return weights_; }
  std::span<const Index> empty_rows() const noexcept { return empty_rows_; }
  bool row_empty(Index i) const { return weights_.outerIndexPtr()[i + 1] == weights_.outerIndexPtr()[i]; }

 private:
  double gamma_;
  SparseRowMatrix weights_;
  std::vector<Index> empty_rows_;
};

FracOperator build_fractional(const SubgraphView& view, const NormalizedAdjacency& adj,
                              double gamma, DegreeSource degrees = DegreeSource::Parent);

// y = A^gamma x over the view, for a vector or a block of columns. Empty rows
// produce 0 (see empty_rows()).
template <typename Derived>
typename Derived::PlainObject apply(const FracOperator& op, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != op.size()) {
    throw ShapeError("apply: input has " + std::to_string(x.rows()) +
                     " rows but the operator has size " + std::to_string(op.size()));
  }
  return op.weights() * x.derived();
}

// Debug dump: one "i,j,weight" line per stored entry, global node indices.
void write_operator_csv(const std::filesystem::path& path, const FracOperator& op,
                        const SubgraphView& view);

}  // namespace fracprop
