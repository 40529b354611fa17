// SPDX-License-Identifier: Apache-2.0
#include "fracprop/fractional.hpp"

#include <charconv>
#include <fstream>
#include <string>

namespace fracprop {

FracOperator::FracOperator(double gamma, SparseRowMatrix weights)
    : gamma_(gamma), weights_(std::move(weights)) {
  weights_.makeCompressed();
  for (Index i = 0; i < weights_.rows(); ++i) {
    if (row_empty(i)) empty_rows_.push_back(i);
  }
}

FracOperator build_fractional(const SubgraphView& view, const NormalizedAdjacency& adj,
                              double gamma, DegreeSource degrees) {
  check_gamma(gamma);
  const Graph& g = view.parent();
  const Index size = view.size();
  const bool self = adj.has_self_loops();

  std::vector<double> view_degree;
  if (degrees == DegreeSource::View) {
    view_degree.resize(static_cast<std::size_t>(size));
    for (Index i = 0; i < size; ++i) {
      Index d = self ? 1 : 0;
      for (Index nb : g.neighbors(view.global(i))) d += view.contains(nb) ? 1 : 0;
      view_degree[i] = static_cast<double>(d);
    }
  }

  std::vector<Eigen::Triplet<double, Index>> entries;
  std::vector<Index> cols;
  VectorXd row_values;
  for (Index i = 0; i < size; ++i) {
    const Index v = view.global(i);
    cols.clear();
    std::vector<double> values;
    Index e = g.edge_begin(v);
    bool self_placed = !self;
    for (Index nb : g.neighbors(v)) {
      if (!self_placed && nb > v) {
        cols.push_back(i);
        values.push_back(adj.self_loops[v]);
        self_placed = true;
      }
      const Index l = view.local(nb);
      if (l >= 0) {
        cols.push_back(l);
        values.push_back(adj.values[e]);
      }
      ++e;
    }
    if (!self_placed) {
      cols.push_back(i);
      values.push_back(adj.self_loops[v]);
    }
    if (cols.empty()) continue;

    if (degrees == DegreeSource::View) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        values[k] = 1.0 / std::sqrt(view_degree[i] * view_degree[cols[k]]);
      }
    }
    row_values = fractional_weights(
        Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size())), gamma);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      entries.emplace_back(i, cols[k], row_values[static_cast<Index>(k)]);
    }
  }
  SparseRowMatrix w(size, size);
  w.setFromTriplets(entries.begin(), entries.end());
  return FracOperator(gamma, std::move(w));
}

void write_operator_csv(const std::filesystem::path& path, const FracOperator& op,
                        const SubgraphView& view) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "i,j,weight\n";
  char buf[32];
  const auto& w = op.weights();
  for (Index i = 0; i < w.outerSize(); ++i) {
    for (SparseRowMatrix::InnerIterator it(w, i); it; ++it) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, it.value());
      out << view.global(i) << ',' << view.global(it.col()) << ',';
      out.write(buf, end - buf);
      out << '\n';
    }
  }
}

}  // namespace fracprop
