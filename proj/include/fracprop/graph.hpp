// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fracprop/types.hpp"

namespace fracprop {

// Immutable undirected graph in compressed sparse row form.
//
// Neighbor lists are sorted, deduplicated and symmetric. Self-loops are never
// stored; the normalization step adds them on request.
class Graph {
 public:
  Graph() = default;

  // Symmetrizes and deduplicates `edges`; self-loops in the input are dropped.
  static Graph from_edges(Index num_nodes,
                          std::span<const std::pair<Index, Index>> edges);

  Index num_nodes() const noexcept { return static_cast<Index>(offsets_.size()) - 1; }
  // Undirected edge count (each edge counted once).
  Index num_edges() const noexcept { return static_cast<Index>(targets_.size()) / 2; }
  Index degree(Index v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  std::span<const Index> neighbors(Index v) const noexcept {
    return {targets_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
  }
  // Position of v's first neighbor in the flat edge layout.
  Index edge_begin(Index v) const noexcept { return offsets_[v]; }
  // Number of stored directed half-edges (2 * num_edges()).
  Index num_half_edges() const noexcept { return static_cast<Index>(targets_.size()); }

  std::span<const Index> offsets() const noexcept { return offsets_; }
  std::span<const Index> targets() const noexcept { return targets_; }

 private:
  std::vector<Index> offsets_{0};
  std::vector<Index> targets_;
};

// Per-edge weights (d_i d_j)^{-1/2} laid out exactly like Graph::targets().
struct NormalizedAdjacency {
  std::vector<double> values;
  // Effective degree per node (includes the self-loop when one was added).
  std::vector<double> degrees;
  // Diagonal weight 1/d_i per node; empty unless self-loops were added.
  std::vector<double> self_loops;

  bool has_self_loops() const noexcept { return !self_loops.empty(); }
};

// Induced subgraph over a sorted member set. Holds no edge data of its own.
class SubgraphView {
 public:
  SubgraphView(const Graph& parent, std::vector<Index> members);

  static SubgraphView full(const Graph& parent);

  const Graph& parent() const noexcept { return *parent_; }
  Index size() const noexcept { return static_cast<Index>(members_.size()); }
  std::span<const Index> members() const noexcept { return members_; }

  Index global(Index local) const noexcept { return members_[local]; }
  // -1 when `global` is not a member.
  Index local(Index global) const noexcept { return local_of_[global]; }
  bool contains(Index global) const noexcept { return local_of_[global] >= 0; }

  Index num_components() const noexcept { return num_components_; }
  // Component label per member (local index). Labels are assigned in order of
  // each component's lowest member.
  std::span<const Index> component_ids() const noexcept { return component_; }
  // Members of each component, local indices ascending.
  std::vector<std::vector<Index>> components() const;

  // In-view neighbors of a member, as local indices ascending.
  std::vector<Index> local_neighbors(Index local) const;

 private:
  const Graph* parent_;
  std::vector<Index> members_;
  std::vector<Index> local_of_;
  std::vector<Index> component_;
  Index num_components_ = 0;
};

struct ComponentExtraction {
  Graph graph;
  // Original index -> new index, -1 for nodes outside the component.
  std::vector<Index> old_to_new;
  // New index -> original index.
  std::vector<Index> new_to_old;
};

// Reads whitespace-separated index pairs, one edge per line. Lines starting
// with '#' and blank lines are skipped.
Graph load_edge_list(const std::filesystem::path& path,
                     std::optional<Index> n_hint = std::nullopt);

// Ties go to the component containing the lowest original index.
ComponentExtraction largest_connected_component(const Graph& g);

void write_component_map(const std::filesystem::path& path,
                         const ComponentExtraction& extraction);

NormalizedAdjacency sym_normalize(const Graph& g, bool add_self_loops = false);

SubgraphView k_hop_subgraph(const Graph& g, std::span<const Index> seeds,
                            Index hops);

// Multi-source BFS hop counts; kUnreachable for nodes not connected to seeds.
std::vector<Index> bfs_distance_to_set(const Graph& g,
                                       std::span<const Index> seeds);

// Connected component label per node, numbered by lowest member.
std::vector<Index> connected_components(const Graph& g, Index* count = nullptr);

}  // namespace fracprop
