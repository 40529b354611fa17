// SPDX-License-Identifier: Apache-2.0
#include "fracprop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <string>

#include "fracprop/error.hpp"

namespace fracprop {

Graph Graph::from_edges(Index num_nodes,
                        std::span<const std::pair<Index, Index>> edges) {
  if (num_nodes < 0) throw ConfigError("negative node count");
  std::vector<std::pair<Index, Index>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw ConfigError("edge (" + std::to_string(u) + ", " +
                        std::to_string(v) + ") out of range for " +
                        std::to_string(num_nodes) + " nodes");
    }
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  Graph g;
  g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  g.targets_.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    ++g.offsets_[u + 1];
    g.targets_.push_back(v);
  }
  for (Index i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
  return g;
}

SubgraphView::SubgraphView(const Graph& parent, std::vector<Index> members)
    : parent_(&parent), members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  const Index n = parent.num_nodes();
  local_of_.assign(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < size(); ++i) {
    if (members_[i] < 0 || members_[i] >= n) {
      throw ConfigError("subgraph member " + std::to_string(members_[i]) +
                        " out of range");
    }
    local_of_[members_[i]] = i;
  }

  component_.assign(members_.size(), -1);
  std::vector<Index> stack;
  for (Index start = 0; start < size(); ++start) {
    if (component_[start] >= 0) continue;
    const Index label = num_components_++;
    component_[start] = label;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index cur = stack.back();
      stack.pop_back();
      for (Index nb : parent.neighbors(members_[cur])) {
        const Index l = local_of_[nb];
        if (l >= 0 && component_[l] < 0) {
          component_[l] = label;
          stack.push_back(l);
        }
      }
    }
  }
}

SubgraphView SubgraphView::full(const Graph& parent) {
  std::vector<Index> all(static_cast<std::size_t>(parent.num_nodes()));
  for (Index i = 0; i < parent.num_nodes(); ++i) all[i] = i;
  return SubgraphView(parent, std::move(all));
}

std::vector<std::vector<Index>> SubgraphView::components() const {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(num_components_));
  for (Index i = 0; i < size(); ++i) out[component_[i]].push_back(i);
  return out;
}

std::vector<Index> SubgraphView::local_neighbors(Index local) const {
  std::vector<Index> out;
  for (Index nb : parent_->neighbors(members_[local])) {
    if (local_of_[nb] >= 0) out.push_back(local_of_[nb]);
  }
  return out;
}

Graph load_edge_list(const std::filesystem::path& path,
                     std::optional<Index> n_hint) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list " + path.string());

  std::vector<std::pair<Index, Index>> edges;
  Index max_index = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    long long u = 0;
    long long v = 0;
    std::string extra;
    if (!(fields >> u >> v) || (fields >> extra)) {
      throw ParseError(path.string(), line_no,
                       "expected two integers, got '" + line + "'");
    }
    if (u < 0 || v < 0) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": negative node index");
    }
    edges.emplace_back(u, v);
    max_index = std::max<Index>(max_index, std::max<Index>(u, v));
  }
  Index n = max_index + 1;
  if (n_hint && *n_hint > n) n = *n_hint;
  return Graph::from_edges(n, edges);
}

std::vector<Index> connected_components(const Graph& g, Index* count) {
  const Index n = g.num_nodes();
  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  Index next = 0;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index cur = stack.back();
      stack.pop_back();
      for (Index nb : g.neighbors(cur)) {
        if (label[nb] < 0) {
          label[nb] = next;
          stack.push_back(nb);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

ComponentExtraction largest_connected_component(const Graph& g) {
  const Index n = g.num_nodes();
  if (n == 0) throw ConfigError("largest_connected_component: empty graph");

  Index count = 0;
  const auto label = connected_components(g, &count);
  std::vector<Index> sizes(static_cast<std::size_t>(count), 0);
  for (Index l : label) ++sizes[l];
  // Labels follow lowest member order, so the first maximum wins ties.
  const Index best = std::max_element(sizes.begin(), sizes.end()) - sizes.begin();

  ComponentExtraction out;
  out.old_to_new.assign(static_cast<std::size_t>(n), -1);
  for (Index v = 0; v < n; ++v) {
    if (label[v] == best) {
      out.old_to_new[v] = static_cast<Index>(out.new_to_old.size());
      out.new_to_old.push_back(v);
    }
  }
  std::vector<std::pair<Index, Index>> edges;
  for (Index v : out.new_to_old) {
    for (Index nb : g.neighbors(v)) {
      if (v < nb) edges.emplace_back(out.old_to_new[v], out.old_to_new[nb]);
    }
  }
  out.graph = Graph::from_edges(static_cast<Index>(out.new_to_old.size()), edges);
  return out;
}

void write_component_map(const std::filesystem::path& path,
                         const ComponentExtraction& extraction) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# original_index new_index\n";
  for (std::size_t i = 0; i < extraction.new_to_old.size(); ++i) {
    out << extraction.new_to_old[i] << ' ' << i << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

NormalizedAdjacency sym_normalize(const Graph& g, bool add_self_loops) {
  const Index n = g.num_nodes();
  NormalizedAdjacency adj;
  adj.degrees.resize(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) {
    const Index d = g.degree(v) + (add_self_loops ? 1 : 0);
    if (d == 0) {
      throw ConfigError("sym_normalize: node " + std::to_string(v) +
                        " is isolated; enable self-loops or drop it");
    }
    adj.degrees[v] = static_cast<double>(d);
  }

  adj.values.resize(static_cast<std::size_t>(g.num_half_edges()));
  for (Index v = 0; v < n; ++v) {
    Index e = g.edge_begin(v);
    for (Index nb : g.neighbors(v)) {
      adj.values[e++] = 1.0 / std::sqrt(adj.degrees[v] * adj.degrees[nb]);
    }
  }
  if (add_self_loops) {
    adj.self_loops.resize(static_cast<std::size_t>(n));
    for (Index v = 0; v < n; ++v) adj.self_loops[v] = 1.0 / adj.degrees[v];
  }
  return adj;
}

std::vector<Index> bfs_distance_to_set(const Graph& g,
                                       std::span<const Index> seeds) {
  if (seeds.empty()) throw ConfigError("bfs_distance_to_set: empty seed set");
  const Index n = g.num_nodes();
  std::vector<Index> dist(static_cast<std::size_t>(n), kUnreachable);
  std::queue<Index> frontier;
  for (Index s : seeds) {
    if (s < 0 || s >= n) throw ConfigError("seed out of range");
    if (dist[s] != 0) {
      dist[s] = 0;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const Index cur = frontier.front();
    frontier.pop();
    for (Index nb : g.neighbors(cur)) {
      if (dist[nb] == kUnreachable) {
        dist[nb] = dist[cur] + 1;
        frontier.push(nb);
      }
    }
  }
  return dist;
}

SubgraphView k_hop_subgraph(const Graph& g, std::span<const Index> seeds,
                            Index hops) {
  if (seeds.empty()) throw ConfigError("k_hop_subgraph: empty seed set");
  if (hops < 0) throw ConfigError("k_hop_subgraph: negative hop radius");
  const Index n = g.num_nodes();
  std::vector<Index> dist(static_cast<std::size_t>(n), kUnreachable);
  std::vector<Index> members;
  std::queue<Index> frontier;
  for (Index s : seeds) {
    if (s < 0 || s >= n) throw ConfigError("seed out of range");
    if (dist[s] != 0) {
      dist[s] = 0;
      members.push_back(s);
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const Index cur = frontier.front();
    frontier.pop();
    if (dist[cur] == hops) continue;
    for (Index nb : g.neighbors(cur)) {
      if (dist[nb] == kUnreachable) {
        dist[nb] = dist[cur] + 1;
        members.push_back(nb);
        frontier.push(nb);
      }
    }
  }
  return SubgraphView(g, std::move(members));
}

}  // namespace fracprop
