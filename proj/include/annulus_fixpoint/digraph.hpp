// Compressed-row directed graph and strongly connected components.
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace annulus {

/// Immutable directed graph in CSR form. Successor lists are sorted.
class Digraph {
 public:
  Digraph() = default;

  /// Builds from an edge list; duplicate edges are kept once.
  Digraph(int num_nodes, std::vector<std::pair<int, int>> edges) : num_nodes_(num_nodes) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    offsets_.assign(static_cast<size_t>(num_nodes) + 1, 0);
    for (const auto& [u, v] : edges) ++offsets_[static_cast<size_t>(u) + 1];
    for (int u = 0; u < num_nodes; ++u) offsets_[u + 1] += offsets_[u];
    targets_.reserve(edges.size());
    for (const auto& e : edges) targets_.push_back(e.second);
  }

  int num_nodes() const { return num_nodes_; }
  size_t num_edges() const { return targets_.size(); }

  std::span<const int> successors(int u) const {
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }

  /// Position of edge (u, v) in the edge array, or -1.
  std::int64_t edge_index(int u, int v) const {
    auto s = successors(u);
    auto it = std::lower_bound(s.begin(), s.end(), v);
    if (it == s.end() || *it != v) return -1;
    return static_cast<std::int64_t>(offsets_[u] + (it - s.begin()));
  }

  bool has_edge(int u, int v) const { return edge_index(u, v) >= 0; }

  Digraph reversed() const {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(targets_.size());
    for (int u = 0; u < num_nodes_; ++u) {
      for (int v : successors(u)) edges.emplace_back(v, u);
    }
    return Digraph(num_nodes_, std::move(edges));
  }

 private:
  int num_nodes_ = 0;
  std::vector<size_t> offsets_{0};
  std::vector<int> targets_;
};

struct SccDecomposition {
  /// component[u] is the SCC id of u. Ids are a topological order of the
  /// condensation: every edge u -> v has component[u] <= component[v].
  std::vector<int> component;
  int count = 0;
};

/// Tarjan's algorithm, iterative so deep graphs do not overflow the stack.
inline SccDecomposition strongly_connected_components(const Digraph& g) {
  const int n = g.num_nodes();
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<int> finished(n, -1);
  int next_index = 0;
  int finished_count = 0;
  struct Frame {
    int node;
    size_t child;
  };
  std::vector<Frame> call;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& fr = call.back();
      const int u = fr.node;
      auto succ = g.successors(u);
      if (fr.child < succ.size()) {
        const int v = succ[fr.child++];
        if (index[v] == -1) {
          index[v] = low[v] = next_index++;
          stack.push_back(v);
          on_stack[v] = 1;
          call.push_back({v, 0});
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          finished[w] = finished_count;
        } while (w != u);
        ++finished_count;
      }
      call.pop_back();
      if (!call.empty()) {
        const int parent = call.back().node;
        low[parent] = std::min(low[parent], low[u]);
      }
    }
  }
  // Tarjan completes sinks first; reverse to get a topological numbering.
  SccDecomposition out;
  out.count = finished_count;
  out.component.resize(n);
  for (int u = 0; u < n; ++u) out.component[u] = finished_count - 1 - finished[u];
  return out;
}

}  // namespace annulus
