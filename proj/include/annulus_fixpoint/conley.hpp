// Chain recurrence on transition graphs: recurrent boxes, chain transitive
// classes, and a discrete complete Lyapunov function.
//
// The box-level Lyapunov function is piecewise constant. It approximates a
// continuous complete Lyapunov function only heuristically: it is exact for
// the graph, and the graph is an outer approximation of the map.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/digraph.hpp"

namespace annulus {

/// Nodes lying on a directed cycle (nontrivial SCC or self-loop), sorted.
inline std::vector<int> chain_recurrent_set(const Digraph& g, const SccDecomposition& scc) {
  std::vector<int> size(scc.count, 0);
  for (int c : scc.component) ++size[c];
  std::vector<int> out;
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (size[scc.component[u]] > 1 || g.has_edge(u, u)) out.push_back(u);
  }
  return out;
}

inline std::vector<int> chain_recurrent_set(const Digraph& g) {
  return chain_recurrent_set(g, strongly_connected_components(g));
}

inline std::vector<int> chain_recurrent_set(const TransitionGraph& g) {
  return chain_recurrent_set(g.digraph());
}

struct ChainPartition {
  /// Chain transitive classes in topological order of the condensation
  /// (a class never reaches an earlier one). Members sorted.
  std::vector<std::vector<int>> classes;
  /// Node -> class id, -1 for transient nodes.
  std::vector<int> class_of;
  /// Spatial components of the recurrent box set that meet more than one
  /// class. Nonzero values flag insufficient resolution; they are not errors.
  int spatial_violations = 0;
  int spatial_components = 0;
};

inline ChainPartition chain_transitive_components(const Digraph& g, const SccDecomposition& scc,
                                                  const std::vector<int>& recurrent) {
  ChainPartition p;
  p.class_of.assign(g.num_nodes(), -1);
  std::vector<int> class_of_scc(scc.count, -1);
  std::vector<int> sccs;
  for (int u : recurrent) sccs.push_back(scc.component[u]);
  std::sort(sccs.begin(), sccs.end());
  sccs.erase(std::unique(sccs.begin(), sccs.end()), sccs.end());
  for (size_t k = 0; k < sccs.size(); ++k) class_of_scc[sccs[k]] = static_cast<int>(k);
  p.classes.resize(sccs.size());
  for (int u : recurrent) {
    const int c = class_of_scc[scc.component[u]];
    p.class_of[u] = c;
    p.classes[c].push_back(u);
  }
  for (auto& c : p.classes) std::sort(c.begin(), c.end());
  return p;
}

inline ChainPartition chain_transitive_components(const Digraph& g,
                                                  const std::vector<int>& recurrent) {
  return chain_transitive_components(g, strongly_connected_components(g), recurrent);
}

/// Counts 4-connected spatial components of the recurrent box set (x periodic)
/// and how many of them straddle several classes.
inline void spatial_connectivity_diagnostic(const BoxCover& cover, ChainPartition& p) {
  const int n = cover.size();
  std::vector<int> seen(n, 0);
  p.spatial_components = 0;
  p.spatial_violations = 0;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (p.class_of[start] < 0 || seen[start]) continue;
    ++p.spatial_components;
    bool mixed = false;
    const int cls = p.class_of[start];
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (p.class_of[u] != cls) mixed = true;
      const int i = cover.column(u);
      const int j = cover.row(u);
      const int nbrs[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& nb : nbrs) {
        if (nb[1] < 0 || nb[1] >= cover.ny()) continue;
        const int v = cover.index(static_cast<int>(positive_mod(nb[0], cover.nx())), nb[1]);
        if (p.class_of[v] >= 0 && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    if (mixed) ++p.spatial_violations;
  }
}

inline ChainPartition chain_transitive_components(const TransitionGraph& g,
                                                  const std::vector<int>& recurrent) {
  auto p = chain_transitive_components(g.digraph(), recurrent);
  spatial_connectivity_diagnostic(g.cover(), p);
  return p;
}

// ---------------------------------------------------------------------------
// Cantor values

/// Membership in the middle-thirds Cantor set, checked digit by digit in base 3
/// (both expansions of endpoints are accepted).
inline bool in_cantor_set(double v, int depth = 20, double tol = 1e-9) {
  if (v < -tol || v > 1.0 + tol) return false;
  double x = std::clamp(v, 0.0, 1.0);
  for (int k = 0; k < depth; ++k) {
    if (x <= 1.0 / 3.0 + tol) {
      x = std::clamp(3.0 * x, 0.0, 1.0);
    } else if (x >= 2.0 / 3.0 - tol) {
      x = std::clamp(3.0 * x - 2.0, 0.0, 1.0);
    } else {
      return false;
    }
  }
  return true;
}

struct CantorLevels {
  int depth = 1;
  /// values[r] for rank r = 0 .. K-1, strictly increasing.
  std::vector<double> values;
  /// Length of a level-`depth` Cantor interval.
  double gap() const { return std::pow(3.0, -depth); }
};

/// K distinct Cantor points. Rank r takes the level-d interval with binary
/// address r (digits 0/2 in base 3), using its endpoint nearest 1/2.
/// K = 2 gives {1/3, 2/3}.
inline CantorLevels cantor_levels(int count) {
  CantorLevels c;
  c.depth = 1;
  while ((1L << c.depth) < count) ++c.depth;
  const long half = 1L << (c.depth - 1);
  const double len = c.gap();
  for (long r = 0; r < count; ++r) {
    double left = 0.0;
    double scale = 1.0;
    for (int bit = c.depth - 1; bit >= 0; --bit) {
      scale /= 3.0;
      if ((r >> bit) & 1L) left += 2.0 * scale;
    }
    c.values.push_back(r < half ? left + len : left);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Decomposition

struct ConleyDecomposition {
  std::vector<int> recurrent;
  ChainPartition partition;
  SccDecomposition scc;
  CantorLevels levels;
  /// Lyapunov value of each class (same indexing as partition.classes).
  std::vector<double> class_values;
  /// Lyapunov value of each node.
  std::vector<double> lyapunov;

  int class_count() const { return static_cast<int>(partition.classes.size()); }
  int class_of(int u) const { return partition.class_of[u]; }
};

/// Discrete complete Lyapunov function. Classes receive Cantor values in
/// reachability order (a class that reaches another gets the larger value).
/// A transient node u gets (1 - t) lo(u) + t hi(u), where lo is the largest
/// class value it reaches, hi the smallest class value reaching it, and t
/// grows with the length of the longest transient path leaving u. Both bounds
/// come from one topological sweep each.
inline std::vector<double> build_lyapunov(const Digraph& g, ConleyDecomposition& d) {
  const int n = g.num_nodes();
  const int K = d.class_count();
  d.levels = cantor_levels(std::max(K, 1));
  d.class_values.assign(K, 0.0);
  for (int k = 0; k < K; ++k) d.class_values[k] = d.levels.values[K - 1 - k];

  const double gap = d.levels.gap();
  const double lo_default = K > 0 ? d.class_values.back() - gap : 0.0;
  const double hi_default = K > 0 ? d.class_values.front() + gap : 1.0;
  constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

  std::vector<int> order(n);
  for (int u = 0; u < n; ++u) order[u] = u;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return d.scc.component[a] < d.scc.component[b]; });

  std::vector<double> lo(n, kUnset), hi(n, kUnset);
  std::vector<int> height(n, 0);
  const Digraph rev = g.reversed();

  auto value_for_bound = [&](int v, const std::vector<double>& bound) {
    return d.class_of(v) >= 0 ? d.class_values[d.class_of(v)] : bound[v];
  };

  // Upper bounds: predecessors come first in topological order.
  for (int u : order) {
    if (d.class_of(u) >= 0) continue;
    double h = hi_default;
    for (int p : rev.successors(u)) h = std::min(h, value_for_bound(p, hi));
    hi[u] = h;
  }
  // Lower bounds and transient heights: successors first.
  int max_height = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int u = *it;
    if (d.class_of(u) >= 0) continue;
    double l = lo_default;
    int ht = 0;
    for (int v : g.successors(u)) {
      l = std::max(l, value_for_bound(v, lo));
      if (d.class_of(v) < 0) ht = std::max(ht, height[v] + 1);
    }
    if (g.has_edge(u, u)) throw Error("lyapunov: transient node with a self-loop");
    lo[u] = l;
    height[u] = ht;
    max_height = std::max(max_height, ht);
  }

  d.lyapunov.assign(n, 0.0);
  for (int u = 0; u < n; ++u) {
    if (d.class_of(u) >= 0) {
      d.lyapunov[u] = d.class_values[d.class_of(u)];
      continue;
    }
    if (!(hi[u] > lo[u])) throw Error("lyapunov: empty value interval for a transient node");
    const double t = static_cast<double>(height[u] + 1) / (max_height + 2);
    d.lyapunov[u] = (1.0 - t) * lo[u] + t * hi[u];
  }
  return d.lyapunov;
}

inline ConleyDecomposition decompose(const Digraph& g) {
  ConleyDecomposition d;
  d.scc = strongly_connected_components(g);
  d.recurrent = chain_recurrent_set(g, d.scc);
  d.partition = chain_transitive_components(g, d.scc, d.recurrent);
  build_lyapunov(g, d);
  return d;
}

inline ConleyDecomposition decompose(const TransitionGraph& g) {
  auto d = decompose(g.digraph());
  spatial_connectivity_diagnostic(g.cover(), d.partition);
  return d;
}

struct LyapunovCheck {
  long edge_violations = 0;
  long cantor_violations = 0;
  /// Smallest g(u) - g(v) over edges between different classes.
  double min_strict_drop = std::numeric_limits<double>::infinity();

  bool ok() const { return edge_violations == 0 && cantor_violations == 0; }
};

/// Checks g(v) < g(u) - margin on edges leaving a class or a transient node,
/// equality inside classes, and Cantor membership of class values.
inline LyapunovCheck check_lyapunov(const Digraph& g, const ConleyDecomposition& d,
                                    double margin = 1e-12, int cantor_depth = 20) {
  LyapunovCheck c;
  for (int u = 0; u < g.num_nodes(); ++u) {
    for (int v : g.successors(u)) {
      const int cu = d.class_of(u);
      if (cu >= 0 && cu == d.class_of(v)) {
        if (d.lyapunov[u] != d.lyapunov[v]) ++c.edge_violations;
        continue;
      }
      const double drop = d.lyapunov[u] - d.lyapunov[v];
      c.min_strict_drop = std::min(c.min_strict_drop, drop);
      if (!(drop > margin)) ++c.edge_violations;
    }
  }
  for (double v : d.class_values) {
    if (!in_cantor_set(v, cantor_depth)) ++c.cantor_violations;
  }
  return c;
}

}  // namespace annulus
