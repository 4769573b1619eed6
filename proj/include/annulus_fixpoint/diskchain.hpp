// Epsilon-chains on transition graphs, periodic boundary chains in the
// covering strip, and disk chains built from them.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/conley.hpp"
#include "annulus_fixpoint/core.hpp"
#include "annulus_fixpoint/linkage.hpp"

namespace annulus {

/// A directed path in the transition graph; windings[k] belongs to the step
/// nodes[k] -> nodes[k + 1].
struct GraphPath {
  std::vector<int> nodes;
  std::vector<int> windings;

  int steps() const { return static_cast<int>(windings.size()); }
};

/// Shortest path with at least one step from `from` to `to` (breadth-first,
/// successors in increasing order). With from == to this is a shortest cycle,
/// so a self-loop gives a path of length 1.
inline std::optional<GraphPath> find_epsilon_chain(const TransitionGraph& g, int from, int to) {
  const int n = g.num_nodes();
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw InvalidArgument("find_epsilon_chain: node out of range");
  }
  std::vector<int> parent(n, -1);
  std::vector<char> seen(n, 0);
  std::queue<int> queue;
  seen[from] = 1;
  queue.push(from);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int v : g.successors(u)) {
      if (v == to) {
        std::vector<int> rev{to};
        for (int w = u; w != -1; w = parent[w]) rev.push_back(w);
        GraphPath p;
        p.nodes.assign(rev.rbegin(), rev.rend());
        for (size_t k = 0; k + 1 < p.nodes.size(); ++k) {
          p.windings.push_back(g.winding(p.nodes[k], p.nodes[k + 1]));
        }
        return p;
      }
      if (seen[v]) continue;
      seen[v] = 1;
      parent[v] = u;
      queue.push(v);
    }
  }
  return std::nullopt;
}

/// Box centers along a path, each translated by the accumulated winding.
inline std::vector<LiftPoint> lifted_points(const TransitionGraph& g, const GraphPath& p) {
  std::vector<LiftPoint> out;
  long turns = 0;
  for (size_t k = 0; k < p.nodes.size(); ++k) {
    if (k > 0) turns += p.windings[k - 1];
    out.push_back(g.cover().box(p.nodes[k]).center() + LiftPoint{static_cast<double>(turns), 0.0});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Periodic boundary chains

/// A closed epsilon-chain of boxes. Step k goes nodes[k] -> nodes[(k + 1) % n]
/// with winding windings[k]; the lifted chain closes because the windings sum
/// to zero.
struct PeriodicEpsilonChain {
  std::vector<int> nodes;
  std::vector<int> windings;
  double epsilon = 0.0;
  int winding_window = 0;
  /// Integer cell (lifted column, row) of every node plus the closing copy of
  /// the first one: n + 1 entries.
  std::vector<std::array<long, 2>> cells;
  /// Box centers in the strip, n + 1 entries matching `cells`.
  std::vector<LiftPoint> lifted;

  int size() const { return static_cast<int>(nodes.size()); }
  long total_winding() const {
    long s = 0;
    for (int w : windings) s += w;
    return s;
  }
  /// Last cell minus first cell; (0, 0) for a chain that closes in the strip.
  std::array<long, 2> closure_error() const {
    return {cells.back()[0] - cells.front()[0], cells.back()[1] - cells.front()[1]};
  }
};

/// 4 * ceil(largest boundary displacement), at least 1.
inline int default_winding_window(const AnnulusMap& f, int samples = 256) {
  double m = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double x = static_cast<double>(k) / samples;
    m = std::max({m, std::abs(f.r0(x)), std::abs(f.r1(x))});
  }
  return std::max(1, 4 * static_cast<int>(std::ceil(m)));
}

inline constexpr int kMaxWindingWindow = 64;

/// Id of the lowest chain transitive class meeting both boundary rows, or -1.
inline int linked_class(const ConleyDecomposition& d, const BoxCover& cover) {
  const auto bottom = detail::classes_in_row(d, cover, 0);
  const auto top = detail::classes_in_row(d, cover, cover.ny() - 1);
  for (int c : bottom) {
    if (top.count(c)) return c;
  }
  return -1;
}

/// Breadth-first search in the product of the linked class with winding
/// offsets in [-W, W] and a "top row visited" flag, from the lowest bottom-row
/// box of the class back to itself at offset 0 after visiting the top row.
/// W starts at `window` and doubles up to kMaxWindingWindow.
inline PeriodicEpsilonChain find_periodic_boundary_chain(const TransitionGraph& g,
                                                         const ConleyDecomposition& d,
                                                         int window = 4) {
  const BoxCover& cover = g.cover();
  const int cls = linked_class(d, cover);
  if (cls < 0) throw Error("find_periodic_boundary_chain: boundaries are not linked");
  if (window < 1) throw InvalidArgument("winding window must be >= 1");
  const int top_row = cover.ny() - 1;
  int start = -1;
  for (int u : d.partition.classes[cls]) {
    if (cover.row(u) == 0) {
      start = u;
      break;
    }
  }

  for (int W = window; W <= kMaxWindingWindow; W *= 2) {
    const long span = 2L * W + 1;
    auto encode = [&](int node, int w, int top) {
      return (static_cast<long>(node) * span + (w + W)) * 2 + top;
    };
    const long states = static_cast<long>(g.num_nodes()) * span * 2;
    std::vector<long> parent(states, -1);
    std::vector<char> seen(states, 0);
    std::queue<long> queue;
    const long origin = encode(start, 0, 0);
    seen[origin] = 1;
    queue.push(origin);
    long goal = -1;
    long goal_parent = -1;
    while (!queue.empty() && goal < 0) {
      const long s = queue.front();
      queue.pop();
      const int top = static_cast<int>(s % 2);
      const int w = static_cast<int>((s / 2) % span) - W;
      const int u = static_cast<int>(s / 2 / span);
      for (int v : g.successors(u)) {
        if (d.class_of(v) != cls) continue;
        const int nw = w + g.winding(u, v);
        if (nw < -W || nw > W) continue;
        const int ntop = (top || cover.row(v) == top_row) ? 1 : 0;
        if (v == start && nw == 0 && ntop) {
          goal = encode(v, nw, ntop);
          goal_parent = s;
          break;
        }
        const long t = encode(v, nw, ntop);
        if (seen[t]) continue;
        seen[t] = 1;
        parent[t] = s;
        queue.push(t);
      }
    }
    if (goal < 0) continue;

    std::vector<long> trail;
    for (long s = goal_parent; s != -1; s = parent[s]) trail.push_back(s);
    std::reverse(trail.begin(), trail.end());
    PeriodicEpsilonChain c;
    c.epsilon = g.epsilon();
    c.winding_window = W;
    for (long s : trail) c.nodes.push_back(static_cast<int>(s / 2 / span));
    const int n = c.size();
    long turns = 0;
    for (int k = 0; k <= n; ++k) {
      const int u = c.nodes[k % n];
      c.cells.push_back({cover.column(u) + turns * cover.nx(), cover.row(u)});
      c.lifted.push_back(cover.box(u).center() + LiftPoint{static_cast<double>(turns), 0.0});
      if (k < n) {
        const int w = g.winding(u, c.nodes[(k + 1) % n]);
        c.windings.push_back(w);
        turns += w;
      }
    }
    return c;
  }
  throw Error("find_periodic_boundary_chain: winding window exhausted at W = " +
              std::to_string(kMaxWindingWindow));
}

// ---------------------------------------------------------------------------
// Disk chains

/// Extension of a lift to the plane: the lift inside the strip, and beyond
/// each boundary the horizontal translation by that boundary's displacement.
inline PlaneMap plane_extension(const AnnulusMap& f) {
  return [f](LiftPoint p) {
    if (p.y > f.y_hi()) return LiftPoint{p.x + f.r1(p.x), p.y};
    if (p.y < f.y_lo()) return LiftPoint{p.x - f.r0(p.x), p.y};
    return f.lift(p);
  };
}

struct Disk {
  LiftPoint center;
  double radius = 0.0;
};

/// One entry of a disk chain: an open disk, or the union of two overlapping
/// disks after a merge, with its step count m.
struct ChainLink {
  std::vector<Disk> pieces;
  int steps = 1;
};

struct DiskChain {
  std::vector<ChainLink> links;
  /// If true the last link is followed by the first.
  bool periodic = false;
  /// Number of links before the merge and after it (strictly decreasing).
  std::vector<int> merge_lengths;
  /// Indices (i0, j0) of the merged pair in the input sequence.
  std::optional<std::array<int, 2>> merged_pair;
  /// delta - 4 eps, a lower bound for the distance between the image of one
  /// merged disk and the other.
  std::optional<double> merge_certificate;
};

struct DiskChainGateFailure {
  double epsilon = 0.0;
  double delta = 0.0;
  std::string reason;
};

using DiskChainResult = std::variant<DiskChain, DiskChainGateFailure>;

struct DiskChainVerification {
  /// Condition 1: min over links of dist(h(U), U), sampled.
  double image_disjoint_margin = std::numeric_limits<double>::infinity();
  /// Condition 2: min over pieces of distinct links of |c - c'| - (r + r').
  double pairwise_margin = std::numeric_limits<double>::infinity();
  /// Condition 3: min over consecutive links of the depth of h^m(U_i) inside
  /// U_{i+1} at the best sample.
  double image_overlap_margin = std::numeric_limits<double>::infinity();

  bool ok() const {
    return image_disjoint_margin > 0.0 && pairwise_margin >= 0.0 && image_overlap_margin > 0.0;
  }
};

namespace detail {

// Center, then `rings` concentric circles of `spokes` points out to the rim.
inline std::vector<LiftPoint> disk_samples(const Disk& d, int rings = 12, int spokes = 48) {
  std::vector<LiftPoint> out{d.center};
  for (int r = 1; r <= rings; ++r) {
    const double rho = d.radius * r / rings;
    for (int s = 0; s < spokes; ++s) {
      const double a = kTwoPi * s / spokes;
      out.push_back(d.center + LiftPoint{rho * std::cos(a), rho * std::sin(a)});
    }
  }
  return out;
}

inline LiftPoint iterate(const PlaneMap& h, LiftPoint p, int m) {
  for (int k = 0; k < m; ++k) p = h(p);
  return p;
}

}  // namespace detail

/// Checks the three disk-chain conditions by sampling each disk; independent
/// of the construction in build_disk_chain.
inline DiskChainVerification verify_disk_chain(const DiskChain& chain, const PlaneMap& h) {
  DiskChainVerification v;
  const int n = static_cast<int>(chain.links.size());
  for (int i = 0; i < n; ++i) {
    const auto& link = chain.links[i];
    for (const auto& a : link.pieces) {
      const auto samples = detail::disk_samples(a);
      std::vector<LiftPoint> images;
      images.reserve(samples.size());
      for (const auto& p : samples) images.push_back(h(p));
      for (const auto& b : link.pieces) {
        for (const auto& q : images) {
          v.image_disjoint_margin = std::min(v.image_disjoint_margin, norm(q - b.center) - b.radius);
        }
      }
    }
    for (int j = i + 1; j < n; ++j) {
      for (const auto& a : link.pieces) {
        for (const auto& b : chain.links[j].pieces) {
          v.pairwise_margin =
              std::min(v.pairwise_margin, norm(a.center - b.center) - (a.radius + b.radius));
        }
      }
    }
    if (i + 1 < n || chain.periodic) {
      const auto& next = chain.links[(i + 1) % n];
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& a : link.pieces) {
        for (const auto& p : detail::disk_samples(a)) {
          const LiftPoint q = detail::iterate(h, p, link.steps);
          for (const auto& b : next.pieces) best = std::max(best, b.radius - norm(q - b.center));
        }
      }
      v.image_overlap_margin = std::min(v.image_overlap_margin, best);
    }
  }
  return v;
}

/// Places disks of radius eps at the chain points. If two non-consecutive
/// disks overlap, the shortest such pair (i0, j0), lexicographically first on
/// ties, becomes one link U_i0 u U_j0 followed by U_i0+1 .. U_j0-1, which is a
/// periodic chain. Returns the gate failure when eps >= delta / 4.
inline DiskChainResult build_disk_chain(const std::vector<LiftPoint>& points, bool periodic,
                                        const PlaneMap& h, double delta, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("build_disk_chain: epsilon must be > 0");
  if (!(epsilon < delta / 4.0)) {
    return DiskChainGateFailure{epsilon, delta,
                                "eps >= delta / 4: no fixed-point-free disk chain certificate"};
  }
  const int n = static_cast<int>(points.size());
  if (n < 2) throw InvalidArgument("build_disk_chain: need at least two points");
  auto disk = [&](int i) { return Disk{points[i], epsilon}; };

  DiskChain chain;
  chain.merge_lengths.push_back(n);
  std::optional<std::array<int, 2>> pair;
  for (int len = 2; len < n && !pair; ++len) {
    for (int i = 0; i + len < n; ++i) {
      if (norm(points[i] - points[i + len]) < 2.0 * epsilon) {
        pair = std::array<int, 2>{i, i + len};
        break;
      }
    }
  }
  if (pair) {
    const auto [i0, j0] = *pair;
    chain.links.push_back({{disk(i0), disk(j0)}, 1});
    for (int k = i0 + 1; k < j0; ++k) chain.links.push_back({{disk(k)}, 1});
    chain.periodic = true;
    chain.merged_pair = pair;
    chain.merge_certificate = delta - 4.0 * epsilon;
    chain.merge_lengths.push_back(j0 - i0);
    if (chain.merge_lengths.back() >= chain.merge_lengths.front()) {
      throw Error("build_disk_chain: merge did not shorten the chain");
    }
  } else {
    for (int k = 0; k < n; ++k) chain.links.push_back({{disk(k)}, 1});
    chain.periodic = periodic;
  }
  if (!verify_disk_chain(chain, h).ok()) {
    throw Error("build_disk_chain: disk chain conditions fail after construction");
  }
  return chain;
}

/// Disk chain from a periodic boundary chain under the plane extension of f.
inline DiskChainResult build_disk_chain(const PeriodicEpsilonChain& c, const AnnulusMap& f,
                                        double delta) {
  std::vector<LiftPoint> points(c.lifted.begin(), c.lifted.end() - 1);
  return build_disk_chain(points, true, plane_extension(f), delta, c.epsilon);
}

}  // namespace annulus
