// Uniform box covers of the annulus and the transition graph that
// outer-approximates a map on them, with covering-space winding increments.
#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "annulus_fixpoint/core.hpp"
#include "annulus_fixpoint/digraph.hpp"

namespace annulus {

/// Axis-aligned rectangle in lift coordinates.
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  LiftPoint center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(LiftPoint p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  Rect shifted(double dx, double dy = 0.0) const { return {x0 + dx, x1 + dx, y0 + dy, y1 + dy}; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// nx x ny closed boxes tiling S^1 x [y_lo, y_hi]; node id u = j * nx + i.
class BoxCover {
 public:
  BoxCover(int nx, int ny, double y_lo = 0.0, double y_hi = 1.0)
      : nx_(nx), ny_(ny), y_lo_(y_lo), y_hi_(y_hi) {
    if (nx < 4 || ny < 2) {
      throw InvalidArgument("box cover needs nx >= 4 and ny >= 2 (got " + std::to_string(nx) +
                            " x " + std::to_string(ny) + ")");
    }
    if (!(y_hi > y_lo)) throw InvalidArgument("box cover: empty y-range");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double y_lo() const { return y_lo_; }
  double y_hi() const { return y_hi_; }
  int size() const { return nx_ * ny_; }
  double box_width() const { return 1.0 / nx_; }
  double box_height() const { return (y_hi_ - y_lo_) / ny_; }
  double diameter() const { return std::hypot(box_width(), box_height()); }

  int index(int i, int j) const { return j * nx_ + i; }
  int column(int u) const { return u % nx_; }
  int row(int u) const { return u / nx_; }

  /// Box (i, j) in its canonical copy, x in [i / nx, (i + 1) / nx].
  Rect box(int i, int j) const {
    return {static_cast<double>(i) / nx_, static_cast<double>(i + 1) / nx_,
            y_lo_ + j * box_height(), y_lo_ + (j + 1) * box_height()};
  }
  Rect box(int u) const { return box(column(u), row(u)); }

  /// Lowest-index box containing p (boxes are closed, so faces are shared).
  int locate(AnnulusPoint p) const {
    const int i = std::clamp(static_cast<int>(std::ceil(p.x * nx_)) - 1, 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::ceil((p.y - y_lo_) / box_height())) - 1, 0,
                             ny_ - 1);
    return index(i, j);
  }

  /// Lifted column index k of x: box column (k mod nx), translated by
  /// floor(k / nx) turns. Agrees with the lowest-index rule of locate().
  long lifted_column(double x) const {
    const double s = x * nx_;
    long k = static_cast<long>(std::ceil(s)) - 1;
    if (s == std::floor(s) && positive_mod(k, nx_) == nx_ - 1) ++k;
    return k;
  }

 private:
  int nx_;
  int ny_;
  double y_lo_;
  double y_hi_;
};

inline BoxCover build_cover(int nx, int ny, double y_lo = 0.0, double y_hi = 1.0) {
  return BoxCover(nx, ny, y_lo, y_hi);
}

struct TransitionEdge {
  int from = 0;
  int to = 0;
  int winding = 0;

  friend bool operator==(const TransitionEdge&, const TransitionEdge&) = default;
};

/// Directed outer approximation of a map on a box cover. An edge (u, v, w)
/// means the image of box u meets the copy of box v translated by w turns.
class TransitionGraph {
 public:
  TransitionGraph(BoxCover cover, double padding, std::vector<TransitionEdge> edges)
      : cover_(cover), padding_(padding) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(edges.size());
    for (const auto& e : edges) pairs.emplace_back(e.from, e.to);
    graph_ = Digraph(cover_.size(), std::move(pairs));
    windings_.assign(graph_.num_edges(), 0);
    for (const auto& e : edges) windings_[graph_.edge_index(e.from, e.to)] = e.winding;
  }

  const BoxCover& cover() const { return cover_; }
  double padding() const { return padding_; }
  const Digraph& digraph() const { return graph_; }
  int num_nodes() const { return graph_.num_nodes(); }
  size_t num_edges() const { return graph_.num_edges(); }
  std::span<const int> successors(int u) const { return graph_.successors(u); }

  /// Winding increment of edge (u, v); the edge must exist.
  int winding(int u, int v) const {
    const auto k = graph_.edge_index(u, v);
    if (k < 0) throw InvalidArgument("winding requested for a missing edge");
    return windings_[static_cast<size_t>(k)];
  }

  bool has_edge(int u, int v) const { return graph_.has_edge(u, v); }

  /// Resolution of one admissible pseudo-orbit step.
  double epsilon() const { return cover_.diameter() + padding_; }

  std::vector<TransitionEdge> edges() const {
    std::vector<TransitionEdge> out;
    out.reserve(num_edges());
    for (int u = 0; u < num_nodes(); ++u) {
      for (int v : successors(u)) out.push_back({u, v, winding(u, v)});
    }
    return out;
  }

 private:
  BoxCover cover_;
  double padding_;
  Digraph graph_;
  std::vector<int> windings_;
};

namespace detail {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = (k == n - 1) ? b : a + (b - a) * k / (n - 1);
  return v;
}

/// Runs body(begin, end) over [0, n) on up to `workers` threads; rethrows the
/// first exception.
template <class Body>
void parallel_ranges(int n, int workers, Body&& body) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long>(n) * w / workers);
    const int end = static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    threads.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Largest deviation between the image of a sub-cell midpoint and the mean of
/// its corner images, over a seeded pilot sample of boxes. Zero for affine maps.
inline double pilot_image_defect(const AnnulusMap& f, const BoxCover& cover, int samples_per_box,
                                 unsigned seed, int pilot_boxes = 64) {
  std::vector<int> ids(cover.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(std::min<size_t>(ids.size(), static_cast<size_t>(pilot_boxes)));
  std::sort(ids.begin(), ids.end());
  double defect = 0.0;
  for (int u : ids) {
    const Rect b = cover.box(u);
    const auto xs = detail::linspace(b.x0, b.x1, samples_per_box);
    const auto ys = detail::linspace(b.y0, b.y1, samples_per_box);
    for (int j = 0; j + 1 < samples_per_box; ++j) {
      for (int i = 0; i + 1 < samples_per_box; ++i) {
        const LiftPoint c = 0.25 * (f.lift({xs[i], ys[j]}) + f.lift({xs[i + 1], ys[j]}) +
                                    f.lift({xs[i], ys[j + 1]}) + f.lift({xs[i + 1], ys[j + 1]}));
        const LiftPoint m = f.lift({0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])});
        defect = std::max(defect, norm(m - c));
      }
    }
  }
  return defect;
}

/// Default image inflation: 2 x pilot defect + box diameter / samples_per_box.
inline double default_padding(const AnnulusMap& f, const BoxCover& cover, int samples_per_box,
                              unsigned seed = 0) {
  return 2.0 * pilot_image_defect(f, cover, samples_per_box, seed) +
         cover.diameter() / samples_per_box;
}

/// Builds the transition graph: each box is sampled on a samples_per_box^2
/// grid (corners included), the bounding rectangle of the images is inflated
/// by `padding`, and every box copy meeting it receives an edge.
inline TransitionGraph build_transition_graph(const AnnulusMap& f, const BoxCover& cover,
                                              int samples_per_box, double padding,
                                              int workers = 1) {
  if (samples_per_box < 4) throw InvalidArgument("samples_per_box must be >= 4");
  if (!(padding >= 0.0)) throw InvalidArgument("padding must be >= 0");
  const int nx = cover.nx();
  const int ny = cover.ny();
  const double h = cover.box_height();
  std::vector<std::vector<TransitionEdge>> per_box(cover.size());

  detail::parallel_ranges(cover.size(), workers, [&](int begin, int end) {
    for (int u = begin; u < end; ++u) {
      const Rect b = cover.box(u);
      const auto xs = detail::linspace(b.x0, b.x1, samples_per_box);
      const auto ys = detail::linspace(b.y0, b.y1, samples_per_box);
      double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
      double ymin = xmin, ymax = -xmin;
      for (double y : ys) {
        for (double x : xs) {
          const LiftPoint q = f.lift({x, y});
          xmin = std::min(xmin, q.x);
          xmax = std::max(xmax, q.x);
          ymin = std::min(ymin, q.y);
          ymax = std::max(ymax, q.y);
        }
      }
      xmin -= padding;
      xmax += padding;
      ymin = std::max(ymin - padding, cover.y_lo());
      ymax = std::min(ymax + padding, cover.y_hi());
      // Closed boxes: copy k covers [k / nx, (k + 1) / nx].
      const long k_lo = static_cast<long>(std::ceil(xmin * nx)) - 1;
      const long k_hi = static_cast<long>(std::floor(xmax * nx));
      if (k_hi - k_lo + 1 > nx) {
        throw ResolutionError("image of box " + std::to_string(u) + " spans more than nx = " +
                              std::to_string(nx) +
                              " columns; reduce padding or refine the cover");
      }
      const int j_lo = std::max(0, static_cast<int>(std::ceil((ymin - cover.y_lo()) / h)) - 1);
      const int j_hi = std::min(ny - 1, static_cast<int>(std::floor((ymax - cover.y_lo()) / h)));
      auto& out = per_box[u];
      for (int j = j_lo; j <= j_hi; ++j) {
        for (long k = k_lo; k <= k_hi; ++k) {
          out.push_back({u, cover.index(static_cast<int>(positive_mod(k, nx)), j),
                         static_cast<int>(floor_div(k, nx))});
        }
      }
    }
  });

  std::vector<TransitionEdge> edges;
  for (auto& v : per_box) edges.insert(edges.end(), v.begin(), v.end());
  return TransitionGraph(cover, padding, std::move(edges));
}

/// Convenience overload using the default padding.
inline TransitionGraph build_transition_graph(const AnnulusMap& f, const BoxCover& cover,
                                              int samples_per_box = 8) {
  return build_transition_graph(f, cover, samples_per_box,
                                default_padding(f, cover, samples_per_box));
}

// ---------------------------------------------------------------------------
// Edge-list export: header lines `key value...`, then one `u v w` per edge.

inline void write_edge_list(std::ostream& out, const TransitionGraph& g) {
  std::ostringstream s;
  s.precision(17);
  const auto& c = g.cover();
  s << "# annulus transition graph\n";
  s << "nx " << c.nx() << "\n";
  s << "ny " << c.ny() << "\n";
  s << "y_range " << c.y_lo() << " " << c.y_hi() << "\n";
  s << "padding " << g.padding() << "\n";
  s << "nodes " << g.num_nodes() << "\n";
  s << "edges " << g.num_edges() << "\n";
  for (const auto& e : g.edges()) s << e.from << " " << e.to << " " << e.winding << "\n";
  out << s.str();
}

inline TransitionGraph read_edge_list(std::istream& in) {
  int nx = 0, ny = 0;
  double y_lo = 0.0, y_hi = 1.0, padding = 0.0;
  long declared_edges = -1;
  std::vector<TransitionEdge> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "nx") {
      ss >> nx;
    } else if (key == "ny") {
      ss >> ny;
    } else if (key == "y_range") {
      ss >> y_lo >> y_hi;
    } else if (key == "padding") {
      ss >> padding;
    } else if (key == "nodes") {
      // Derived from nx * ny.
    } else if (key == "edges") {
      ss >> declared_edges;
    } else {
      std::istringstream es(line);
      TransitionEdge e;
      if (!(es >> e.from >> e.to >> e.winding)) {
        throw InvalidArgument("edge list: malformed line '" + line + "'");
      }
      edges.push_back(e);
    }
  }
  if (declared_edges >= 0 && declared_edges != static_cast<long>(edges.size())) {
    throw InvalidArgument("edge list: edge count does not match header");
  }
  return TransitionGraph(BoxCover(nx, ny, y_lo, y_hi), padding, std::move(edges));
}

}  // namespace annulus
