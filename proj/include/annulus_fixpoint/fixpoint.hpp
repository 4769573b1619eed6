// Displacement lower bounds, fixed-point index by winding number, and
// fixed-point localization by subdivision.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/core.hpp"

namespace annulus {

inline LiftPoint displacement(const AnnulusMap& f, LiftPoint p) { return f.lift(p) - p; }

/// Lower bound for |lift(p) - p| on one rectangle: the sampled minimum on a
/// samples x samples grid minus L * (half the sample-cell diagonal), where L
/// is the largest difference quotient of the displacement between neighbouring
/// samples. Clamped at 0.
inline double displacement_bound(const AnnulusMap& f, const Rect& r, int samples = 8) {
  if (samples < 2) throw InvalidArgument("displacement_bound needs >= 2 samples per side");
  const auto xs = detail::linspace(r.x0, r.x1, samples);
  const auto ys = detail::linspace(r.y0, r.y1, samples);
  std::vector<LiftPoint> v(static_cast<size_t>(samples) * samples);
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      const LiftPoint d = displacement(f, {xs[i], ys[j]});
      v[static_cast<size_t>(j) * samples + i] = d;
      m = std::min(m, norm(d));
    }
  }
  const double dx = r.width() / (samples - 1);
  const double dy = r.height() / (samples - 1);
  double lip = 0.0;
  auto quotient = [&](int i0, int j0, int i1, int j1) {
    const double dist = std::hypot((i1 - i0) * dx, (j1 - j0) * dy);
    if (dist == 0.0) return;
    const LiftPoint a = v[static_cast<size_t>(j0) * samples + i0];
    const LiftPoint b = v[static_cast<size_t>(j1) * samples + i1];
    lip = std::max(lip, norm(b - a) / dist);
  };
  for (int j = 0; j < samples; ++j) {
    for (int i = 0; i < samples; ++i) {
      if (i + 1 < samples) quotient(i, j, i + 1, j);
      if (j + 1 < samples) quotient(i, j, i, j + 1);
      if (i + 1 < samples && j + 1 < samples) {
        quotient(i, j, i + 1, j + 1);
        quotient(i + 1, j, i, j + 1);
      }
    }
  }
  return std::max(0.0, m - lip * 0.5 * std::hypot(dx, dy));
}

/// Smallest per-rectangle bound over a region.
inline double displacement_bound(const AnnulusMap& f, std::span<const Rect> region,
                                 int samples = 8) {
  if (region.empty()) throw InvalidArgument("displacement_bound: empty region");
  double b = std::numeric_limits<double>::infinity();
  for (const auto& r : region) {
    b = std::min(b, displacement_bound(f, r, samples));
    if (b == 0.0) break;
  }
  return b;
}

/// All boxes of a cover as rectangles.
inline std::vector<Rect> cover_rects(const BoxCover& cover) {
  std::vector<Rect> out;
  out.reserve(cover.size());
  for (int u = 0; u < cover.size(); ++u) out.push_back(cover.box(u));
  return out;
}

// ---------------------------------------------------------------------------
// Index

inline constexpr int kMaxBoundarySamples = 4096;
inline constexpr double kZeroDisplacement = 1e-13;

struct IndexResult {
  bool ok = false;
  int index = 0;
  double margin = 0.0;  // min |v| over the boundary samples
  int samples = 0;      // boundary samples used
  std::string failure;  // set when !ok
};

/// Winding number of v(p) = lift(p) - p along the boundary of `r`, traversed
/// counterclockwise. Sampling doubles (up to 4096) while some angle increment
/// reaches pi/2; the result is a margin failure if that persists or if v
/// vanishes at a sample.
inline IndexResult box_index(const AnnulusMap& f, const Rect& r, int boundary_samples = 64) {
  if (boundary_samples < 64) throw InvalidArgument("box_index needs >= 64 boundary samples");
  IndexResult res;
  for (int n = boundary_samples; n <= kMaxBoundarySamples; n *= 2) {
    const int per_side = (n + 3) / 4;
    const LiftPoint corners[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
    std::vector<LiftPoint> v;
    v.reserve(static_cast<size_t>(per_side) * 4);
    double margin = std::numeric_limits<double>::infinity();
    for (int side = 0; side < 4; ++side) {
      const LiftPoint a = corners[side];
      const LiftPoint b = corners[(side + 1) % 4];
      for (int k = 0; k < per_side; ++k) {
        const double t = static_cast<double>(k) / per_side;
        const LiftPoint p = side % 2 == 0 ? LiftPoint{a.x + t * (b.x - a.x), a.y}
                                          : LiftPoint{a.x, a.y + t * (b.y - a.y)};
        const LiftPoint d = displacement(f, p);
        margin = std::min(margin, norm(d));
        v.push_back(d);
      }
    }
    res.samples = per_side * 4;
    res.margin = margin;
    if (!(margin > kZeroDisplacement)) {
      res.failure = "displacement vanishes on the box boundary";
      return res;
    }
    double total = 0.0;
    bool aliased = false;
    for (size_t k = 0; k < v.size(); ++k) {
      const LiftPoint a = v[k];
      const LiftPoint b = v[(k + 1) % v.size()];
      const double inc = std::atan2(cross(a, b), dot(a, b));
      if (std::abs(inc) >= 0.5 * std::numbers::pi) {
        aliased = true;
        break;
      }
      total += inc;
    }
    if (aliased) continue;
    res.ok = true;
    res.index = static_cast<int>(std::lround(total / kTwoPi));
    return res;
  }
  res.failure = "angle increment >= pi/2 at 4096 boundary samples";
  return res;
}

// ---------------------------------------------------------------------------
// Localization

struct FixedPointCertificate {
  Rect box;
  int index = 0;
  double boundary_margin = 0.0;
  int boundary_samples = 0;
  /// Newton confirmation from the box center, if it converged inside the box.
  std::optional<LiftPoint> newton_point;
  double newton_residual = std::numeric_limits<double>::infinity();
};

/// Connected group of unresolved leaves at maximal depth.
struct SuspiciousRegion {
  Rect bounds;
  int leaves = 0;
};

struct FixedPointSearch {
  std::vector<FixedPointCertificate> certificates;
  std::vector<SuspiciousRegion> suspicious;
  long boxes_examined = 0;
  int leaves = 0;
};

struct LocateOptions {
  int bound_samples = 8;
  int boundary_samples = 64;
  int workers = 1;
};

struct NewtonResult {
  bool converged = false;
  LiftPoint point;
  double residual = std::numeric_limits<double>::infinity();
};

/// Newton's method on lift(p) - p with central-difference Jacobians.
inline NewtonResult newton_fixed_point(const AnnulusMap& f, LiftPoint start, int iterations = 50) {
  LiftPoint p = start;
  constexpr double h = 1e-7;
  NewtonResult out;
  for (int it = 0; it < iterations; ++it) {
    const LiftPoint v = displacement(f, p);
    out.residual = norm(v);
    if (out.residual < 1e-13) break;
    const double hy_lo = std::min(h, p.y - f.y_lo());
    const double hy_hi = std::min(h, f.y_hi() - p.y);
    if (hy_lo + hy_hi <= 0.0) break;
    const LiftPoint jx = (1.0 / (2 * h)) * (displacement(f, {p.x + h, p.y}) -
                                            displacement(f, {p.x - h, p.y}));
    const LiftPoint jy = (1.0 / (hy_lo + hy_hi)) * (displacement(f, {p.x, p.y + hy_hi}) -
                                                    displacement(f, {p.x, p.y - hy_lo}));
    const double det = jx.x * jy.y - jy.x * jx.y;
    if (std::abs(det) < 1e-300) break;
    p = p - LiftPoint{(jy.y * v.x - jy.x * v.y) / det, (-jx.y * v.x + jx.x * v.y) / det};
    p.y = std::clamp(p.y, f.y_lo(), f.y_hi());
  }
  out.point = p;
  out.residual = norm(displacement(f, p));
  out.converged = out.residual < 1e-10;
  return out;
}

inline void newton_confirm(const AnnulusMap& f, FixedPointCertificate& c) {
  const auto r = newton_fixed_point(f, c.box.center());
  c.newton_residual = r.residual;
  if (r.converged && c.box.contains(r.point)) c.newton_point = r.point;
}

namespace detail {

inline std::array<Rect, 4> quarters(const Rect& r) {
  const LiftPoint c = r.center();
  return {Rect{r.x0, c.x, r.y0, c.y}, Rect{c.x, r.x1, r.y0, c.y}, Rect{r.x0, c.x, c.y, r.y1},
          Rect{c.x, r.x1, c.y, r.y1}};
}

// Positive-area overlap of two rectangles on the cylinder.
inline bool overlaps_mod1(const Rect& a, const Rect& b) {
  for (int k = -1; k <= 1; ++k) {
    const Rect s = b.shifted(k);
    if (std::min(a.x1, s.x1) > std::max(a.x0, s.x0) && std::min(a.y1, s.y1) > std::max(a.y0, s.y0)) {
      return true;
    }
  }
  return false;
}

inline bool touches_mod1(const Rect& a, const Rect& b) {
  for (int k = -1; k <= 1; ++k) {
    const Rect s = b.shifted(k);
    if (std::min(a.x1, s.x1) >= std::max(a.x0, s.x0) && std::min(a.y1, s.y1) >= std::max(a.y0, s.y0)) {
      return true;
    }
  }
  return false;
}

// Translate so that the center lies in [0, 1).
inline Rect normalize_mod1(const Rect& r) {
  return r.shifted(-std::floor(r.center().x));
}

struct LeafOutcome {
  std::optional<FixedPointCertificate> certificate;
  bool suspicious = false;
};

inline LeafOutcome resolve_leaf(const AnnulusMap& f, const Rect& leaf, int boundary_samples) {
  LeafOutcome out;
  auto certify = [&](const Rect& r, const IndexResult& ix) {
    FixedPointCertificate c;
    c.box = normalize_mod1(r);
    c.index = ix.index;
    c.boundary_margin = ix.margin;
    c.boundary_samples = ix.samples;
    return c;
  };
  const auto ix = box_index(f, leaf, boundary_samples);
  if (ix.ok) {
    if (ix.index != 0) out.certificate = certify(leaf, ix);
    return out;
  }
  // A fixed point on the leaf boundary: retry on half-shifted copies.
  const double w = 0.5 * leaf.width();
  const double h = 0.5 * leaf.height();
  const double shifts[8][2] = {{w, h}, {-w, h}, {w, -h}, {-w, -h}, {w, 0}, {-w, 0}, {0, h}, {0, -h}};
  for (const auto& s : shifts) {
    const Rect r = leaf.shifted(s[0], s[1]);
    if (r.y0 < f.y_lo() || r.y1 > f.y_hi()) continue;
    const auto sx = box_index(f, r, boundary_samples);
    if (sx.ok && sx.index != 0) {
      out.certificate = certify(r, sx);
      return out;
    }
  }
  out.suspicious = true;
  return out;
}

}  // namespace detail

/// Subdivides the cover boxes whose displacement bound is 0, down to
/// `max_depth` halvings, then computes the index on every remaining leaf.
/// Nonzero-index leaves become certificates (overlapping ones are merged);
/// leaves whose index cannot be computed form suspicious regions.
inline FixedPointSearch locate_fixed_points(const AnnulusMap& f, const BoxCover& cover,
                                            int max_depth, const LocateOptions& opt = {}) {
  if (max_depth < 0 || max_depth > 20) throw InvalidArgument("max_depth must be in [0, 20]");
  FixedPointSearch search;
  std::vector<Rect> level = cover_rects(cover);
  std::vector<Rect> leaves;
  for (int depth = 0; depth <= max_depth; ++depth) {
    std::vector<char> keep(level.size(), 0);
    detail::parallel_ranges(static_cast<int>(level.size()), opt.workers, [&](int b, int e) {
      for (int k = b; k < e; ++k) {
        keep[k] = displacement_bound(f, level[k], opt.bound_samples) == 0.0 ? 1 : 0;
      }
    });
    search.boxes_examined += static_cast<long>(level.size());
    std::vector<Rect> next;
    for (size_t k = 0; k < level.size(); ++k) {
      if (!keep[k]) continue;
      if (depth == max_depth) {
        leaves.push_back(level[k]);
      } else {
        for (const auto& q : detail::quarters(level[k])) next.push_back(q);
      }
    }
    level = std::move(next);
  }
  search.leaves = static_cast<int>(leaves.size());

  std::vector<detail::LeafOutcome> outcomes(leaves.size());
  detail::parallel_ranges(static_cast<int>(leaves.size()), opt.workers, [&](int b, int e) {
    for (int k = b; k < e; ++k) outcomes[k] = detail::resolve_leaf(f, leaves[k], opt.boundary_samples);
  });

  std::vector<FixedPointCertificate> candidates;
  for (const auto& o : outcomes) {
    if (o.certificate) candidates.push_back(*o.certificate);
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    return std::tie(a.box.x0, a.box.y0) < std::tie(b.box.x0, b.box.y0);
  });
  for (const auto& c : candidates) {
    const bool duplicate = std::any_of(
        search.certificates.begin(), search.certificates.end(),
        [&](const FixedPointCertificate& kept) { return detail::overlaps_mod1(kept.box, c.box); });
    if (!duplicate) search.certificates.push_back(c);
  }
  for (auto& c : search.certificates) newton_confirm(f, c);

  // Unresolved leaves not explained by a certificate, grouped by contact on
  // the leaf lattice (x periodic).
  const double lw = cover.box_width() / std::ldexp(1.0, max_depth);
  const double lh = cover.box_height() / std::ldexp(1.0, max_depth);
  const long cols = static_cast<long>(cover.nx()) << max_depth;
  std::map<std::pair<long, long>, int> cell_id;
  std::vector<std::pair<long, long>> cells;
  for (size_t k = 0; k < leaves.size(); ++k) {
    if (!outcomes[k].suspicious) continue;
    const bool explained = std::any_of(
        search.certificates.begin(), search.certificates.end(),
        [&](const FixedPointCertificate& c) { return detail::touches_mod1(c.box, leaves[k]); });
    if (explained) continue;
    const long ix = positive_mod(std::lround(leaves[k].x0 / lw), cols);
    const long iy = std::lround((leaves[k].y0 - cover.y_lo()) / lh);
    cell_id.emplace(std::make_pair(ix, iy), static_cast<int>(cells.size()));
    cells.emplace_back(ix, iy);
  }
  std::vector<int> parent(cells.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (size_t k = 0; k < cells.size(); ++k) {
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = cell_id.find({positive_mod(cells[k].first + dx, cols), cells[k].second + dy});
        if (it != cell_id.end()) parent[find(static_cast<int>(k))] = find(it->second);
      }
    }
  }
  std::map<int, std::vector<int>> groups;
  for (size_t k = 0; k < cells.size(); ++k) groups[find(static_cast<int>(k))].push_back(static_cast<int>(k));
  for (const auto& [root, members] : groups) {
    long x_lo = cols, x_hi = -1, y_lo = std::numeric_limits<long>::max(), y_hi = -1;
    for (int m : members) {
      x_lo = std::min(x_lo, cells[m].first);
      x_hi = std::max(x_hi, cells[m].first);
      y_lo = std::min(y_lo, cells[m].second);
      y_hi = std::max(y_hi, cells[m].second);
    }
    SuspiciousRegion r;
    r.bounds = {x_lo * lw, (x_hi + 1) * lw, cover.y_lo() + y_lo * lh, cover.y_lo() + (y_hi + 1) * lh};
    r.leaves = static_cast<int>(members.size());
    search.suspicious.push_back(r);
  }
  std::sort(search.suspicious.begin(), search.suspicious.end(), [](const auto& a, const auto& b) {
    return std::tie(a.bounds.x0, a.bounds.y0) < std::tie(b.bounds.x0, b.bounds.y0);
  });
  return search;
}

}  // namespace annulus
