// Boundary linkage: either both boundary circles share a chain transitive
// class, or a Lyapunov level band yields an essential curve disjoint from its
// image. Also boundary rotation numbers and the collar extension.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/conley.hpp"
#include "annulus_fixpoint/core.hpp"

namespace annulus {

/// The analysis cannot decide at the current resolution.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

struct SeparatingCurve {
  double level = 0.0;         // the Lyapunov level c
  double level_gap = 0.0;     // width of the class-value gap containing c
  bool sublevel_above = true; // {g < c} contains the upper boundary
  std::vector<int> band;      // one band box per column
  EssentialCurve curve;
  double min_distance = 0.0;  // verified distance between curve and image
};

struct LinkageVerdict {
  bool linked = false;
  std::optional<int> component;            // set iff linked
  std::optional<SeparatingCurve> witness;  // set iff not linked
};

namespace detail {

inline std::set<int> classes_in_row(const ConleyDecomposition& d, const BoxCover& cover, int j) {
  std::set<int> out;
  for (int i = 0; i < cover.nx(); ++i) {
    const int c = d.class_of(cover.index(i, j));
    if (c >= 0) out.insert(c);
  }
  return out;
}

// Band box of each column: the lowest box of the run of sublevel boxes that
// reaches the boundary on the sublevel side (mirrored when the sublevel set
// sits below). Empty when some column has no such run.
inline std::vector<int> level_band(const std::vector<char>& sub, const BoxCover& cover,
                                   bool sublevel_above) {
  std::vector<int> band;
  for (int i = 0; i < cover.nx(); ++i) {
    int j = sublevel_above ? cover.ny() - 1 : 0;
    const int step = sublevel_above ? -1 : 1;
    if (!sub[cover.index(i, j)]) return {};
    while (j + step >= 0 && j + step < cover.ny() && sub[cover.index(i, j + step)]) j += step;
    band.push_back(cover.index(i, j));
  }
  return band;
}

}  // namespace detail

/// Extracts an essential curve from a box band just inside a sublevel set
/// {g < c} separating the boundary rows, and verifies that it misses its image.
/// Levels are tried from the widest class-value gap down.
inline SeparatingCurve extract_separating_curve(const ConleyDecomposition& d,
                                                const BoxCover& cover, const AnnulusMap& f,
                                                int refine = 4) {
  const auto bottom = detail::classes_in_row(d, cover, 0);
  const auto top = detail::classes_in_row(d, cover, cover.ny() - 1);
  for (int c : bottom) {
    if (top.count(c)) throw InvalidArgument("extract_separating_curve: boundaries are linked");
  }
  std::vector<double> values = d.class_values;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  struct Candidate {
    double level, gap;
  };
  std::vector<Candidate> candidates;
  for (size_t k = 0; k + 1 < values.size(); ++k) {
    candidates.push_back({0.5 * (values[k] + values[k + 1]), values[k + 1] - values[k]});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.gap > b.gap; });

  const int n = cover.size();
  for (const auto& cand : candidates) {
    std::vector<char> sub(n, 0);
    for (int u = 0; u < n; ++u) sub[u] = d.lyapunov[u] < cand.level ? 1 : 0;
    bool top_in = true, top_out = true, bottom_in = true, bottom_out = true;
    for (int i = 0; i < cover.nx(); ++i) {
      const bool t = sub[cover.index(i, cover.ny() - 1)];
      const bool b = sub[cover.index(i, 0)];
      top_in &= t;
      top_out &= !t;
      bottom_in &= b;
      bottom_out &= !b;
    }
    bool above;
    if (top_in && bottom_out) {
      above = true;
    } else if (bottom_in && top_out) {
      above = false;
    } else {
      continue;
    }
    const auto band = detail::level_band(sub, cover, above);
    if (band.empty()) continue;
    std::vector<LiftPoint> vertices;
    for (int u : band) vertices.push_back(cover.box(u).center());
    EssentialCurve curve = EssentialCurve::from_polyline(vertices).refined(refine);
    const auto check = intersects_image(f, curve, curve.max_spacing());
    if (check.intersects || !(check.min_distance > 0.0)) continue;
    return SeparatingCurve{cand.level, cand.gap, above, band, std::move(curve),
                           check.min_distance};
  }
  throw InconclusiveError("no separating band found at this resolution; refine the cover");
}

/// Decides whether some chain transitive class meets both boundary rows.
inline LinkageVerdict boundary_linkage(const ConleyDecomposition& d, const BoxCover& cover,
                                       const AnnulusMap& f) {
  const auto bottom = detail::classes_in_row(d, cover, 0);
  const auto top = detail::classes_in_row(d, cover, cover.ny() - 1);
  if (bottom.empty() || top.empty()) {
    throw Error("boundary_linkage: a boundary row has no recurrent box");
  }
  for (int c : bottom) {
    if (top.count(c)) return LinkageVerdict{true, c, std::nullopt};
  }
  return LinkageVerdict{false, std::nullopt, extract_separating_curve(d, cover, f)};
}

// ---------------------------------------------------------------------------
// Rotation numbers and collars

enum class Boundary { Lower = 0, Upper = 1 };

struct RotationNumber {
  double value = 0.0;
  double error_bound = 0.0;  // 1 / iterations
};

/// (lift^n(0, b).x - 0) / n on the chosen boundary circle. The integer part of
/// the orbit is tracked separately to keep full precision over long runs.
inline RotationNumber rotation_number(const AnnulusMap& f, Boundary boundary, long iterations) {
  if (iterations < 100) throw InvalidArgument("rotation_number needs >= 100 iterations");
  const double y = boundary == Boundary::Lower ? f.y_lo() : f.y_hi();
  double x = 0.0;
  long turns = 0;
  for (long k = 0; k < iterations; ++k) {
    const double q = f.lift({x, y}).x;
    const double whole = std::floor(q);
    turns += static_cast<long>(whole);
    x = q - whole;
  }
  const double n = static_cast<double>(iterations);
  return {(static_cast<double>(turns) + x) / n, 1.0 / n};
}

struct BoundaryRotation {
  double lower = 0.0;  // alpha, negative under the twist condition
  double upper = 0.0;  // beta, positive under the twist condition
};

/// Extends f to S^1 x [y_lo - delta, y_hi + delta]. In each collar the lift
/// interpolates linearly in y between the boundary map and the rigid rotation
/// by the boundary rotation number; inside the original annulus it is f.
inline AnnulusMap collar_extend(const AnnulusMap& f, double delta, BoundaryRotation rot) {
  if (!(delta > 0.0) || delta > 0.5) throw InvalidArgument("collar width must be in (0, 0.5]");
  const double y_lo = f.y_lo();
  const double y_hi = f.y_hi();
  auto collar_x = [f, delta, rot, y_lo, y_hi](double x, double y) {
    if (y >= y_hi) {
      const double w = (y - y_hi) / delta;
      return (1.0 - w) * f.lift({x, y_hi}).x + w * (x + rot.upper);
    }
    const double w = (y_lo - y) / delta;
    return (1.0 - w) * f.lift({x, y_lo}).x + w * (x + rot.lower);
  };
  auto lift = [f, collar_x, y_lo, y_hi](LiftPoint p) {
    if (p.y > y_lo && p.y < y_hi) return f.lift(p);
    return LiftPoint{collar_x(p.x, p.y), p.y};
  };
  auto inverse = [f, collar_x, y_lo, y_hi](LiftPoint q) {
    if (q.y > y_lo && q.y < y_hi) return f.inverse_lift(q);
    double lo = q.x - 1.0;
    double hi = q.x + 1.0;
    while (collar_x(lo, q.y) > q.x) lo -= 1.0;
    while (collar_x(hi, q.y) < q.x) hi += 1.0;
    return LiftPoint{solve_increasing([&](double x) { return collar_x(x, q.y); }, q.x, lo, hi),
                     q.y};
  };
  Params params = f.params();
  params["collar"] = delta;
  params["alpha"] = rot.lower;
  params["beta"] = rot.upper;
  return AnnulusMap(f.name() + "+collar", std::move(params), y_lo - delta, y_hi + delta, lift,
                    inverse);
}

inline AnnulusMap collar_extend(const AnnulusMap& f, double delta,
                                long rotation_iterations = 100000) {
  const BoundaryRotation rot{rotation_number(f, Boundary::Lower, rotation_iterations).value,
                             rotation_number(f, Boundary::Upper, rotation_iterations).value};
  return collar_extend(f, delta, rot);
}

}  // namespace annulus
