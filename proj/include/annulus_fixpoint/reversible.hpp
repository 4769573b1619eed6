// Reversible maps f^-1 = R f R: residual checks, symmetry of the recurrent
// set, and the intersection property on R-symmetric curves.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/conley.hpp"
#include "annulus_fixpoint/core.hpp"

namespace annulus {

struct ReversibilityCheck {
  bool pass = false;
  double residual = 0.0;  // max cylinder distance between R f R (p) and f^-1 (p)
};

inline ReversibilityCheck check_reversibility(const AnnulusMap& f, const Involution& R,
                                              int grid = 64, double tol = 1e-12) {
  if (grid < 2) throw InvalidArgument("check_reversibility: grid must be >= 2");
  ReversibilityCheck c;
  const double h = f.y_hi() - f.y_lo();
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const AnnulusPoint p{(i + 0.5) / grid, f.y_lo() + h * j / (grid - 1)};
      const AnnulusPoint lhs = R(evaluate(f, R(p)));
      const AnnulusPoint rhs = evaluate_inverse(f, p);
      c.residual = std::max(c.residual, cylinder_distance(lhs, rhs));
    }
  }
  c.pass = c.residual <= tol;
  return c;
}

struct SymmetryCheck {
  bool pass = false;
  /// Recurrent boxes whose reflected box is not recurrent, counted both ways.
  int symmetric_difference = 0;
  /// Of those, boxes with no recurrent box in the one-box ring around the
  /// reflected box.
  int unexplained = 0;
};

/// Pushes each recurrent box center through R, snaps it to a box and compares
/// with the recurrent set, allowing a one-box ring of slack.
inline SymmetryCheck check_recurrent_symmetry(const ConleyDecomposition& d, const Involution& R,
                                              const BoxCover& cover) {
  std::vector<char> rec(cover.size(), 0);
  for (int u : d.recurrent) rec[u] = 1;
  SymmetryCheck s;
  for (int u : d.recurrent) {
    const LiftPoint c = cover.box(u).center();
    const int v = cover.locate(R(project(c)));
    if (rec[v]) continue;
    ++s.symmetric_difference;
    bool near = false;
    for (int di = -1; di <= 1 && !near; ++di) {
      for (int dj = -1; dj <= 1 && !near; ++dj) {
        const int j = cover.row(v) + dj;
        if (j < 0 || j >= cover.ny()) continue;
        const int i = static_cast<int>(positive_mod(cover.column(v) + di, cover.nx()));
        near = rec[cover.index(i, j)] != 0;
      }
    }
    if (!near) ++s.unexplained;
  }
  s.pass = s.unexplained == 0;
  return s;
}

struct CurveVerdict {
  bool symmetric = false;
  bool intersects = false;
  double symmetry_error = 0.0;
  double min_distance = 0.0;
  AnnulusPoint witness;
  std::string message;
};

namespace detail {

// Distance on the cylinder from p to the closed polyline of `curve`.
inline double distance_to_curve(const EssentialCurve& curve, AnnulusPoint p) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < curve.size(); ++k) {
    const LiftPoint a = curve.vertex(k);
    const LiftPoint b = curve.vertex(k + 1);
    for (int s = -2; s <= 2; ++s) {
      const LiftPoint q{p.x + s, p.y};
      best = std::min(best, norm(q - closest_on_segment(q, a, b)));
    }
  }
  return best;
}

}  // namespace detail

/// Per-curve verdicts. A curve counts as R-symmetric when every reflected
/// vertex lies within `symmetry_tol` of the curve; other curves are rejected.
inline std::vector<CurveVerdict> check_symmetric_curve_intersection(
    const AnnulusMap& f, const Involution& R, const std::vector<EssentialCurve>& curves,
    double symmetry_tol = 1e-9) {
  std::vector<CurveVerdict> out;
  for (const auto& curve : curves) {
    CurveVerdict v;
    for (const auto& p : curve.vertices()) {
      v.symmetry_error = std::max(v.symmetry_error, detail::distance_to_curve(curve, R(project(p))));
    }
    v.symmetric = v.symmetry_error <= symmetry_tol;
    if (!v.symmetric) {
      v.message = "rejected: curve is not R-symmetric";
      out.push_back(v);
      continue;
    }
    const auto r = intersects_image(f, curve, curve.max_spacing());
    v.intersects = r.intersects;
    v.min_distance = r.min_distance;
    v.witness = r.witness;
    v.message = r.intersects ? "intersects" : "misses its image (resolution anomaly if reversible)";
    out.push_back(v);
  }
  return out;
}

/// Horizontal circles y = 0.25, 0.5, 0.75 and five graphs y = c + a cos(2 pi x);
/// all are symmetric under (x, y) -> (-x, y).
inline std::vector<EssentialCurve> standard_symmetric_curves(int resolution = 256) {
  std::vector<EssentialCurve> out;
  for (double c : {0.25, 0.5, 0.75}) out.push_back(EssentialCurve::horizontal(c, resolution));
  const double graphs[5][2] = {{0.5, 0.1}, {0.5, -0.2}, {0.3, 0.1}, {0.7, 0.15}, {0.4, 0.25}};
  for (const auto& g : graphs) out.push_back(EssentialCurve::cosine_graph(g[0], g[1], resolution));
  return out;
}

/// The identity of S^1 x [0, 1].
inline AnnulusMap identity_map() {
  return AnnulusMap(
      "identity", {}, 0.0, 1.0, [](LiftPoint p) { return p; }, [](LiftPoint p) { return p; });
}

/// A reversible twist map A K A with A(x, y) = (x + (y - 1/2) / 2, y) and
/// K = G R G^-1 R, G(x, y) = (x, y + eta sin(2 pi x) y (1 - y)). In closed form
/// K(x, y) = (x, u + eta s u (1 - u)) where u - eta s u (1 - u) = y, s = sin(2 pi x).
/// The inverse is evaluated independently as A^-1 K^-1 A^-1.
inline AnnulusMap kicked_twist(double eta) {
  if (!std::isfinite(eta) || std::abs(eta) > 0.5) throw InvalidArgument("kicked_twist: |eta| <= 0.5");
  auto half = [](LiftPoint p, double sign) { return LiftPoint{p.x + sign * 0.5 * (p.y - 0.5), p.y}; };
  auto bump = [eta](double x, double y, double sign) {
    // Solves u + sign * eta * s * u (1 - u) = y for u.
    const double s = sign * eta * std::sin(kTwoPi * x);
    return solve_increasing([s](double u) { return u + s * u * (1.0 - u); }, y, 0.0, 1.0);
  };
  auto lift = [=](LiftPoint p) {
    const LiftPoint a = half(p, 1.0);
    const double s = eta * std::sin(kTwoPi * a.x);
    const double u = bump(a.x, a.y, -1.0);
    return half({a.x, u + s * u * (1.0 - u)}, 1.0);
  };
  auto inverse = [=](LiftPoint q) {
    const LiftPoint a = half(q, -1.0);
    const double s = eta * std::sin(kTwoPi * a.x);
    const double u = bump(a.x, a.y, 1.0);
    return half({a.x, u - s * u * (1.0 - u)}, -1.0);
  };
  return AnnulusMap("kicked_twist", {{"eta", eta}}, 0.0, 1.0, lift, inverse);
}

}  // namespace annulus
