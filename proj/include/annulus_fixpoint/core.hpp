// Annulus geometry, twist maps and their lifts, essential curves, involutions.
//
// Coordinates: the annulus is S^1 x [y_lo, y_hi] with the angle x measured in
// turns (x mod 1). Every map is represented by a lift to the strip R x [y_lo,
// y_hi] that commutes with the deck translation (x, y) -> (x + 1, y).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace annulus {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments outside a documented range.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A sampling or grid resolution is too coarse for the requested operation.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Returns x mod 1 in [0, 1).
inline double wrap_unit(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Floor division for a positive divisor.
inline long floor_div(long a, long b) {
  long q = a / b;
  return (a % b != 0 && a < 0) ? q - 1 : q;
}

inline long positive_mod(long a, long b) { return a - b * floor_div(a, b); }

struct LiftPoint {
  double x = 0.0;
  double y = 0.0;

  friend LiftPoint operator+(LiftPoint a, LiftPoint b) { return {a.x + b.x, a.y + b.y}; }
  friend LiftPoint operator-(LiftPoint a, LiftPoint b) { return {a.x - b.x, a.y - b.y}; }
  friend LiftPoint operator*(double s, LiftPoint a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const LiftPoint&, const LiftPoint&) = default;
};

struct AnnulusPoint {
  double x = 0.0;  // in [0, 1)
  double y = 0.0;

  friend bool operator==(const AnnulusPoint&, const AnnulusPoint&) = default;
};

inline double norm(LiftPoint v) { return std::hypot(v.x, v.y); }
inline double dot(LiftPoint a, LiftPoint b) { return a.x * b.x + a.y * b.y; }
inline double cross(LiftPoint a, LiftPoint b) { return a.x * b.y - a.y * b.x; }

inline AnnulusPoint project(LiftPoint p) { return {wrap_unit(p.x), p.y}; }
inline LiftPoint to_lift(AnnulusPoint p) { return {p.x, p.y}; }

/// Distance on the cylinder (x periodic with period 1).
inline double cylinder_distance(AnnulusPoint a, AnnulusPoint b) {
  double dx = std::abs(a.x - b.x);
  dx = std::min(dx, 1.0 - dx);
  return std::hypot(dx, a.y - b.y);
}

using PlaneMap = std::function<LiftPoint(LiftPoint)>;
using Params = std::map<std::string, double>;

/// Solves f(t) = target for an increasing f on [lo, hi] by bisection.
/// The target is clamped to [f(lo), f(hi)].
template <class F>
double solve_increasing(F&& f, double target, double lo, double hi) {
  if (target <= f(lo)) return lo;
  if (target >= f(hi)) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Inverts a lift numerically by Newton iteration with finite-difference
/// Jacobians, starting from the first-order guess q - (lift(q) - q).
inline LiftPoint newton_inverse(const PlaneMap& lift, LiftPoint q, double y_lo, double y_hi) {
  auto clamp_y = [&](LiftPoint p) { return LiftPoint{p.x, std::clamp(p.y, y_lo, y_hi)}; };
  LiftPoint p = clamp_y(q - (lift(clamp_y(q)) - q));
  constexpr double h = 1e-7;
  for (int it = 0; it < 60; ++it) {
    const LiftPoint r = lift(p) - q;
    if (norm(r) < 1e-14) break;
    // One-sided differences keep the probes inside [y_lo, y_hi].
    const double hy = (p.y + h <= y_hi) ? h : -h;
    const LiftPoint fx = (1.0 / h) * (lift({p.x + h, p.y}) - lift(p));
    const LiftPoint fy = (1.0 / hy) * (lift({p.x, p.y + hy}) - lift(p));
    const double det = fx.x * fy.y - fy.x * fx.y;
    if (std::abs(det) < 1e-300) break;
    LiftPoint step{(fy.y * r.x - fy.x * r.y) / det, (-fx.y * r.x + fx.x * r.y) / det};
    double damping = 1.0;
    LiftPoint next = clamp_y(p - step);
    while (damping > 1e-6 && norm(lift(next) - q) > norm(r)) {
      damping *= 0.5;
      next = clamp_y(p - damping * step);
    }
    p = next;
  }
  return p;
}

/// A homeomorphism of the annulus S^1 x [y_lo, y_hi], given by a lift to the
/// strip and the inverse of that lift. Immutable after construction.
class AnnulusMap {
 public:
  AnnulusMap(std::string name, Params params, double y_lo, double y_hi, PlaneMap lift,
             PlaneMap inverse)
      : name_(std::move(name)),
        params_(std::move(params)),
        y_lo_(y_lo),
        y_hi_(y_hi),
        lift_(std::move(lift)),
        inverse_(std::move(inverse)) {
    if (!(y_hi_ > y_lo_)) throw InvalidArgument("annulus map: empty y-range");
  }

  const std::string& name() const { return name_; }
  const Params& params() const { return params_; }
  double y_lo() const { return y_lo_; }
  double y_hi() const { return y_hi_; }

  LiftPoint lift(LiftPoint p) const { return lift_(p); }
  LiftPoint inverse_lift(LiftPoint p) const { return inverse_(p); }
  const PlaneMap& lift_fn() const { return lift_; }

  /// Leftward displacement of the lower boundary: lift(x, y_lo) = (x - r0(x), y_lo).
  double r0(double x) const { return x - lift_({x, y_lo_}).x; }
  /// Rightward displacement of the upper boundary: lift(x, y_hi) = (x + r1(x), y_hi).
  double r1(double x) const { return lift_({x, y_hi_}).x - x; }

 private:
  std::string name_;
  Params params_;
  double y_lo_;
  double y_hi_;
  PlaneMap lift_;
  PlaneMap inverse_;
};

inline AnnulusPoint evaluate(const AnnulusMap& f, AnnulusPoint p) {
  return project(f.lift(to_lift(p)));
}

inline AnnulusPoint evaluate_inverse(const AnnulusMap& f, AnnulusPoint p) {
  return project(f.inverse_lift(to_lift(p)));
}

// ---------------------------------------------------------------------------
// Catalog

/// Largest |eps| for which the perturbed and drift twists stay homeomorphisms.
inline constexpr double kMaxCatalogEps = 0.5;

inline double param_or(const Params& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

inline void check_catalog_eps(double eps) {
  if (!std::isfinite(eps) || std::abs(eps) > kMaxCatalogEps) {
    throw InvalidArgument("eps must satisfy |eps| <= 0.5 (got " + std::to_string(eps) + ")");
  }
}

/// f(x, y) = (x + y - 1/2, y).
inline AnnulusMap pure_twist() {
  return AnnulusMap(
      "pure_twist", {}, 0.0, 1.0, [](LiftPoint p) { return LiftPoint{p.x + p.y - 0.5, p.y}; },
      [](LiftPoint p) { return LiftPoint{p.x - p.y + 0.5, p.y}; });
}

/// f(x, y) = (x', y + eps sin(2 pi x') y (1 - y)) with x' = x + y - 1/2.
inline AnnulusMap perturbed_twist(double eps) {
  check_catalog_eps(eps);
  auto lift = [eps](LiftPoint p) {
    const double xp = p.x + p.y - 0.5;
    return LiftPoint{xp, p.y + eps * std::sin(kTwoPi * xp) * p.y * (1.0 - p.y)};
  };
  // The output x is x' itself, so y solves a monotone scalar equation.
  auto inverse = [eps](LiftPoint q) {
    const double s = eps * std::sin(kTwoPi * q.x);
    const double y =
        solve_increasing([s](double y) { return y + s * y * (1.0 - y); }, q.y, 0.0, 1.0);
    return LiftPoint{q.x - y + 0.5, y};
  };
  return AnnulusMap("perturbed_twist", {{"eps", eps}}, 0.0, 1.0, lift, inverse);
}

/// f(x, y) = (x + y - 1/2, y + eps y (1 - y)).
inline AnnulusMap drift_twist(double eps) {
  check_catalog_eps(eps);
  auto lift = [eps](LiftPoint p) {
    return LiftPoint{p.x + p.y - 0.5, p.y + eps * p.y * (1.0 - p.y)};
  };
  auto inverse = [eps](LiftPoint q) {
    const double y =
        solve_increasing([eps](double y) { return y + eps * y * (1.0 - y); }, q.y, 0.0, 1.0);
    return LiftPoint{q.x - y + 0.5, y};
  };
  return AnnulusMap("drift_twist", {{"eps", eps}}, 0.0, 1.0, lift, inverse);
}

/// A y-preserving shear interpolating linearly between the boundary motions:
/// f(x, y) = (x + (1 - t) * (-r0(x)) + t * r1(x), y), t = (y - y_lo) / (y_hi - y_lo).
/// Useful for maps with prescribed, non-constant boundary profiles.
inline AnnulusMap shear_map(std::string name, std::function<double(double)> r0,
                            std::function<double(double)> r1, double y_lo = 0.0,
                            double y_hi = 1.0) {
  auto displacement = [=](double x, double y) {
    const double t = (y - y_lo) / (y_hi - y_lo);
    return -(1.0 - t) * r0(x) + t * r1(x);
  };
  auto lift = [displacement](LiftPoint p) {
    return LiftPoint{p.x + displacement(p.x, p.y), p.y};
  };
  auto inverse = [displacement](LiftPoint q) {
    double lo = q.x - 1.0;
    double hi = q.x + 1.0;
    while (lo + displacement(lo, q.y) > q.x) lo -= 1.0;
    while (hi + displacement(hi, q.y) < q.x) hi += 1.0;
    const double x =
        solve_increasing([&](double x) { return x + displacement(x, q.y); }, q.x, lo, hi);
    return LiftPoint{x, q.y};
  };
  return AnnulusMap(std::move(name), {}, y_lo, y_hi, lift, inverse);
}

/// Lift samples on a uniform grid: x_i = i / nx (i < nx), y_j = y_lo + j (y_hi - y_lo) / (ny - 1).
/// values[j * nx + i] is the lift of (x_i, y_j).
struct SampleGrid {
  int nx = 0;
  int ny = 0;
  double y_lo = 0.0;
  double y_hi = 1.0;
  std::vector<LiftPoint> values;

  double x_at(int i) const { return static_cast<double>(i) / nx; }
  double y_at(int j) const { return y_lo + (y_hi - y_lo) * j / (ny - 1); }
  LiftPoint at(int i, int j) const { return values[static_cast<size_t>(j) * nx + i]; }
};

namespace detail {

// Image of grid node (i, j) for i in [0, nx], with the periodic copy at i = nx.
inline LiftPoint grid_image(const SampleGrid& g, int i, int j) {
  if (i == g.nx) return g.at(0, j) + LiftPoint{1.0, 0.0};
  return g.at(i, j);
}

inline void validate_sample_grid(const SampleGrid& g) {
  if (g.nx < 2 || g.ny < 2) throw InvalidArgument("custom_sampled: grid needs nx >= 2, ny >= 2");
  if (g.values.size() != static_cast<size_t>(g.nx) * g.ny) {
    throw InvalidArgument("custom_sampled: sample count does not match nx * ny");
  }
  for (int i = 0; i < g.nx; ++i) {
    if (std::abs(g.at(i, 0).y - g.y_lo) > 1e-12 || std::abs(g.at(i, g.ny - 1).y - g.y_hi) > 1e-12) {
      throw InvalidArgument("custom_sampled: boundary rows must map into themselves");
    }
  }
  // Each bilinear cell must map to a convex, positively oriented quadrilateral;
  // this is equivalent to a positive Jacobian at all four cell corners.
  for (int j = 0; j + 1 < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const LiftPoint q[4] = {grid_image(g, i, j), grid_image(g, i + 1, j),
                              grid_image(g, i + 1, j + 1), grid_image(g, i, j + 1)};
      for (int c = 0; c < 4; ++c) {
        const LiftPoint a = q[(c + 1) % 4] - q[c];
        const LiftPoint b = q[(c + 3) % 4] - q[c];
        if (!(cross(a, b) > 0.0)) {
          throw InvalidArgument("custom_sampled: non-monotone samples in cell (" +
                                std::to_string(i) + ", " + std::to_string(j) + ")");
        }
      }
    }
  }
}

}  // namespace detail

/// Builds a map by bilinear interpolation of lift samples. The displacement
/// lift(p) - p is interpolated periodically in x, so equivariance is exact.
inline AnnulusMap custom_sampled(SampleGrid grid, std::string name = "custom_sampled") {
  detail::validate_sample_grid(grid);
  auto g = std::make_shared<const SampleGrid>(std::move(grid));
  auto lift = [g](LiftPoint p) {
    const double u = wrap_unit(p.x) * g->nx;
    const int i = std::min(static_cast<int>(u), g->nx - 1);
    const double s = u - i;
    const double v = std::clamp((p.y - g->y_lo) / (g->y_hi - g->y_lo) * (g->ny - 1), 0.0,
                                static_cast<double>(g->ny - 1));
    const int j = std::min(static_cast<int>(v), g->ny - 2);
    const double t = v - j;
    auto disp = [&](int ii, int jj) {
      const LiftPoint img = detail::grid_image(*g, ii, jj);
      return LiftPoint{img.x - static_cast<double>(ii) / g->nx, img.y};
    };
    const LiftPoint d = (1 - s) * (1 - t) * disp(i, j) + s * (1 - t) * disp(i + 1, j) +
                        (1 - s) * t * disp(i, j + 1) + s * t * disp(i + 1, j + 1);
    return LiftPoint{p.x + d.x, d.y};
  };
  const double y_lo = g->y_lo;
  const double y_hi = g->y_hi;
  auto inverse = [lift, y_lo, y_hi](LiftPoint q) { return newton_inverse(lift, q, y_lo, y_hi); };
  return AnnulusMap(std::move(name), {{"nx", g->nx}, {"ny", g->ny}}, y_lo, y_hi, lift, inverse);
}

/// Samples an existing map onto a grid (handy for building custom_sampled inputs).
inline SampleGrid sample_map(const AnnulusMap& f, int nx, int ny) {
  SampleGrid g{nx, ny, f.y_lo(), f.y_hi(), {}};
  g.values.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) g.values.push_back(f.lift({g.x_at(i), g.y_at(j)}));
  }
  return g;
}

/// Reads a lift-sample CSV with header `x,y,fx,fy`, rows in row-major order
/// (y outer, x inner).
inline SampleGrid read_sample_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("sample csv: empty input");
  line.erase(std::remove_if(line.begin(), line.end(), ::isspace), line.end());
  if (line != "x,y,fx,fy") throw InvalidArgument("sample csv: header must be x,y,fx,fy");
  std::vector<std::array<double, 4>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::array<double, 4> r{};
    if (!(ss >> r[0] >> r[1] >> r[2] >> r[3])) {
      throw InvalidArgument("sample csv: malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw InvalidArgument("sample csv: no samples");
  int nx = 0;
  while (nx < static_cast<int>(rows.size()) && rows[nx][1] == rows[0][1]) ++nx;
  if (nx < 2 || rows.size() % nx != 0) throw InvalidArgument("sample csv: rows are not a grid");
  SampleGrid g;
  g.nx = nx;
  g.ny = static_cast<int>(rows.size() / nx);
  g.y_lo = rows.front()[1];
  g.y_hi = rows.back()[1];
  if (g.ny < 2) throw InvalidArgument("sample csv: need at least two y rows");
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto& r = rows[static_cast<size_t>(j) * nx + i];
      if (std::abs(r[0] - g.x_at(i)) > 1e-9 || std::abs(r[1] - g.y_at(j)) > 1e-9) {
        throw InvalidArgument("sample csv: expected uniform grid with x = i/nx in row-major order");
      }
      g.values.push_back({r[2], r[3]});
    }
  }
  return g;
}

inline void write_sample_csv(std::ostream& out, const SampleGrid& g) {
  out << "x,y,fx,fy\n";
  out.precision(17);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out << g.x_at(i) << ',' << g.y_at(j) << ',' << g.at(i, j).x << ',' << g.at(i, j).y << '\n';
    }
  }
}

/// f(x, y) = (x + alpha, y). No twist; used to exercise rotation numbers.
inline AnnulusMap rigid_rotation(double alpha) {
  return AnnulusMap(
      "rigid_rotation", {{"alpha", alpha}}, 0.0, 1.0,
      [alpha](LiftPoint p) { return LiftPoint{p.x + alpha, p.y}; },
      [alpha](LiftPoint p) { return LiftPoint{p.x - alpha, p.y}; });
}

/// Builds a catalog map by name. custom_sampled needs `grid`.
inline AnnulusMap catalog_map(const std::string& name, const Params& params,
                              const SampleGrid* grid = nullptr) {
  if (name == "pure_twist") return pure_twist();
  if (name == "perturbed_twist") return perturbed_twist(param_or(params, "eps", 0.05));
  if (name == "drift_twist") return drift_twist(param_or(params, "eps", 0.1));
  if (name == "rigid_rotation") return rigid_rotation(param_or(params, "alpha", 0.25));
  if (name == "custom_sampled") {
    if (grid == nullptr) throw InvalidArgument("custom_sampled requires a sample grid");
    return custom_sampled(*grid);
  }
  throw InvalidArgument("unknown map '" + name + "'");
}

// ---------------------------------------------------------------------------
// Invariant checks

struct MapDiagnostics {
  double equivariance_error = 0.0;
  double boundary_error = 0.0;
  double inverse_error = 0.0;
  double min_r0 = std::numeric_limits<double>::infinity();
  double min_r1 = std::numeric_limits<double>::infinity();
  double max_r0 = 0.0;
  double max_r1 = 0.0;

  bool twist() const { return min_r0 > 0.0 && min_r1 > 0.0; }
  bool ok(double equivariance_tol = 1e-12, double inverse_tol = 1e-9) const {
    return equivariance_error <= equivariance_tol && boundary_error <= equivariance_tol &&
           inverse_error <= inverse_tol && twist();
  }
  /// Boundary profiles constant up to tol (rigid rotations on both boundaries).
  bool rigid_boundaries(double tol = 1e-12) const {
    return max_r0 - min_r0 <= tol && max_r1 - min_r1 <= tol;
  }
};

inline MapDiagnostics check_map(const AnnulusMap& f, int grid = 64, int boundary_samples = 256) {
  MapDiagnostics d;
  const double h = f.y_hi() - f.y_lo();
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const LiftPoint p{(i + 0.5) / grid, f.y_lo() + h * j / (grid - 1)};
      const LiftPoint img = f.lift(p);
      const LiftPoint shifted = f.lift({p.x + 1.0, p.y});
      d.equivariance_error =
          std::max(d.equivariance_error, norm(shifted - img - LiftPoint{1.0, 0.0}));
      d.inverse_error = std::max(d.inverse_error, norm(f.inverse_lift(img) - p));
      d.inverse_error = std::max(d.inverse_error, norm(f.lift(f.inverse_lift(p)) - p));
    }
  }
  for (int i = 0; i < boundary_samples; ++i) {
    const double x = static_cast<double>(i) / boundary_samples;
    d.boundary_error = std::max(d.boundary_error, std::abs(f.lift({x, f.y_lo()}).y - f.y_lo()));
    d.boundary_error = std::max(d.boundary_error, std::abs(f.lift({x, f.y_hi()}).y - f.y_hi()));
    const double r0 = f.r0(x);
    const double r1 = f.r1(x);
    d.min_r0 = std::min(d.min_r0, r0);
    d.max_r0 = std::max(d.max_r0, r0);
    d.min_r1 = std::min(d.min_r1, r1);
    d.max_r1 = std::max(d.max_r1, r1);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Curves

namespace detail {

struct SegmentContact {
  double distance = std::numeric_limits<double>::infinity();
  LiftPoint point;  // closest point on the first segment
};

inline LiftPoint closest_on_segment(LiftPoint p, LiftPoint a, LiftPoint b) {
  const LiftPoint ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

inline SegmentContact segment_contact(LiftPoint a0, LiftPoint a1, LiftPoint b0, LiftPoint b1) {
  const double d1 = cross(b1 - b0, a0 - b0);
  const double d2 = cross(b1 - b0, a1 - b0);
  const double d3 = cross(a1 - a0, b0 - a0);
  const double d4 = cross(a1 - a0, b1 - a0);
  if (((d1 < 0 && d2 > 0) || (d1 > 0 && d2 < 0)) && ((d3 < 0 && d4 > 0) || (d3 > 0 && d4 < 0))) {
    return {0.0, a0 + (d1 / (d1 - d2)) * (a1 - a0)};
  }
  SegmentContact best;
  auto consider = [&](double dist, LiftPoint on_a) {
    if (dist < best.distance) best = {dist, on_a};
  };
  consider(norm(a0 - closest_on_segment(a0, b0, b1)), a0);
  consider(norm(a1 - closest_on_segment(a1, b0, b1)), a1);
  {
    const LiftPoint c = closest_on_segment(b0, a0, a1);
    consider(norm(b0 - c), c);
  }
  {
    const LiftPoint c = closest_on_segment(b1, a0, a1);
    consider(norm(b1 - c), c);
  }
  return best;
}

inline double box_gap(LiftPoint a0, LiftPoint a1, LiftPoint b0, LiftPoint b1) {
  const double gx = std::max({0.0, std::min(b0.x, b1.x) - std::max(a0.x, a1.x),
                              std::min(a0.x, a1.x) - std::max(b0.x, b1.x)});
  const double gy = std::max({0.0, std::min(b0.y, b1.y) - std::max(a0.y, a1.y),
                              std::min(a0.y, a1.y) - std::max(b0.y, b1.y)});
  return std::hypot(gx, gy);
}

}  // namespace detail

/// A closed essential curve on the annulus, stored as one period of a lifted
/// polyline. The curve closes through vertex(size()) = vertex(0) + (1, 0), so
/// its x-lift advances by exactly one turn per period.
class EssentialCurve {
 public:
  /// Validates vertex count and simplicity.
  static EssentialCurve from_polyline(std::vector<LiftPoint> vertices) {
    EssentialCurve c(std::move(vertices));
    if (c.vertices_.size() < 3) throw InvalidArgument("essential curve needs >= 3 vertices");
    if (!c.is_simple()) throw InvalidArgument("essential curve self-intersects");
    return c;
  }

  /// Samples `param` at t = k / resolution, k < resolution. `param` must return
  /// lifted points with param(1) = param(0) + (1, 0).
  static EssentialCurve sample(const std::function<LiftPoint(double)>& param, int resolution) {
    if (resolution < 3) throw InvalidArgument("curve resolution must be >= 3");
    std::vector<LiftPoint> v;
    v.reserve(resolution);
    for (int k = 0; k < resolution; ++k) v.push_back(param(static_cast<double>(k) / resolution));
    return from_polyline(std::move(v));
  }

  static EssentialCurve horizontal(double y, int resolution) {
    return sample([y](double t) { return LiftPoint{t, y}; }, resolution);
  }

  /// Graph of y = c + a cos(2 pi x).
  static EssentialCurve cosine_graph(double c, double a, int resolution) {
    return sample([c, a](double t) { return LiftPoint{t, c + a * std::cos(kTwoPi * t)}; },
                  resolution);
  }

  int size() const { return static_cast<int>(vertices_.size()); }
  const std::vector<LiftPoint>& vertices() const { return vertices_; }

  /// Vertex k of the unrolled polyline, any integer k.
  LiftPoint vertex(long k) const {
    const long n = size();
    const long q = floor_div(k, n);
    const LiftPoint v = vertices_[static_cast<size_t>(k - q * n)];
    return {v.x + static_cast<double>(q), v.y};
  }

  double max_spacing() const {
    double m = 0.0;
    for (int k = 0; k < size(); ++k) m = std::max(m, norm(vertex(k + 1) - vertex(k)));
    return m;
  }

  /// Inserts `pieces - 1` evenly spaced vertices into every segment.
  EssentialCurve refined(int pieces) const {
    std::vector<LiftPoint> v;
    v.reserve(static_cast<size_t>(size()) * pieces);
    for (int k = 0; k < size(); ++k) {
      const LiftPoint a = vertex(k);
      const LiftPoint b = vertex(k + 1);
      for (int s = 0; s < pieces; ++s) v.push_back(a + (static_cast<double>(s) / pieces) * (b - a));
    }
    return EssentialCurve(std::move(v));
  }

  std::pair<double, double> x_extent() const {
    double lo = vertices_[0].x;
    double hi = lo;
    for (const auto& p : vertices_) {
      lo = std::min(lo, p.x);
      hi = std::max(hi, p.x);
    }
    return {lo, std::max(hi, vertices_[0].x + 1.0)};
  }

  bool is_simple() const {
    const int n = size();
    auto [lo, hi] = x_extent();
    const int reach = static_cast<int>(std::ceil(hi - lo)) + 1;
    for (int a = 0; a < n; ++a) {
      const LiftPoint a0 = vertex(a);
      const LiftPoint a1 = vertex(a + 1);
      for (int k = -reach; k <= reach; ++k) {
        for (int b = 0; b < n; ++b) {
          const long bb = static_cast<long>(b) + static_cast<long>(k) * n;
          // Skip the segment itself and the two segments sharing an endpoint.
          if (bb >= a - 1 && bb <= a + 1) continue;
          const LiftPoint b0 = vertex(bb);
          const LiftPoint b1 = vertex(bb + 1);
          if (detail::box_gap(a0, a1, b0, b1) > 0.0) continue;
          if (detail::segment_contact(a0, a1, b0, b1).distance == 0.0) return false;
        }
      }
    }
    return true;
  }

 private:
  explicit EssentialCurve(std::vector<LiftPoint> v) : vertices_(std::move(v)) {}
  std::vector<LiftPoint> vertices_;
};

struct CurveImageResult {
  bool intersects = false;
  AnnulusPoint witness;         // an (approximate) point of the curve meeting its image
  double min_distance = 0.0;    // 0 when intersecting
};

/// Contact distance below which two polylines are considered to meet.
inline constexpr double kContactTolerance = 1e-12;

/// Tests whether the polyline `curve` meets the polyline through the images of
/// its vertices. `tol` bounds the allowed vertex spacing of `curve`.
inline CurveImageResult intersects_image(const AnnulusMap& f, const EssentialCurve& curve,
                                         double tol) {
  if (curve.max_spacing() > tol) {
    throw ResolutionError("curve resolution too coarse: vertex spacing " +
                          std::to_string(curve.max_spacing()) + " exceeds " + std::to_string(tol));
  }
  const int n = curve.size();
  std::vector<LiftPoint> image(static_cast<size_t>(n) + 1);
  for (int k = 0; k < n; ++k) image[k] = f.lift(curve.vertex(k));
  image[n] = image[0] + LiftPoint{1.0, 0.0};

  double img_lo = image[0].x, img_hi = image[0].x;
  for (const auto& p : image) {
    img_lo = std::min(img_lo, p.x);
    img_hi = std::max(img_hi, p.x);
  }
  auto [cur_lo, cur_hi] = curve.x_extent();
  const long k_lo = static_cast<long>(std::floor(img_lo - cur_hi)) - 1;
  const long k_hi = static_cast<long>(std::ceil(img_hi - cur_lo)) + 1;

  detail::SegmentContact best;
  for (int a = 0; a < n; ++a) {
    const LiftPoint i0 = image[a];
    const LiftPoint i1 = image[a + 1];
    for (long k = k_lo; k <= k_hi; ++k) {
      for (int b = 0; b < n; ++b) {
        const long bb = static_cast<long>(b) + k * n;
        const LiftPoint c0 = curve.vertex(bb);
        const LiftPoint c1 = curve.vertex(bb + 1);
        if (detail::box_gap(c0, c1, i0, i1) >= best.distance) continue;
        const auto contact = detail::segment_contact(c0, c1, i0, i1);
        if (contact.distance < best.distance) best = contact;
      }
    }
  }
  CurveImageResult r;
  r.min_distance = best.distance;
  r.witness = project(best.point);
  r.intersects = best.distance <= kContactTolerance;
  if (r.intersects) r.min_distance = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Involutions

/// An involution R of the annulus (R o R = Id).
class Involution {
 public:
  using Fn = std::function<AnnulusPoint(AnnulusPoint)>;

  /// Verifies R(R(p)) = p on a grid x grid sample to `tol`.
  explicit Involution(Fn fn, std::string name = "involution", int grid = 64, double tol = 1e-12)
      : fn_(std::move(fn)), name_(std::move(name)) {
    for (int j = 0; j < grid; ++j) {
      for (int i = 0; i < grid; ++i) {
        const AnnulusPoint p{(i + 0.5) / grid, static_cast<double>(j) / (grid - 1)};
        if (cylinder_distance((*this)((*this)(p)), p) > tol) {
          throw InvalidArgument("involution check failed: R(R(p)) != p");
        }
      }
    }
  }

  /// R(x, y) = (-x, y).
  static Involution reflection() {
    return Involution([](AnnulusPoint p) { return AnnulusPoint{wrap_unit(-p.x), p.y}; },
                      "reflection");
  }

  AnnulusPoint operator()(AnnulusPoint p) const { return fn_(p); }
  const std::string& name() const { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

}  // namespace annulus
