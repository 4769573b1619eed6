#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "annulus_fixpoint/linkage.hpp"

using namespace annulus;

namespace {

struct Analysis {
  BoxCover cover;
  TransitionGraph graph;
  ConleyDecomposition d;
};

Analysis analyze(const AnnulusMap& f, int nx = 64, int ny = 16) {
  const auto cover = build_cover(nx, ny, f.y_lo(), f.y_hi());
  auto g = build_transition_graph(f, cover);
  auto d = decompose(g);
  return {cover, std::move(g), std::move(d)};
}

AnnulusMap wavy_boundary_shear() {
  return shear_map(
      "wavy", [](double) { return 0.4; },
      [](double x) { return 0.3 + 0.1 * std::sin(kTwoPi * x); });
}

}  // namespace

TEST(BoundaryLinkage, PureTwistIsLinked) {
  const auto a = analyze(pure_twist());
  const auto v = boundary_linkage(a.d, a.cover, pure_twist());
  EXPECT_TRUE(v.linked);
  ASSERT_TRUE(v.component.has_value());
  EXPECT_FALSE(v.witness.has_value());
  EXPECT_EQ(a.d.class_of(a.cover.index(0, 0)), *v.component);
  EXPECT_EQ(a.d.class_of(a.cover.index(0, 15)), *v.component);
}

TEST(BoundaryLinkage, PerturbedTwistIsLinked) {
  const auto f = perturbed_twist(0.05);
  const auto a = analyze(f);
  EXPECT_TRUE(boundary_linkage(a.d, a.cover, f).linked);
}

TEST(BoundaryLinkage, DriftTwistYieldsVerifiedSeparatingCurve) {
  const auto f = drift_twist(0.1);
  const auto a = analyze(f);
  const auto v = boundary_linkage(a.d, a.cover, f);
  ASSERT_FALSE(v.linked);
  ASSERT_TRUE(v.witness.has_value());
  const auto& w = *v.witness;
  EXPECT_GE(w.min_distance, 0.01);
  EXPECT_TRUE(w.sublevel_above);  // the upper boundary has the smaller value

  // Level lies strictly between the two boundary class values.
  const double top = a.d.lyapunov[a.cover.index(0, 15)];
  const double bottom = a.d.lyapunov[a.cover.index(0, 0)];
  EXPECT_LT(top, w.level);
  EXPECT_LT(w.level, bottom);

  // Independent recheck: dense point clouds of the curve and of its image.
  const auto dense = w.curve.refined(4);
  std::vector<LiftPoint> pts, img;
  for (int k = -dense.size(); k < 2 * dense.size(); ++k) pts.push_back(dense.vertex(k));
  for (int k = 0; k < dense.size(); ++k) img.push_back(f.lift(dense.vertex(k)));
  double m = std::numeric_limits<double>::infinity();
  for (const auto& q : img) {
    for (const auto& p : pts) m = std::min(m, norm(p - q));
  }
  EXPECT_GE(m, w.min_distance - dense.max_spacing());
  EXPECT_GT(m, 0.01);
  EXPECT_FALSE(intersects_image(f, dense, dense.max_spacing()).intersects);
}

TEST(BoundaryLinkage, ExtractionRejectsLinkedBoundaries) {
  const auto a = analyze(pure_twist(), 16, 8);
  EXPECT_THROW(extract_separating_curve(a.d, a.cover, pure_twist()), InvalidArgument);
}

TEST(BoundaryLinkage, BoundaryRowWithoutRecurrenceIsAnError) {
  const auto cover = build_cover(4, 2);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i) {
    edges.emplace_back(cover.index(i, 0), cover.index(i, 1));
    edges.emplace_back(cover.index(i, 1), cover.index(i, 1));
  }
  const auto d = decompose(Digraph(cover.size(), edges));
  EXPECT_THROW(boundary_linkage(d, cover, pure_twist()), Error);
}

TEST(BoundaryLinkage, UnverifiableBandIsInconclusive) {
  // Every box its own class; every horizontal band meets its image under the
  // pure twist, so no level can be certified.
  const auto cover = build_cover(8, 4);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < cover.size(); ++u) edges.emplace_back(u, u);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j + 1 < 4; ++j) edges.emplace_back(cover.index(i, j), cover.index(i, j + 1));
  }
  const auto d = decompose(Digraph(cover.size(), edges));
  EXPECT_THROW(boundary_linkage(d, cover, pure_twist()), InconclusiveError);
}

TEST(RotationNumber, PureTwistBoundariesAreExact) {
  const auto f = pure_twist();
  const auto up = rotation_number(f, Boundary::Upper, 1000000);
  const auto lo = rotation_number(f, Boundary::Lower, 1000000);
  EXPECT_NEAR(up.value, 0.5, 1e-6);
  EXPECT_NEAR(lo.value, -0.5, 1e-6);
  EXPECT_EQ(up.error_bound, 1e-6);
}

TEST(RotationNumber, RigidRotationsWithinOneOverN) {
  const long n = 1000000;
  for (double alpha : {0.5, -0.5, 1.0 / 3.0, 0.618034}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = rotation_number(rigid_rotation(alpha), Boundary::Upper, n);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LE(std::abs(r.value - alpha), 1.0 / n) << alpha;
    EXPECT_LT(secs, 1.0);
  }
}

TEST(RotationNumber, WavyCircleMapIsStable) {
  const auto f = wavy_boundary_shear();
  const double a = rotation_number(f, Boundary::Upper, 100000).value;
  const double b = rotation_number(f, Boundary::Upper, 1000000).value;
  // Displacement lies in [0.2, 0.4], so does the rotation number.
  EXPECT_GE(b, 0.2);
  EXPECT_LE(b, 0.4);
  EXPECT_LT(std::abs(a - b), 1e-3);
  EXPECT_THROW(rotation_number(f, Boundary::Upper, 10), InvalidArgument);
}

TEST(Collar, PureTwistCollarsRotateRigidly) {
  const auto g = collar_extend(pure_twist(), 0.1);
  EXPECT_DOUBLE_EQ(g.y_lo(), -0.1);
  EXPECT_DOUBLE_EQ(g.y_hi(), 1.1);
  for (double x : {0.0, 0.3, 0.77}) {
    EXPECT_NEAR(g.lift({x, 1.1}).x, x + 0.5, 1e-12);
    EXPECT_NEAR(g.lift({x, 1.05}).x - x, 0.5, 1e-12);
    EXPECT_NEAR(g.lift({x, -0.1}).x, x - 0.5, 1e-12);
  }
}

TEST(Collar, PerturbedTwistExtensionKeepsInvariants) {
  const auto f = perturbed_twist(0.05);
  const auto g = collar_extend(f, 0.1);
  const auto diag = check_map(g);
  EXPECT_TRUE(diag.ok());
  EXPECT_TRUE(diag.rigid_boundaries());
  for (int j = 1; j < 100; ++j) {
    for (int i = 0; i < 50; ++i) {
      const LiftPoint p{i / 50.0, j / 100.0};
      EXPECT_EQ(g.lift(p).x, f.lift(p).x);
      EXPECT_EQ(g.lift(p).y, f.lift(p).y);
    }
  }
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 40; ++j) {
    for (int i = 0; i < 64; ++i) {
      const double x = i / 64.0;
      const double t = j / 40.0;
      for (double y : {1.0 + 0.1 * t, -0.1 * t}) {
        m = std::min(m, norm(g.lift({x, y}) - LiftPoint{x, y}));
      }
    }
  }
  EXPECT_GT(m, 0.4);
}

TEST(Collar, NonRigidBoundariesBecomeRigid) {
  const auto f = wavy_boundary_shear();
  EXPECT_FALSE(check_map(f).rigid_boundaries());
  const auto g = collar_extend(f, 0.2, 200000);
  const auto d = check_map(g);
  EXPECT_TRUE(d.twist());
  EXPECT_TRUE(d.rigid_boundaries(1e-12));
  EXPECT_LE(d.inverse_error, 1e-9);
  EXPECT_NEAR(g.params().at("alpha"), -0.4, 1e-9);
}

TEST(Collar, RejectsBadWidth) {
  EXPECT_THROW(collar_extend(pure_twist(), 0.0), InvalidArgument);
  EXPECT_THROW(collar_extend(pure_twist(), 0.6), InvalidArgument);
}

TEST(Collar, IntersectionPropertySurvivesExtension) {
  const auto g = collar_extend(perturbed_twist(0.05), 0.1);
  const EssentialCurve inside = EssentialCurve::cosine_graph(0.5, 0.2, 512);
  const EssentialCurve in_collar = EssentialCurve::horizontal(1.05, 512);
  const EssentialCurve straddling = EssentialCurve::cosine_graph(1.0, 0.08, 512);
  const EssentialCurve lower = EssentialCurve::cosine_graph(0.0, 0.08, 512);
  for (const auto* c : {&inside, &in_collar, &straddling, &lower}) {
    EXPECT_TRUE(intersects_image(g, *c, c->max_spacing()).intersects);
  }
}
