#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "annulus_fixpoint/core.hpp"

using namespace annulus;

namespace {

// Sign changes of g on [0, 1), refined by bisection.
std::vector<double> roots_on_circle(const std::function<double(double)>& g, int scan) {
  std::vector<double> roots;
  for (int i = 0; i < scan; ++i) {
    double a = (i + 0.25) / scan;
    double b = (i + 1.25) / scan;
    double ga = g(a), gb = g(b);
    if ((ga < 0) == (gb < 0)) continue;
    for (int k = 0; k < 200; ++k) {
      const double m = 0.5 * (a + b);
      if ((g(m) < 0) == (ga < 0)) {
        a = m;
        ga = g(m);
      } else {
        b = m;
      }
    }
    roots.push_back(wrap_unit(0.5 * (a + b)));
  }
  return roots;
}

}  // namespace

TEST(Evaluate, PureTwistRotatesUpperBoundaryByHalf) {
  const auto p = evaluate(pure_twist(), {0.25, 1.0});
  EXPECT_NEAR(p.x, 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(p.y, 1.0);
}

TEST(Evaluate, PureTwistRotatesLowerBoundaryByMinusHalf) {
  const auto p = evaluate(pure_twist(), {0.9, 0.0});
  EXPECT_NEAR(p.x, 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
}

TEST(Evaluate, PerturbedTwistFixesOrigin) {
  const auto p = evaluate(perturbed_twist(0.05), {0.0, 0.5});
  EXPECT_NEAR(cylinder_distance(p, {0.0, 0.5}), 0.0, 1e-15);
}

TEST(Evaluate, InverseRoundTrip) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  for (const auto& f : {pure_twist(), perturbed_twist(0.05), drift_twist(0.1)}) {
    for (int k = 0; k < 200; ++k) {
      const AnnulusPoint p{ux(rng), ux(rng)};
      EXPECT_LT(cylinder_distance(evaluate_inverse(f, evaluate(f, p)), p), 1e-9) << f.name();
    }
  }
}

TEST(Catalog, PerturbedTwistHasExactlyTwoFixedPoints) {
  const auto f = perturbed_twist(0.05);
  // x' = x forces y = 1/2; the remaining condition is a scalar equation in x.
  for (int j = 0; j <= 100; ++j) {
    const double y = j / 100.0;
    if (j == 50) continue;
    EXPECT_NEAR(f.lift({0.3, y}).x - 0.3, y - 0.5, 1e-15);
  }
  auto gy = [&](double x) { return f.lift({x, 0.5}).y - 0.5; };
  const auto roots = roots_on_circle(gy, 1000);
  ASSERT_EQ(roots.size(), 2u);
  std::vector<double> sorted = roots;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_NEAR(std::min(sorted[0], 1.0 - sorted[1]), 0.0, 1e-12);
  bool has_half = std::abs(sorted[0] - 0.5) < 1e-12 || std::abs(sorted[1] - 0.5) < 1e-12;
  EXPECT_TRUE(has_half);
}

TEST(Catalog, DriftTwistDisplacementIsBoundedAwayFromZero) {
  const auto f = drift_twist(0.1);
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 400; ++j) {
    for (int i = 0; i < 64; ++i) {
      const LiftPoint p{i / 64.0, j / 400.0};
      m = std::min(m, norm(f.lift(p) - p));
    }
  }
  EXPECT_GE(m, 0.024);
  EXPECT_NEAR(m, 0.025, 1e-12);  // at y = 1/2
}

TEST(Catalog, BoundaryMotionsSatisfyTwist) {
  const auto d = check_map(pure_twist());
  EXPECT_TRUE(d.ok());
  EXPECT_NEAR(d.min_r0, 0.5, 1e-15);
  EXPECT_NEAR(d.min_r1, 0.5, 1e-15);
  EXPECT_TRUE(d.rigid_boundaries());
  for (const auto& f : {perturbed_twist(0.05), drift_twist(0.1), perturbed_twist(-0.5)}) {
    const auto g = check_map(f);
    EXPECT_TRUE(g.ok()) << f.name();
    EXPECT_LE(g.equivariance_error, 1e-12);
    EXPECT_LE(g.boundary_error, 1e-12);
    EXPECT_LE(g.inverse_error, 1e-9);
  }
}

TEST(Catalog, RejectsLargeEps) {
  EXPECT_THROW(perturbed_twist(0.6), InvalidArgument);
  EXPECT_THROW(drift_twist(-0.51), InvalidArgument);
  EXPECT_THROW(catalog_map("perturbed_twist", {{"eps", 2.0}}), InvalidArgument);
  EXPECT_THROW(catalog_map("no_such_map", {}), InvalidArgument);
  EXPECT_THROW(catalog_map("custom_sampled", {}), InvalidArgument);
}

TEST(Catalog, RigidRotationIsNotATwist) {
  const auto d = check_map(rigid_rotation(0.25));
  EXPECT_FALSE(d.twist());
  EXPECT_NEAR(d.min_r1, 0.25, 1e-15);
}

TEST(CustomSampled, ReproducesSampledMapAtNodes) {
  const auto f = perturbed_twist(0.05);
  const auto grid = sample_map(f, 64, 33);
  const auto g = custom_sampled(grid);
  for (int j = 0; j < 33; ++j) {
    for (int i = 0; i < 64; ++i) {
      const LiftPoint p{i / 64.0, j / 32.0};
      EXPECT_LT(norm(g.lift(p) - f.lift(p)), 1e-12);
    }
  }
  const auto d = check_map(g);
  EXPECT_LE(d.equivariance_error, 1e-12);
  EXPECT_LE(d.boundary_error, 1e-12);
  EXPECT_LE(d.inverse_error, 1e-9);
  EXPECT_TRUE(d.twist());
}

TEST(CustomSampled, CsvRoundTrip) {
  const auto grid = sample_map(drift_twist(0.1), 16, 9);
  std::stringstream s;
  write_sample_csv(s, grid);
  const auto back = read_sample_csv(s);
  const auto a = custom_sampled(grid);
  const auto b = custom_sampled(back);
  for (int k = 0; k < 50; ++k) {
    const LiftPoint p{k / 50.0, std::fmod(k * 0.37, 1.0)};
    EXPECT_EQ(a.lift(p).x, b.lift(p).x);
    EXPECT_EQ(a.lift(p).y, b.lift(p).y);
  }
}

TEST(CustomSampled, RejectsFoldedData) {
  auto grid = sample_map(pure_twist(), 8, 5);
  std::stringstream s;
  write_sample_csv(s, grid);
  // Swap two images in the middle row: the sampled map is no longer monotone.
  auto folded = read_sample_csv(s);
  std::swap(folded.values[2 * 8 + 3], folded.values[2 * 8 + 4]);
  EXPECT_THROW(custom_sampled(folded), InvalidArgument);
}

TEST(IntersectsImage, HorizontalCurveUnderPureTwist) {
  const auto c = EssentialCurve::horizontal(0.5, 256);
  const auto r = intersects_image(pure_twist(), c, 0.01);
  EXPECT_TRUE(r.intersects);
  EXPECT_EQ(r.min_distance, 0.0);
}

TEST(IntersectsImage, HorizontalCurveUnderDriftTwistIsDisjoint) {
  const auto c = EssentialCurve::horizontal(0.5, 256);
  const auto r = intersects_image(drift_twist(0.1), c, 0.01);
  EXPECT_FALSE(r.intersects);
  EXPECT_NEAR(r.min_distance, 0.025, 1e-12);
}

TEST(IntersectsImage, HorizontalCurveUnderPerturbedTwistMeetsNearFixedPoints) {
  const auto c = EssentialCurve::horizontal(0.5, 256);
  const auto r = intersects_image(perturbed_twist(0.05), c, 0.01);
  EXPECT_TRUE(r.intersects);
  const double x = r.witness.x;
  EXPECT_LT(std::min({x, 1.0 - x, std::abs(x - 0.5)}), 0.01);
}

TEST(IntersectsImage, CoarseCurveRaisesResolutionError) {
  const auto c = EssentialCurve::horizontal(0.5, 16);
  EXPECT_THROW(intersects_image(pure_twist(), c, 0.01), ResolutionError);
}

TEST(IntersectsImage, IntersectingStaysIntersectingUnderRefinement) {
  const auto f = perturbed_twist(0.05);
  for (double y : {0.3, 0.5, 0.7}) {
    for (double a : {0.0, 0.05, 0.1}) {
      const auto c = EssentialCurve::cosine_graph(y, a, 64);
      const auto fine = c.refined(2);
      const double tol = c.max_spacing();
      if (intersects_image(f, c, tol).intersects) {
        EXPECT_TRUE(intersects_image(f, fine, tol).intersects) << y << " " << a;
      }
    }
  }
}

TEST(EssentialCurve, RejectsSelfIntersection) {
  std::vector<LiftPoint> v = {{0.0, 0.2}, {0.6, 0.8}, {0.3, 0.8}, {0.5, 0.2}};
  EXPECT_THROW(EssentialCurve::from_polyline(v), InvalidArgument);
}

TEST(EssentialCurve, ClosesThroughOneTurn) {
  const auto c = EssentialCurve::cosine_graph(0.5, 0.1, 10);
  EXPECT_EQ(c.vertex(10).x, c.vertex(0).x + 1.0);
  EXPECT_EQ(c.vertex(-1).x, c.vertex(9).x - 1.0);
}

TEST(Involution, ReflectionIsAnInvolution) {
  const auto R = Involution::reflection();
  const auto p = R({0.25, 0.3});
  EXPECT_NEAR(p.x, 0.75, 1e-15);
  EXPECT_THROW(Involution([](AnnulusPoint q) { return AnnulusPoint{wrap_unit(q.x + 0.1), q.y}; }),
               InvalidArgument);
}
