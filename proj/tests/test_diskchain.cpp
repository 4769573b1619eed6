#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "annulus_fixpoint/diskchain.hpp"
#include "oracles.hpp"

using namespace annulus;

namespace {

PlaneMap translation(double dx) {
  return [dx](LiftPoint p) { return LiftPoint{p.x + dx, p.y}; };
}

// Rotation by 120 degrees about the origin combined with r -> r / 3 + 2 / 3,
// so orbits spiral onto the unit circle.
LiftPoint spiral(LiftPoint p) {
  const double r = norm(p);
  const double s = (r / 3.0 + 2.0 / 3.0) / r;
  const double c = std::cos(2.0 * std::numbers::pi / 3.0);
  const double n = std::sin(2.0 * std::numbers::pi / 3.0);
  return {s * (c * p.x - n * p.y), s * (n * p.x + c * p.y)};
}

std::vector<LiftPoint> spiral_orbit(int n) {
  std::vector<LiftPoint> pts{{1.0 + 9 * 0.15, 0.0}};
  while (static_cast<int>(pts.size()) < n) pts.push_back(spiral(pts.back()));
  return pts;
}

struct Built {
  BoxCover cover;
  TransitionGraph graph;
  ConleyDecomposition d;
};

Built build(const AnnulusMap& f) {
  const auto cover = build_cover(64, 16);
  auto g = build_transition_graph(f, cover);
  auto d = decompose(g);
  return {cover, std::move(g), std::move(d)};
}

}  // namespace

TEST(EpsilonChain, PureTwistBottomReachesTop) {
  const auto b = build(pure_twist());
  for (int i : {0, 17, 63}) {
    const auto p = find_epsilon_chain(b.graph, b.cover.index(i, 0), b.cover.index((i * 7) % 64, 15));
    ASSERT_TRUE(p.has_value());
    for (int k = 0; k < p->steps(); ++k) {
      EXPECT_TRUE(b.graph.has_edge(p->nodes[k], p->nodes[k + 1]));
      EXPECT_EQ(p->windings[k], b.graph.winding(p->nodes[k], p->nodes[k + 1]));
    }
  }
}

TEST(EpsilonChain, DriftTwistOnlyClimbs) {
  const auto b = build(drift_twist(0.1));
  const int bottom = b.cover.index(3, 0);
  const int top = b.cover.index(40, 15);
  EXPECT_TRUE(find_epsilon_chain(b.graph, bottom, top).has_value());
  EXPECT_FALSE(find_epsilon_chain(b.graph, top, bottom).has_value());

  std::ostringstream s;
  write_edge_list(s, b.graph);
  const auto list = oracle::parse_edge_list(s.str());
  const auto reach = oracle::reachability(list.nodes, list.edges);
  EXPECT_TRUE(reach[bottom][top]);
  EXPECT_FALSE(reach[top][bottom]);
}

TEST(EpsilonChain, SelfLoopGivesLengthOne) {
  const auto cover = build_cover(4, 2);
  const TransitionGraph g(cover, 0.0, {{0, 0, 0}, {0, 1, 0}, {1, 0, -1}});
  const auto p = find_epsilon_chain(g, 0, 0);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->steps(), 1);
  EXPECT_FALSE(find_epsilon_chain(g, 2, 0).has_value());
}

TEST(EpsilonChain, LiftedPointsFollowWindings) {
  const auto cover = build_cover(4, 2);
  const TransitionGraph g(cover, 0.0, {{0, 1, 0}, {1, 2, 1}, {2, 0, -1}});
  const auto p = find_epsilon_chain(g, 0, 0);
  ASSERT_TRUE(p.has_value());
  const auto pts = lifted_points(g, *p);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_NEAR(pts[2].x, cover.box(2).center().x + 1.0, 1e-15);
  EXPECT_NEAR(pts[3].x, pts[0].x, 1e-15);
}

TEST(PeriodicChain, PureTwistClosesWithZeroWinding) {
  const auto f = pure_twist();
  const auto b = build(f);
  const auto c = find_periodic_boundary_chain(b.graph, b.d, default_winding_window(f));
  const int n = c.size();
  ASSERT_GE(n, 2);
  EXPECT_EQ(c.total_winding(), 0);
  EXPECT_EQ(c.closure_error()[0], 0);
  EXPECT_EQ(c.closure_error()[1], 0);

  // Recompute the lifted cells from the windings alone.
  long turns = 0;
  bool bottom = false, top = false;
  for (int k = 0; k < n; ++k) {
    const int u = c.nodes[k];
    const int v = c.nodes[(k + 1) % n];
    ASSERT_TRUE(b.graph.has_edge(u, v));
    EXPECT_EQ(c.windings[k], b.graph.winding(u, v));
    EXPECT_EQ(c.cells[k][0], b.cover.column(u) + 64 * turns);
    EXPECT_EQ(c.cells[k][1], b.cover.row(u));
    // The lifted step is short: the image of the box center lies near the
    // next box in the copy chosen by the winding.
    const LiftPoint image = f.lift(c.lifted[k]);
    const Rect next = b.cover.box(v).shifted(static_cast<double>(turns + c.windings[k]));
    const double gx = std::max({0.0, next.x0 - image.x, image.x - next.x1});
    const double gy = std::max({0.0, next.y0 - image.y, image.y - next.y1});
    EXPECT_LT(std::hypot(gx, gy), 0.15);
    bottom |= b.cover.row(u) == 0;
    top |= b.cover.row(u) == 15;
    turns += c.windings[k];
  }
  EXPECT_EQ(turns, 0);
  EXPECT_TRUE(bottom);
  EXPECT_TRUE(top);
  EXPECT_EQ(c.lifted.back().x, c.lifted.front().x);
  EXPECT_EQ(c.lifted.back().y, c.lifted.front().y);
}

TEST(PeriodicChain, IsDeterministic) {
  const auto b = build(perturbed_twist(0.05));
  const auto a = find_periodic_boundary_chain(b.graph, b.d);
  const auto c = find_periodic_boundary_chain(b.graph, b.d);
  EXPECT_EQ(a.nodes, c.nodes);
  EXPECT_EQ(a.windings, c.windings);
  EXPECT_EQ(a.total_winding(), 0);
}

TEST(PeriodicChain, DriftTwistIsNotLinked) {
  const auto b = build(drift_twist(0.1));
  try {
    find_periodic_boundary_chain(b.graph, b.d);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("not linked"), std::string::npos);
  }
}

TEST(DiskChain, TranslationChainIsValid) {
  std::vector<LiftPoint> pts;
  for (int k = 0; k < 5; ++k) pts.push_back({0.9 * k, 0.0});
  const auto r = build_disk_chain(pts, false, translation(1.0), 1.0, 0.2);
  ASSERT_TRUE(std::holds_alternative<DiskChain>(r));
  const auto& c = std::get<DiskChain>(r);
  EXPECT_EQ(c.links.size(), 5u);
  EXPECT_FALSE(c.merged_pair.has_value());
  const auto v = verify_disk_chain(c, translation(1.0));
  EXPECT_TRUE(v.ok());
  EXPECT_NEAR(v.image_disjoint_margin, 0.6, 1e-9);
  EXPECT_NEAR(v.pairwise_margin, 0.5, 1e-12);
  EXPECT_GT(v.image_overlap_margin, 0.0);
}

TEST(DiskChain, MergeFixtureBecomesPeriodicAndDisjoint) {
  const auto pts = spiral_orbit(6);
  // Only U2 and U5 overlap among non-consecutive disks.
  EXPECT_LT(norm(pts[2] - pts[5]), 0.2);
  const auto r = build_disk_chain(pts, false, spiral, 0.5, 0.1);
  ASSERT_TRUE(std::holds_alternative<DiskChain>(r));
  const auto& c = std::get<DiskChain>(r);
  ASSERT_TRUE(c.merged_pair.has_value());
  EXPECT_EQ((*c.merged_pair)[0], 2);
  EXPECT_EQ((*c.merged_pair)[1], 5);
  EXPECT_TRUE(c.periodic);
  ASSERT_EQ(c.links.size(), 3u);
  int disks = 0;
  for (const auto& l : c.links) disks += static_cast<int>(l.pieces.size());
  EXPECT_EQ(disks, 4);
  ASSERT_EQ(c.merge_lengths.size(), 2u);
  EXPECT_LT(c.merge_lengths[1], c.merge_lengths[0]);
  ASSERT_TRUE(c.merge_certificate.has_value());
  EXPECT_NEAR(*c.merge_certificate, 0.1, 1e-15);

  const auto v = verify_disk_chain(c, spiral);
  EXPECT_TRUE(v.ok());
  EXPECT_GE(v.pairwise_margin, 0.0);

  // The image of each merged disk keeps at least the certified distance from
  // the other one.
  const Disk a{pts[2], 0.1}, b{pts[5], 0.1};
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
    for (const auto& p : detail::disk_samples(from)) m = std::min(m, norm(spiral(p) - to.center) - to.radius);
  }
  EXPECT_GE(m, *c.merge_certificate);
}

TEST(DiskChain, GateRejectsLargeEpsilon) {
  const auto pts = spiral_orbit(6);
  for (double eps : {0.125, 0.2, 1.0}) {
    const auto r = build_disk_chain(pts, false, spiral, 0.5, eps);
    EXPECT_TRUE(std::holds_alternative<DiskChainGateFailure>(r)) << eps;
  }
  std::vector<LiftPoint> line{{0, 0}, {0.9, 0}, {1.8, 0}};
  EXPECT_TRUE(std::holds_alternative<DiskChainGateFailure>(build_disk_chain(line, false, translation(1.0), 1.0, 0.25)));
}

TEST(DiskChain, PerturbedTwistFailsTheGate) {
  const auto f = perturbed_twist(0.05);
  const auto b = build(f);
  const auto c = find_periodic_boundary_chain(b.graph, b.d);
  const auto r = build_disk_chain(c, f, 0.0);
  EXPECT_TRUE(std::holds_alternative<DiskChainGateFailure>(r));
}

TEST(DiskChain, VerifierCatchesBrokenChains) {
  DiskChain overlapping;
  overlapping.links = {{{Disk{{0, 0}, 0.3}}, 1}, {{Disk{{0.4, 0}, 0.3}}, 1}};
  EXPECT_LT(verify_disk_chain(overlapping, translation(1.0)).pairwise_margin, 0.0);
  EXPECT_FALSE(verify_disk_chain(overlapping, translation(1.0)).ok());

  DiskChain self_hit;
  self_hit.links = {{{Disk{{0, 0}, 0.3}}, 1}, {{Disk{{2, 0}, 0.3}}, 1}};
  EXPECT_LE(verify_disk_chain(self_hit, translation(0.1)).image_disjoint_margin, 0.0);
}

TEST(DiskChain, VerifierSupportsMultiStepLinks) {
  DiskChain c;
  c.links = {{{Disk{{0, 0}, 0.2}}, 2}, {{Disk{{1.0, 0}, 0.2}}, 1}};
  const auto v = verify_disk_chain(c, translation(0.5));
  EXPECT_TRUE(v.ok());
  DiskChain one_step = c;
  one_step.links[0].steps = 1;
  EXPECT_FALSE(verify_disk_chain(one_step, translation(0.5)).ok());
}
