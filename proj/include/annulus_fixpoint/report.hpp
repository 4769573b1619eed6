// JSON and CSV output for pipeline runs, decompositions, chains and
// reversibility checks.
#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "annulus_fixpoint/pipeline.hpp"
#include "annulus_fixpoint/reversible.hpp"
#include "json.hpp"

namespace annulus {

using json = nlohmann::ordered_json;

inline json to_json(LiftPoint p) { return json::array({p.x, p.y}); }
inline json to_json(const Rect& r) { return {{"x0", r.x0}, {"x1", r.x1}, {"y0", r.y0}, {"y1", r.y1}}; }

inline json to_json(const Params& params) {
  json j = json::object();
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

inline json to_json(const PipelineConfig& c) {
  return {{"nx", c.nx},
          {"ny", c.ny},
          {"samples_per_box", c.samples_per_box},
          {"padding", c.padding ? json(*c.padding) : json(nullptr)},
          {"collar", c.collar},
          {"max_depth", c.max_depth},
          {"seed", c.seed},
          {"bound_samples", c.bound_samples},
          {"boundary_samples", c.boundary_samples},
          {"rotation_iterations", c.rotation_iterations}};
}

inline json to_json(const MapDiagnostics& d) {
  return {{"equivariance_error", d.equivariance_error},
          {"boundary_error", d.boundary_error},
          {"inverse_error", d.inverse_error},
          {"r0", {{"min", d.min_r0}, {"max", d.max_r0}}},
          {"r1", {{"min", d.min_r1}, {"max", d.max_r1}}},
          {"twist", d.twist()},
          {"rigid_boundaries", d.rigid_boundaries()}};
}

inline json to_json(const SeparatingCurve& c) {
  json vertices = json::array();
  for (const auto& p : c.curve.vertices()) vertices.push_back(to_json(p));
  return {{"level", c.level},
          {"level_gap", c.level_gap},
          {"sublevel_contains", c.sublevel_above ? "upper boundary" : "lower boundary"},
          {"band", c.band},
          {"min_distance_to_image", c.min_distance},
          {"vertex_count", c.curve.size()},
          {"vertices", vertices}};
}

inline json to_json(const LinkageVerdict& v) {
  json j = {{"linked", v.linked}};
  j["component"] = v.component ? json(*v.component) : json(nullptr);
  j["witness"] = v.witness ? to_json(*v.witness) : json(nullptr);
  return j;
}

inline json to_json(const PeriodicEpsilonChain& c) {
  json cells = json::array();
  for (const auto& cell : c.cells) cells.push_back({cell[0], cell[1]});
  json lifted = json::array();
  for (const auto& p : c.lifted) lifted.push_back(to_json(p));
  const auto closure = c.closure_error();
  return {{"length", c.size()},
          {"nodes", c.nodes},
          {"windings", c.windings},
          {"total_winding", c.total_winding()},
          {"winding_window", c.winding_window},
          {"epsilon", c.epsilon},
          {"cells", cells},
          {"lifted_points", lifted},
          {"closure_error", {closure[0], closure[1]}}};
}

inline json to_json(const DiskChainVerification& v) {
  return {{"image_disjoint_margin", v.image_disjoint_margin},
          {"pairwise_margin", v.pairwise_margin},
          {"image_overlap_margin", v.image_overlap_margin},
          {"ok", v.ok()}};
}

inline json to_json(const DiskChainResult& r, const PlaneMap* h = nullptr) {
  if (const auto* fail = std::get_if<DiskChainGateFailure>(&r)) {
    return {{"gate", "failed"}, {"epsilon", fail->epsilon}, {"delta", fail->delta}, {"reason", fail->reason}};
  }
  const auto& c = std::get<DiskChain>(r);
  json links = json::array();
  for (const auto& l : c.links) {
    json pieces = json::array();
    for (const auto& d : l.pieces) pieces.push_back({{"center", to_json(d.center)}, {"radius", d.radius}});
    links.push_back({{"pieces", pieces}, {"steps", l.steps}});
  }
  json j = {{"gate", "passed"}, {"periodic", c.periodic}, {"links", links}, {"merge_lengths", c.merge_lengths}};
  j["merged_pair"] = c.merged_pair ? json({(*c.merged_pair)[0], (*c.merged_pair)[1]}) : json(nullptr);
  j["merge_certificate"] = c.merge_certificate ? json(*c.merge_certificate) : json(nullptr);
  if (h) j["verification"] = to_json(verify_disk_chain(c, *h));
  return j;
}

inline json to_json(const FixedPointCertificate& c) {
  return {{"box", to_json(c.box)},
          {"index", c.index},
          {"boundary_margin", c.boundary_margin},
          {"boundary_samples", c.boundary_samples},
          {"newton_point", c.newton_point ? to_json(*c.newton_point) : json(nullptr)},
          {"newton_residual", c.newton_residual}};
}

inline json to_json(const FixedPointSearch& s) {
  json certs = json::array();
  for (const auto& c : s.certificates) certs.push_back(to_json(c));
  json regions = json::array();
  for (const auto& r : s.suspicious) regions.push_back({{"bounds", to_json(r.bounds)}, {"leaves", r.leaves}});
  return {{"certificates", certs},
          {"suspicious_regions", regions},
          {"boxes_examined", s.boxes_examined},
          {"leaves", s.leaves}};
}

inline json decomposition_summary(const ConleyDecomposition& d) {
  json sizes = json::array();
  for (const auto& c : d.partition.classes) sizes.push_back(c.size());
  return {{"recurrent_boxes", d.recurrent.size()},
          {"classes", d.class_count()},
          {"class_sizes", sizes},
          {"class_values", d.class_values},
          {"cantor_depth", d.levels.depth},
          {"spatial_components", d.partition.spatial_components},
          {"spatial_violations", d.partition.spatial_violations}};
}

/// Full per-box decomposition: classes with members, and the Lyapunov values.
inline json decomposition_json(const ConleyDecomposition& d, const BoxCover& cover) {
  json classes = json::array();
  for (int k = 0; k < d.class_count(); ++k) {
    classes.push_back({{"id", k}, {"value", d.class_values[k]}, {"boxes", d.partition.classes[k]}});
  }
  return {{"nx", cover.nx()},
          {"ny", cover.ny()},
          {"y_range", {cover.y_lo(), cover.y_hi()}},
          {"summary", decomposition_summary(d)},
          {"classes", classes},
          {"lyapunov", d.lyapunov}};
}

inline json to_json(const PipelineReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back({{"label", s.label}, {"status", s.status}, {"message", s.message}});
  json j;
  j["map"] = {{"name", r.map_name}, {"params", to_json(r.map_params)}};
  j["config"] = to_json(r.config);
  j["diagnostics"] = to_json(r.diagnostics);
  j["steps"] = steps;
  j["collar"] = {{"applied", r.collar_applied},
                 {"alpha", r.rotation ? json(r.rotation->lower) : json(nullptr)},
                 {"beta", r.rotation ? json(r.rotation->upper) : json(nullptr)},
                 {"y_range", {r.analysis_y_lo, r.analysis_y_hi}}};
  if (r.cover) {
    j["cover"] = {{"nx", r.cover->nx()},
                  {"ny", r.cover->ny()},
                  {"box_diameter", r.cover->diameter()},
                  {"padding", r.padding},
                  {"epsilon", r.epsilon},
                  {"edges", r.edges}};
  } else {
    j["cover"] = nullptr;
  }
  j["decomposition"] = r.decomposition ? decomposition_summary(*r.decomposition) : json(nullptr);
  j["linkage"] = r.linkage ? to_json(*r.linkage) : json(nullptr);
  j["periodic_chain"] = r.chain ? to_json(*r.chain) : json(nullptr);
  j["delta"] = r.delta ? json(*r.delta) : json(nullptr);
  j["disk_chain"] = r.disk_chain ? to_json(*r.disk_chain) : json(nullptr);
  j["fixed_points"] = r.search ? to_json(*r.search) : json(nullptr);
  j["verdict"] = verdict_name(r.verdict);
  j["verdict_message"] = r.verdict_message;
  j["exit_code"] = r.exit_code();
  return j;
}

inline json timings_json(const PipelineReport& r) {
  json j = json::object();
  for (const auto& [label, seconds] : r.timings) j[label] = seconds;
  return j;
}

// ---------------------------------------------------------------------------
// CSV plot data

inline void write_displacement_csv(std::ostream& out, const AnnulusMap& f, const BoxCover& cover) {
  out.precision(17);
  out << "x,y,dx,dy\n";
  for (int u = 0; u < cover.size(); ++u) {
    const LiftPoint c = cover.box(u).center();
    const LiftPoint d = f.lift(c) - c;
    out << c.x << ',' << c.y << ',' << d.x << ',' << d.y << '\n';
  }
}

inline void write_recurrent_csv(std::ostream& out, const ConleyDecomposition& d, const BoxCover& cover) {
  out.precision(17);
  out << "box,i,j,x0,x1,y0,y1,class\n";
  for (int u : d.recurrent) {
    const Rect b = cover.box(u);
    out << u << ',' << cover.column(u) << ',' << cover.row(u) << ',' << b.x0 << ',' << b.x1 << ','
        << b.y0 << ',' << b.y1 << ',' << d.class_of(u) << '\n';
  }
}

inline void write_lyapunov_csv(std::ostream& out, const ConleyDecomposition& d, const BoxCover& cover) {
  out.precision(17);
  out << "box,i,j,value\n";
  for (int u = 0; u < cover.size(); ++u) {
    out << u << ',' << cover.column(u) << ',' << cover.row(u) << ',' << d.lyapunov[u] << '\n';
  }
}

inline void write_curve_csv(std::ostream& out, const EssentialCurve& c) {
  out.precision(17);
  out << "x,y\n";
  for (int k = 0; k < c.size(); ++k) out << c.vertex(k).x << ',' << c.vertex(k).y << '\n';
}

// ---------------------------------------------------------------------------
// Reversibility

struct ReversibilityReport {
  std::string map_name;
  Params map_params;
  std::string involution;
  int grid = 64;
  double tol = 1e-12;
  ReversibilityCheck reversibility;
  SymmetryCheck symmetry;
  int nx = 0, ny = 0;
  std::vector<CurveVerdict> curves;
};

inline json to_json(const ReversibilityReport& r) {
  json curves = json::array();
  for (const auto& c : r.curves) {
    curves.push_back({{"symmetric", c.symmetric},
                      {"symmetry_error", c.symmetry_error},
                      {"intersects", c.intersects},
                      {"min_distance", c.min_distance},
                      {"message", c.message}});
  }
  return {{"map", {{"name", r.map_name}, {"params", to_json(r.map_params)}}},
          {"involution", r.involution},
          {"reversibility", {{"grid", r.grid}, {"tol", r.tol}, {"residual", r.reversibility.residual}, {"pass", r.reversibility.pass}}},
          {"recurrent_symmetry",
           {{"nx", r.nx},
            {"ny", r.ny},
            {"symmetric_difference", r.symmetry.symmetric_difference},
            {"unexplained", r.symmetry.unexplained},
            {"pass", r.symmetry.pass}}},
          {"curves", curves},
          {"two_fixed_points_claim", "unverified (requires index-zero fixed-point removal, out of scope)"}};
}

}  // namespace annulus
