// End-to-end run: twist check, optional collar, chain recurrence, boundary
// linkage, then either a separating-curve witness or the fixed-point search.
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/conley.hpp"
#include "annulus_fixpoint/core.hpp"
#include "annulus_fixpoint/diskchain.hpp"
#include "annulus_fixpoint/fixpoint.hpp"
#include "annulus_fixpoint/linkage.hpp"

namespace annulus {

struct PipelineConfig {
  int nx = 64;
  int ny = 16;
  int samples_per_box = 8;
  std::optional<double> padding;  // default: default_padding()
  double collar = 0.1;
  int max_depth = 6;
  unsigned seed = 0;
  int workers = 1;
  int bound_samples = 8;
  int boundary_samples = 64;
  long rotation_iterations = 100000;
};

enum class Verdict { Certified, HypothesisVoid, Suspicious, Inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Certified:
      return "certified";
    case Verdict::HypothesisVoid:
      return "hypothesis_void";
    case Verdict::Suspicious:
      return "suspicious_regions";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

/// 0 certified, 2 hypothesis void, 3 suspicious or inconclusive.
inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Certified:
      return 0;
    case Verdict::HypothesisVoid:
      return 2;
    default:
      return 3;
  }
}

struct PipelineStep {
  std::string label;
  std::string status;  // "ok", "skipped", "failed", "not_applicable"
  std::string message;
};

/// Raised for errors inside a step; the message starts with the step label.
class PipelineError : public Error {
 public:
  PipelineError(const std::string& step, const std::string& what)
      : Error(step + ": " + what), step_(step) {}
  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

struct PipelineReport {
  PipelineConfig config;
  std::string map_name;
  Params map_params;
  MapDiagnostics diagnostics;

  bool collar_applied = false;
  std::optional<BoundaryRotation> rotation;
  double analysis_y_lo = 0.0;
  double analysis_y_hi = 1.0;

  std::optional<BoxCover> cover;
  double padding = 0.0;
  double epsilon = 0.0;
  long edges = 0;
  std::optional<ConleyDecomposition> decomposition;

  std::optional<LinkageVerdict> linkage;
  std::optional<PeriodicEpsilonChain> chain;
  std::optional<double> delta;
  std::optional<DiskChainResult> disk_chain;
  std::optional<FixedPointSearch> search;

  Verdict verdict = Verdict::Inconclusive;
  std::string verdict_message;
  std::vector<PipelineStep> steps;
  /// Wall-clock seconds per step; kept apart from the deterministic report.
  std::vector<std::pair<std::string, double>> timings;

  int exit_code() const { return annulus::exit_code(verdict); }
};

namespace detail {

template <class Body>
void run_step(PipelineReport& r, const std::string& label, Body&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    PipelineStep step{label, "ok", ""};
    body(step);
    r.steps.push_back(std::move(step));
  } catch (const PipelineError&) {
    throw;
  } catch (const InconclusiveError&) {
    throw;
  } catch (const std::exception& e) {
    r.steps.push_back({label, "failed", e.what()});
    throw PipelineError(label, e.what());
  }
  r.timings.emplace_back(label, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

}  // namespace detail

inline PipelineReport run_theorem_pipeline(const AnnulusMap& f, const PipelineConfig& cfg) {
  PipelineReport r;
  r.config = cfg;
  r.map_name = f.name();
  r.map_params = f.params();

  detail::run_step(r, "twist-condition", [&](PipelineStep& s) {
    r.diagnostics = check_map(f);
    const auto& d = r.diagnostics;
    if (d.equivariance_error > 1e-12 || d.boundary_error > 1e-12 || d.inverse_error > 1e-9) {
      throw InvalidArgument("map fails the lift invariants (equivariance " +
                            std::to_string(d.equivariance_error) + ", boundary " +
                            std::to_string(d.boundary_error) + ", inverse " +
                            std::to_string(d.inverse_error) + ")");
    }
    if (!d.twist()) {
      s.status = "failed";
      s.message = "boundary circles do not move in opposite directions";
    } else {
      s.message = "min r0 = " + std::to_string(d.min_r0) + ", min r1 = " + std::to_string(d.min_r1);
    }
  });
  if (!r.diagnostics.twist()) {
    r.verdict = Verdict::HypothesisVoid;
    r.verdict_message = "twist condition fails; the theorem does not apply";
    return r;
  }

  std::optional<AnnulusMap> extended;
  detail::run_step(r, "collar-extension", [&](PipelineStep& s) {
    if (r.diagnostics.rigid_boundaries()) {
      s.status = "skipped";
      s.message = "boundaries already rotate rigidly";
      return;
    }
    r.rotation = BoundaryRotation{rotation_number(f, Boundary::Lower, cfg.rotation_iterations).value,
                                  rotation_number(f, Boundary::Upper, cfg.rotation_iterations).value};
    extended = collar_extend(f, cfg.collar, *r.rotation);
    r.collar_applied = true;
    s.message = "collar width " + std::to_string(cfg.collar);
  });
  const AnnulusMap& g = extended ? *extended : f;
  r.analysis_y_lo = g.y_lo();
  r.analysis_y_hi = g.y_hi();

  std::optional<TransitionGraph> graph;
  detail::run_step(r, "transition-graph", [&](PipelineStep& s) {
    r.cover = BoxCover(cfg.nx, cfg.ny, g.y_lo(), g.y_hi());
    r.padding = cfg.padding ? *cfg.padding : default_padding(g, *r.cover, cfg.samples_per_box, cfg.seed);
    graph = build_transition_graph(g, *r.cover, cfg.samples_per_box, r.padding, cfg.workers);
    r.epsilon = graph->epsilon();
    r.edges = static_cast<long>(graph->num_edges());
    s.message = std::to_string(r.edges) + " edges";
  });

  detail::run_step(r, "chain-recurrence", [&](PipelineStep& s) {
    r.decomposition = decompose(*graph);
    const auto check = check_lyapunov(graph->digraph(), *r.decomposition);
    if (!check.ok()) throw Error("Lyapunov function violates its contract");
    s.message = std::to_string(r.decomposition->recurrent.size()) + " recurrent boxes in " +
                std::to_string(r.decomposition->class_count()) + " classes";
  });

  try {
    detail::run_step(r, "boundary-linkage", [&](PipelineStep& s) {
      r.linkage = boundary_linkage(*r.decomposition, *r.cover, g);
      s.message = r.linkage->linked ? "linked through class " + std::to_string(*r.linkage->component)
                                    : "not linked; separating curve verified";
    });
  } catch (const InconclusiveError& e) {
    r.steps.push_back({"boundary-linkage", "failed", e.what()});
    r.verdict = Verdict::Inconclusive;
    r.verdict_message = "boundaries not linked but no separating curve verified; refine the cover";
    return r;
  }

  if (!r.linkage->linked) {
    r.steps.push_back({"periodic-boundary-chain", "not_applicable", "boundaries not linked"});
    r.verdict = Verdict::HypothesisVoid;
    r.verdict_message =
        "intersection property fails: an essential curve misses its image; hypothesis void";
    return r;
  }

  detail::run_step(r, "periodic-boundary-chain", [&](PipelineStep& s) {
    r.chain = find_periodic_boundary_chain(*graph, *r.decomposition, default_winding_window(g));
    s.message = std::to_string(r.chain->size()) + " steps, total winding " +
                std::to_string(r.chain->total_winding());
  });

  detail::run_step(r, "displacement-bound", [&](PipelineStep& s) {
    const auto rects = cover_rects(*r.cover);
    r.delta = displacement_bound(g, rects, cfg.bound_samples);
    s.message = "delta = " + std::to_string(*r.delta);
  });

  bool contradiction = false;
  detail::run_step(r, "disk-chain-gate", [&](PipelineStep& s) {
    r.disk_chain = build_disk_chain(*r.chain, g, *r.delta);
    if (std::holds_alternative<DiskChainGateFailure>(*r.disk_chain)) {
      s.status = "gate_failed";
      s.message = "eps >= delta / 4: consistent with fixed points, no fixed-point-free certificate";
    } else {
      contradiction = true;
      s.message = "periodic disk chain built on a map with positive displacement bound";
    }
  });

  detail::run_step(r, "fixed-point-search", [&](PipelineStep& s) {
    r.search = locate_fixed_points(g, *r.cover, cfg.max_depth,
                                   {cfg.bound_samples, cfg.boundary_samples, cfg.workers});
    s.message = std::to_string(r.search->certificates.size()) + " certificates, " +
                std::to_string(r.search->suspicious.size()) + " suspicious regions";
  });

  if (contradiction) {
    r.verdict = Verdict::Inconclusive;
    r.verdict_message = "linked boundaries together with a fixed-point-free disk chain; the "
                        "resolution is inconsistent";
  } else if (!r.search->certificates.empty()) {
    r.verdict = Verdict::Certified;
    r.verdict_message = std::to_string(r.search->certificates.size()) + " fixed point(s) certified";
  } else if (!r.search->suspicious.empty()) {
    r.verdict = Verdict::Suspicious;
    r.verdict_message = "fixed points not isolated at this resolution (suspicious regions)";
  } else {
    r.verdict = Verdict::Inconclusive;
    r.verdict_message = "boundaries linked but no fixed point located; refine the search";
  }
  return r;
}

}  // namespace annulus
