// Command-line front end: analyze, export-graph, rotation-number,
// reversible-check. Needs CLI11 and spdlog in addition to the library.
#pragma once

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "annulus_fixpoint/map_config.hpp"
#include "annulus_fixpoint/pipeline.hpp"
#include "annulus_fixpoint/report.hpp"
#include "annulus_fixpoint/reversible.hpp"

namespace annulus::cli {

/// Exit codes of `analyze`; other subcommands use 0 / 3 / 1 the same way.
enum ExitCode { kCertified = 0, kError = 1, kHypothesisVoid = 2, kInconclusive = 3 };

struct MapOptions {
  std::string map;
  std::vector<std::string> params;
  std::optional<double> eps;
  std::string config;
  std::string samples;
};

struct RunOptions {
  int nx = 64;
  int ny = 16;
  int samples_per_box = 8;
  std::optional<double> padding;
  double collar = 0.1;
  int max_depth = 6;
  unsigned seed = 0;
  int workers = 0;  // 0: hardware concurrency
  std::string out;
};

inline void add_map_options(CLI::App& cmd, MapOptions& m) {
  cmd.add_option("--map", m.map, "map name: pure_twist, perturbed_twist, drift_twist, rigid_rotation, kicked_twist, custom_sampled");
  cmd.add_option("--param", m.params, "map parameter key=value (repeatable)");
  cmd.add_option("--eps", m.eps, "shorthand for --param eps=<value>");
  cmd.add_option("--config", m.config, "key = value configuration file");
  cmd.add_option("--samples", m.samples, "lift-sample CSV for custom_sampled");
}

inline void add_run_options(CLI::App& cmd, RunOptions& r) {
  cmd.add_option("--nx", r.nx, "cover columns (>= 4)");
  cmd.add_option("--ny", r.ny, "cover rows (>= 2)");
  cmd.add_option("--samples-per-box", r.samples_per_box, "image samples per box side (>= 4)");
  cmd.add_option("--padding", r.padding, "image inflation; default from a pilot estimate");
  cmd.add_option("--collar", r.collar, "collar width for non-rigid boundaries, in (0, 0.5]");
  cmd.add_option("--max-depth", r.max_depth, "subdivision depth of the fixed-point search");
  cmd.add_option("--seed", r.seed, "seed of the padding pilot sample");
  cmd.add_option("--workers", r.workers, "worker threads (0 = all cores)");
}

namespace detail {

inline void set_if_absent(const CLI::App& cmd, const char* flag, const ConfigFile& cfg, const char* key,
                          auto& target) {
  auto it = cfg.settings.find(key);
  if (it == cfg.settings.end() || cmd.count(flag) > 0) return;
  using T = std::remove_reference_t<decltype(target)>;
  if constexpr (std::is_same_v<T, std::optional<double>>) {
    target = it->second;
  } else {
    target = static_cast<T>(it->second);
  }
}

inline std::string read_env_level() {
  const char* v = std::getenv("ANNULUS_FIXPOINT_LOG");
  return v ? std::string(v) : std::string("warn");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

/// Resolves the map from config file, --map, --param, --eps and --samples;
/// command-line values override the file. Fills `run` from file settings not
/// given on the command line.
inline AnnulusMap resolve_map(const CLI::App& cmd, const MapOptions& m, RunOptions* run) {
  MapSpec spec;
  if (!m.config.empty()) {
    const ConfigFile cfg = read_config_file(m.config);
    spec = cfg.map;
    if (run) {
      detail::set_if_absent(cmd, "--nx", cfg, "nx", run->nx);
      detail::set_if_absent(cmd, "--ny", cfg, "ny", run->ny);
      detail::set_if_absent(cmd, "--samples-per-box", cfg, "samples_per_box", run->samples_per_box);
      detail::set_if_absent(cmd, "--padding", cfg, "padding", run->padding);
      detail::set_if_absent(cmd, "--collar", cfg, "collar", run->collar);
      detail::set_if_absent(cmd, "--max-depth", cfg, "max_depth", run->max_depth);
      detail::set_if_absent(cmd, "--seed", cfg, "seed", run->seed);
      detail::set_if_absent(cmd, "--workers", cfg, "workers", run->workers);
    }
  }
  if (!m.map.empty()) spec.name = m.map;
  for (const auto& kv : m.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--param expects key=value, got '" + kv + "'");
    const std::string key = trim(kv.substr(0, eq));
    spec.params[key] = parse_number(key, trim(kv.substr(eq + 1)));
  }
  if (m.eps) spec.params["eps"] = *m.eps;
  if (!m.samples.empty()) spec.samples_path = m.samples;
  if (spec.name.empty()) throw InvalidArgument("missing map name (use --map or a config file with name = ...)");
  return make_map(spec);
}

inline PipelineConfig to_pipeline_config(const RunOptions& r) {
  if (r.samples_per_box < 4) throw InvalidArgument("--samples-per-box must be >= 4");
  if (r.padding && !(*r.padding >= 0.0)) throw InvalidArgument("--padding must be >= 0");
  if (!(r.collar > 0.0 && r.collar <= 0.5)) throw InvalidArgument("--collar must be in (0, 0.5]");
  if (r.max_depth < 0 || r.max_depth > 20) throw InvalidArgument("--max-depth must be in [0, 20]");
  if (r.workers < 0) throw InvalidArgument("--workers must be >= 0");
  BoxCover check(r.nx, r.ny);  // validates dimensions
  (void)check;
  PipelineConfig c;
  c.nx = r.nx;
  c.ny = r.ny;
  c.samples_per_box = r.samples_per_box;
  c.padding = r.padding;
  c.collar = r.collar;
  c.max_depth = r.max_depth;
  c.seed = r.seed;
  c.workers = r.workers > 0 ? r.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

inline int cmd_analyze(const CLI::App& cmd, const MapOptions& m, RunOptions r) {
  const AnnulusMap f = resolve_map(cmd, m, &r);
  const PipelineConfig cfg = to_pipeline_config(r);
  const std::filesystem::path out = r.out.empty() ? std::filesystem::path("annulus_out") : std::filesystem::path(r.out);
  std::filesystem::create_directories(out);
  spdlog::info("analyze {} on {}x{} cover, depth {}", f.name(), cfg.nx, cfg.ny, cfg.max_depth);

  const PipelineReport rep = run_theorem_pipeline(f, cfg);
  for (const auto& s : rep.steps) spdlog::info("[{}] {} {}", s.label, s.status, s.message);

  detail::write_text(out / "report.json", detail::dump(to_json(rep)));
  detail::write_text(out / "timings.json", detail::dump(timings_json(rep)));
  if (rep.cover) {
    std::ostringstream disp;
    const AnnulusMap g = rep.collar_applied ? collar_extend(f, cfg.collar, *rep.rotation) : f;
    write_displacement_csv(disp, g, *rep.cover);
    detail::write_text(out / "displacement.csv", disp.str());
  }
  if (rep.decomposition) {
    detail::write_text(out / "decomposition.json", detail::dump(decomposition_json(*rep.decomposition, *rep.cover)));
    std::ostringstream rec, lyap;
    write_recurrent_csv(rec, *rep.decomposition, *rep.cover);
    write_lyapunov_csv(lyap, *rep.decomposition, *rep.cover);
    detail::write_text(out / "recurrent_boxes.csv", rec.str());
    detail::write_text(out / "lyapunov.csv", lyap.str());
  }
  if (rep.linkage && rep.linkage->witness) {
    std::ostringstream curve;
    write_curve_csv(curve, rep.linkage->witness->curve);
    detail::write_text(out / "witness_curve.csv", curve.str());
  }
  if (rep.chain) {
    json j = to_json(*rep.chain);
    j["disk_radius"] = rep.chain->epsilon;
    j["disk_chain"] = rep.disk_chain ? to_json(*rep.disk_chain) : json(nullptr);
    detail::write_text(out / "chain.json", detail::dump(j));
  }
  std::cout << verdict_name(rep.verdict) << ": " << rep.verdict_message << "\n";
  return rep.exit_code();
}

inline int cmd_export_graph(const CLI::App& cmd, const MapOptions& m, RunOptions r) {
  const AnnulusMap f = resolve_map(cmd, m, &r);
  const PipelineConfig cfg = to_pipeline_config(r);
  const BoxCover cover(cfg.nx, cfg.ny, f.y_lo(), f.y_hi());
  const double padding = cfg.padding ? *cfg.padding : default_padding(f, cover, cfg.samples_per_box, cfg.seed);
  const auto g = build_transition_graph(f, cover, cfg.samples_per_box, padding, cfg.workers);
  std::ostringstream s;
  write_edge_list(s, g);
  if (r.out.empty()) {
    std::cout << s.str();
  } else {
    detail::write_text(r.out, s.str());
  }
  spdlog::info("exported {} edges", g.num_edges());
  return kCertified;
}

inline int cmd_rotation_number(const CLI::App& cmd, const MapOptions& m, long iterations,
                               const std::string& out) {
  const AnnulusMap f = resolve_map(cmd, m, nullptr);
  const auto lo = rotation_number(f, Boundary::Lower, iterations);
  const auto hi = rotation_number(f, Boundary::Upper, iterations);
  json j = {{"map", {{"name", f.name()}, {"params", to_json(f.params())}}},
            {"iterations", iterations},
            {"lower", {{"value", lo.value}, {"error_bound", lo.error_bound}}},
            {"upper", {{"value", hi.value}, {"error_bound", hi.error_bound}}}};
  if (out.empty()) {
    std::cout << detail::dump(j);
  } else {
    detail::write_text(out, detail::dump(j));
  }
  return kCertified;
}

inline int cmd_reversible_check(const CLI::App& cmd, const MapOptions& m, RunOptions r, int grid,
                                double tol, int resolution) {
  const AnnulusMap f = resolve_map(cmd, m, &r);
  const PipelineConfig cfg = to_pipeline_config(r);
  const Involution R = Involution::reflection();
  ReversibilityReport rep;
  rep.map_name = f.name();
  rep.map_params = f.params();
  rep.involution = R.name();
  rep.grid = grid;
  rep.tol = tol;
  rep.reversibility = check_reversibility(f, R, grid, tol);
  const BoxCover cover(cfg.nx, cfg.ny, f.y_lo(), f.y_hi());
  const double padding = cfg.padding ? *cfg.padding : default_padding(f, cover, cfg.samples_per_box, cfg.seed);
  const auto d = decompose(build_transition_graph(f, cover, cfg.samples_per_box, padding, cfg.workers));
  rep.nx = cfg.nx;
  rep.ny = cfg.ny;
  rep.symmetry = check_recurrent_symmetry(d, R, cover);
  rep.curves = check_symmetric_curve_intersection(f, R, standard_symmetric_curves(resolution));
  const std::string text = detail::dump(to_json(rep));
  if (r.out.empty()) {
    std::cout << text;
  } else {
    std::filesystem::create_directories(r.out);
    detail::write_text(std::filesystem::path(r.out) / "reversibility.json", text);
  }
  bool all = rep.reversibility.pass && rep.symmetry.pass;
  for (const auto& c : rep.curves) all = all && c.symmetric && c.intersects;
  return all ? kCertified : kInconclusive;
}

inline int run_cli(int argc, const char* const* argv) {
  auto logger = spdlog::get("annulus_fixpoint");
  if (!logger) logger = spdlog::stderr_color_mt("annulus_fixpoint");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(detail::read_env_level()));

  CLI::App app{"Fixed points of annulus twist maps via chain recurrence"};
  app.require_subcommand(1);

  MapOptions am, em, rm, vm;
  RunOptions ar, er, vr;
  vr.nx = 64;
  vr.ny = 16;

  auto* analyze = app.add_subcommand("analyze", "run the full pipeline and write reports");
  add_map_options(*analyze, am);
  add_run_options(*analyze, ar);
  analyze->add_option("--out", ar.out, "output directory (default annulus_out)");

  auto* exportg = app.add_subcommand("export-graph", "write the transition graph edge list");
  add_map_options(*exportg, em);
  add_run_options(*exportg, er);
  exportg->add_option("--out", er.out, "output file (default: standard output)");

  long iterations = 1000000;
  std::string rot_out;
  auto* rotation = app.add_subcommand("rotation-number", "boundary rotation numbers");
  add_map_options(*rotation, rm);
  rotation->add_option("--iterations", iterations, "orbit length (>= 100)");
  rotation->add_option("--out", rot_out, "output file (default: standard output)");

  int grid = 64;
  double tol = 1e-12;
  int resolution = 256;
  auto* reversible = app.add_subcommand("reversible-check", "reversibility under (x, y) -> (-x, y)");
  add_map_options(*reversible, vm);
  add_run_options(*reversible, vr);
  reversible->add_option("--grid", grid, "sample grid for the residual");
  reversible->add_option("--tol", tol, "residual tolerance");
  reversible->add_option("--resolution", resolution, "vertices per symmetric test curve");
  reversible->add_option("--out", vr.out, "output directory (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*analyze) return cmd_analyze(*analyze, am, ar);
    if (*exportg) return cmd_export_graph(*exportg, em, er);
    if (*rotation) return cmd_rotation_number(*rotation, rm, iterations, rot_out);
    if (*reversible) return cmd_reversible_check(*reversible, vm, vr, grid, tol, resolution);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace annulus::cli
