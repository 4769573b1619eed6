// Map descriptions and `key = value` run configuration files.
//
//   # comment
//   name = perturbed_twist
//   eps = 0.05
//   nx = 64
//   samples = grid.csv      (custom_sampled only; relative to this file)
#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "annulus_fixpoint/core.hpp"
#include "annulus_fixpoint/reversible.hpp"

namespace annulus {

struct MapSpec {
  std::string name;
  Params params;
  std::string samples_path;  // lift-sample CSV for custom_sampled
};

/// Keys that configure the run rather than the map.
inline bool is_run_setting(const std::string& key) {
  static const char* keys[] = {"nx",     "ny",        "samples_per_box", "padding",
                               "collar", "max_depth", "seed",            "workers"};
  for (const char* k : keys) {
    if (key == k) return true;
  }
  return false;
}

struct ConfigFile {
  MapSpec map;
  std::map<std::string, double> settings;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& key, const std::string& text) {
  std::istringstream ss(text);
  double v = 0.0;
  if (!(ss >> v) || !(ss >> std::ws).eof()) {
    throw InvalidArgument("config: value of '" + key + "' is not a number: '" + text + "'");
  }
  return v;
}

inline ConfigFile parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  ConfigFile cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (key == "name" || key == "map") {
      cfg.map.name = value;
    } else if (key == "samples") {
      const std::filesystem::path p(value);
      cfg.map.samples_path = (p.is_relative() && !base_dir.empty()) ? (base_dir / p).string() : value;
    } else if (is_run_setting(key)) {
      cfg.settings[key] = parse_number(key, value);
    } else {
      cfg.map.params[key] = parse_number(key, value);
    }
  }
  return cfg;
}

inline ConfigFile read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  return parse_config(in, std::filesystem::path(path).parent_path());
}

inline AnnulusMap make_map(const MapSpec& spec) {
  if (spec.name.empty()) throw InvalidArgument("no map name given");
  if (spec.name == "custom_sampled") {
    if (spec.samples_path.empty()) throw InvalidArgument("custom_sampled needs a samples CSV path");
    std::ifstream in(spec.samples_path);
    if (!in) throw InvalidArgument("cannot open samples file '" + spec.samples_path + "'");
    const SampleGrid grid = read_sample_csv(in);
    return catalog_map(spec.name, spec.params, &grid);
  }
  if (spec.name == "kicked_twist") return kicked_twist(param_or(spec.params, "eta", 0.2));
  return catalog_map(spec.name, spec.params);
}

}  // namespace annulus
