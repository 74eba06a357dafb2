#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cappen/common.hpp"
#include "cappen/solver.hpp"
#include "cappen/support.hpp"

namespace cappen {

// Flat `key = value` text with dotted sections. `#` starts a comment, blank
// lines are skipped, duplicate keys are rejected. Every key must be consumed
// by the schema or loading fails (unknown-key rejection).
class Config {
 public:
  static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
    Config c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError(strf("%s:%d: expected 'key = value'", origin.c_str(), lineno));
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string val = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw ConfigError(strf("%s:%d: empty key", origin.c_str(), lineno));
      for (char ch : key)
        if (!(std::islower(static_cast<unsigned char>(ch)) ||
              std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_'))
          throw ConfigError(strf("%s:%d: bad character in key '%s'", origin.c_str(), lineno,
                                 key.c_str()));
      if (!c.kv_.emplace(key, val).second)
        throw ConfigError(strf("%s:%d: duplicate key '%s'", origin.c_str(), lineno, key.c_str()));
    }
    return c;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(strf("cannot open config file '%s'", path.c_str()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& dflt) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }

  double get_double(const std::string& key, double dflt) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    return to_double(key, it->second);
  }

  int get_int(const std::string& key, int dflt) const {
    const double v = get_double(key, static_cast<double>(dflt));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ConfigError(strf("key '%s': expected an integer", key.c_str()));
    return i;
  }

  uint64_t get_uint64(const std::string& key, uint64_t dflt) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    try {
      size_t pos = 0;
      const unsigned long long v = std::stoull(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return static_cast<uint64_t>(v);
    } catch (const std::exception&) {
      throw ConfigError(strf("key '%s': expected an unsigned integer, got '%s'", key.c_str(),
                             it->second.c_str()));
    }
  }

  bool get_bool(const std::string& key, bool dflt) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw ConfigError(strf("key '%s': expected a boolean, got '%s'", key.c_str(), v.c_str()));
  }

  std::vector<double> get_double_list(const std::string& key, std::vector<double> dflt) const {
    consumed_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    std::vector<double> out;
    std::string item;
    std::istringstream ss(it->second);
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw ConfigError(strf("key '%s': empty list", key.c_str()));
    return out;
  }

  // Call after the schema has read everything it understands.
  void reject_unknown_keys() const {
    for (const auto& [k, v] : kv_)
      if (!consumed_.count(k))
        throw ConfigError(strf("%s: unknown key '%s'", origin_.c_str(), k.c_str()));
  }

 private:
  static std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return d;
    } catch (const std::exception&) {
      throw ConfigError(strf("key '%s': expected a number, got '%s'", key.c_str(), v.c_str()));
    }
  }

  std::string origin_;
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;
};

// Everything one experiment needs: the surface, discretization, solver knobs,
// sweep grid, mass radii, and output names.
struct ExperimentConfig {
  std::string surface_kind = "catenoid";  // catenoid | funnel | plane | log_graph | catenoid_end
  double m = 1.0;
  double pinch = 0.0;
  double log_coeff = 1.0;
  double cap_depth = 1.2;
  std::vector<Bump> bumps;

  double target_edge = 0.05;
  SolverOptions solver;

  double t_max = 3.0;
  double t_step = 0.1;

  std::vector<double> mass_radii = {25.0, 40.0, 60.0, 90.0};
  double flux_tolerance = 0.1;

  std::string csv_name = "sweep.csv";
  std::string summary_name = "summary.json";
  bool plots = false;

  static ExperimentConfig from_config(const Config& c) {
    ExperimentConfig e;
    e.surface_kind = c.get_string("surface.kind", e.surface_kind);
    static const std::set<std::string> kinds = {"catenoid", "funnel", "plane", "log_graph",
                                                "catenoid_end"};
    if (!kinds.count(e.surface_kind))
      throw ConfigError(strf("surface.kind: unknown kind '%s'", e.surface_kind.c_str()));
    e.m = c.get_double("surface.m", e.m);
    e.pinch = c.get_double("surface.pinch", e.pinch);
    e.log_coeff = c.get_double("surface.log_coeff", e.log_coeff);
    e.cap_depth = c.get_double("surface.cap_depth", e.cap_depth);
    for (int i = 0;; ++i) {
      const std::string pre = strf("surface.bumps.%d.", i);
      if (!c.has(pre + "amplitude") && !c.has(pre + "center") && !c.has(pre + "width")) break;
      Bump b;
      b.amplitude = c.get_double(pre + "amplitude", 0.0);
      b.center = c.get_double(pre + "center", 0.0);
      b.width = c.get_double(pre + "width", 0.0);
      if (!(b.width > 0.0)) throw ConfigError(strf("%swidth: must be positive", pre.c_str()));
      e.bumps.push_back(b);
    }

    e.target_edge = c.get_double("mesh.target_edge", e.target_edge);
    if (!(e.target_edge > 0.0)) throw ConfigError("mesh.target_edge: must be positive");

    e.solver.tol_grad = c.get_double("solver.tol_grad", e.solver.tol_grad);
    e.solver.tol_angle = c.get_double("solver.tol_angle", e.solver.tol_angle);
    e.solver.max_iters = c.get_int("solver.max_iters", e.solver.max_iters);
    e.solver.shrink = c.get_double("solver.shrink", e.solver.shrink);
    e.solver.armijo_c = c.get_double("solver.armijo_c", e.solver.armijo_c);
    e.solver.remesh = c.get_bool("solver.remesh", e.solver.remesh);
    e.solver.degeneracy_floor = c.get_double("solver.degeneracy_floor", e.solver.degeneracy_floor);
    e.solver.seed = c.get_uint64("solver.seed", e.solver.seed);
    e.solver.collapse_fraction = c.get_double("solver.collapse_fraction", e.solver.collapse_fraction);
    e.solver.grace = c.get_double("solver.grace", e.solver.grace);
    e.solver.mf_slack = c.get_double("solver.mf_slack", e.solver.mf_slack);
    e.solver.target_edge = e.target_edge;
    e.solver.validate();

    e.t_max = c.get_double("sweep.t_max", e.t_max);
    e.t_step = c.get_double("sweep.t_step", e.t_step);
    if (!(e.t_step > 0.0) || !(e.t_max >= 0.0))
      throw ConfigError("sweep: t_step must be positive and t_max nonnegative");

    e.mass_radii = c.get_double_list("mass.radii", e.mass_radii);
    if (e.mass_radii.size() < 3) throw ConfigError("mass.radii: need at least 3 radii");
    for (size_t i = 1; i < e.mass_radii.size(); ++i)
      if (!(e.mass_radii[i] > e.mass_radii[i - 1]))
        throw ConfigError("mass.radii: must increase strictly");

    e.flux_tolerance = c.get_double("flux.tolerance", e.flux_tolerance);
    if (!(e.flux_tolerance > 0.0)) throw ConfigError("flux.tolerance: must be positive");

    e.csv_name = c.get_string("output.csv", e.csv_name);
    e.summary_name = c.get_string("output.summary", e.summary_name);
    e.plots = c.get_bool("output.plots", e.plots);

    c.reject_unknown_keys();
    return e;
  }

  static ExperimentConfig load(const std::string& path) {
    return from_config(Config::parse_file(path));
  }

  SupportSurface make_surface() const {
    if (surface_kind == "catenoid") return SupportSurface::funnel(m, 0.0, bumps, cap_depth);
    if (surface_kind == "funnel") return SupportSurface::funnel(m, pinch, bumps, cap_depth);
    if (surface_kind == "plane") return SupportSurface::plane(bumps);
    if (surface_kind == "log_graph") {
      if (!bumps.empty()) throw ConfigError("surface.bumps: log_graph takes no bumps");
      return SupportSurface::graph_log(log_coeff);
    }
    if (surface_kind == "catenoid_end") {
      if (!bumps.empty()) throw ConfigError("surface.bumps: catenoid_end takes no bumps");
      return SupportSurface::graph_catenoid_end(m);
    }
    throw ConfigError(strf("surface.kind: unknown kind '%s'", surface_kind.c_str()));
  }

  std::vector<double> t_grid() const {
    std::vector<double> g;
    for (int k = 0;; ++k) {
      const double t = k * t_step;
      if (t > t_max + 1e-12) break;
      g.push_back(std::min(t, t_max));
    }
    if (g.empty() || g.front() != 0.0) g.insert(g.begin(), 0.0);
    return g;
  }
};

}  // namespace cappen
