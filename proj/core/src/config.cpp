#include "dcm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "dcm/error.hpp"
#include "dcm/expr.hpp"

namespace dcm {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double constant(const std::string& text, const std::string& key) {
  const Expression e(text);
  const double v = e({0.0, 0.0});
  if (!std::isfinite(v)) throw InputError("value of '" + key + "' is not a finite number");
  // reject anything that depends on x or y
  if (e({1.0, 2.0}) != v) throw InputError("value of '" + key + "' must be a constant");
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (in >> cur) {
    std::string item;
    for (char c : cur) {
      if (c == ',') {
        if (!item.empty()) out.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ScalarField field(const std::string& text) {
  auto e = std::make_shared<Expression>(text);
  return [e](Vec2 p) { return (*e)(p); };
}

const std::set<std::string> kKnownKeys = {
    "domain.kind",        "domain.box",         "domain.vertices",   "domain.center",
    "domain.radius",      "lattice.h",          "lattice.boundary_mode",
    "problem.name",       "problem.f",          "problem.g",         "problem.exact",
    "scheme.stencil_width", "scheme.solver",    "scheme.dt",         "scheme.tol_residual",
    "scheme.max_iters",   "scheme.init",        "scheme.bisection_iterations",
    "study.h",            "study.delta",        "study.timing",      "study.sample_density",
    "study.probe_segments", "abp.C",            "abp.z",             "envelope.samples",
    "envelope.points",    "measure.constraint_set", "measure.on_nonconvex", "measure.input",
    "measure.function",   "measure.f",          "measure.C",         "seed"};

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError(origin + ":" + std::to_string(number) + ": empty key");
    if (cfg.values_.count(key)) {
      throw InputError(origin + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return parse(in, path);
}

const std::string& ConfigFile::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("missing config key '" + key + "'");
  return it->second;
}

std::vector<std::string> ConfigFile::keys() const {
  std::vector<std::string> k;
  for (const auto& [key, value] : values_) k.push_back(key);
  return k;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? constant(raw(key), key) : fallback;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = constant(raw(key), key);
  if (v != std::floor(v) || std::abs(v) > 2e9) {
    throw InputError("value of '" + key + "' must be an integer");
  }
  return static_cast<int>(v);
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("value of '" + key + "' must be true or false");
}

std::vector<double> ConfigFile::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split_list(raw(key))) out.push_back(constant(item, key));
  return out;
}

ProblemKind parse_problem(const std::string& s) {
  if (s == "quadratic") return ProblemKind::quadratic;
  if (s == "exp") return ProblemKind::exp;
  if (s == "affine") return ProblemKind::affine;
  if (s == "custom") return ProblemKind::custom;
  throw InputError("unknown problem '" + s + "' (expected quadratic, exp, affine or custom)");
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::exp: return "exp";
    case ProblemKind::affine: return "affine";
    case ProblemKind::custom: return "custom";
  }
  return "?";
}

MAProblem builtin_problem(ProblemKind kind, const ConvexDomain& domain) {
  MAProblem p;
  p.domain = domain;
  p.name = to_string(kind);
  switch (kind) {
    case ProblemKind::quadratic: {
      auto u = [](Vec2 x) { return 0.5 * dot(x, x); };
      p.f = [](Vec2) { return 1.0; };
      p.g = u;
      p.exact = u;
      break;
    }
    case ProblemKind::exp: {
      auto u = [](Vec2 x) { return std::exp(0.5 * dot(x, x)); };
      p.f = [](Vec2 x) {
        const double r2 = dot(x, x);
        return (1.0 + r2) * std::exp(r2);
      };
      p.g = u;
      p.exact = u;
      break;
    }
    case ProblemKind::affine: {
      auto u = [](Vec2 x) { return 1.0 + 0.5 * x.x - 0.25 * x.y; };
      p.f = [](Vec2) { return 0.0; };
      p.g = u;
      p.exact = u;
      break;
    }
    case ProblemKind::custom:
      throw InputError("custom problems need problem.f and problem.g");
  }
  return p;
}

RunConfig make_run_config(const ConfigFile& file) {
  for (const std::string& key : file.keys()) {
    if (!kKnownKeys.count(key)) throw InputError("unknown config key '" + key + "'");
  }
  RunConfig rc;

  const std::string kind = file.get_string("domain.kind", "box");
  if (kind == "box") {
    const auto b = file.has("domain.box") ? file.get_doubles("domain.box") : std::vector<double>{0, 0, 1, 1};
    if (b.size() != 4) throw InputError("domain.box needs 4 numbers: xmin ymin xmax ymax");
    rc.domain = ConvexDomain::box({b[0], b[1]}, {b[2], b[3]});
  } else if (kind == "polygon") {
    const auto v = file.get_doubles("domain.vertices");
    if (v.size() < 6 || v.size() % 2 != 0) {
      throw InputError("domain.vertices needs at least 3 coordinate pairs");
    }
    std::vector<Vec2> pts;
    for (std::size_t k = 0; k < v.size(); k += 2) pts.push_back({v[k], v[k + 1]});
    rc.domain = ConvexDomain::polygon(std::move(pts));
  } else if (kind == "disk") {
    const auto c = file.has("domain.center") ? file.get_doubles("domain.center") : std::vector<double>{0, 0};
    if (c.size() != 2) throw InputError("domain.center needs 2 numbers");
    rc.domain = ConvexDomain::disk({c[0], c[1]}, file.get_double("domain.radius", 1.0));
  } else {
    throw InputError("unknown domain.kind '" + kind + "' (expected box, polygon or disk)");
  }

  rc.boundary_mode = parse_boundary_mode(file.get_string("lattice.boundary_mode", "projected"));
  rc.h = file.get_double("lattice.h", rc.h);
  if (!(rc.h > 0.0)) throw InputError("lattice.h must be positive");
  if (file.has("study.h")) rc.h_values = file.get_doubles("study.h");
  if (rc.h_values.empty()) throw InputError("study.h must list at least one spacing");
  for (std::size_t k = 0; k < rc.h_values.size(); ++k) {
    if (!(rc.h_values[k] > 0.0)) throw InputError("study.h values must be positive");
    if (k > 0 && !(rc.h_values[k] < rc.h_values[k - 1])) {
      throw InputError("study.h must be strictly decreasing");
    }
  }

  rc.problem_kind = parse_problem(file.get_string("problem.name", "quadratic"));
  if (rc.problem_kind == ProblemKind::custom) {
    rc.problem.domain = rc.domain;
    rc.problem.name = "custom";
    rc.problem.f = field(file.raw("problem.f"));
    rc.problem.g = field(file.raw("problem.g"));
  } else {
    rc.problem = builtin_problem(rc.problem_kind, rc.domain);
    if (file.has("problem.f")) rc.problem.f = field(file.raw("problem.f"));
    if (file.has("problem.g")) rc.problem.g = field(file.raw("problem.g"));
    if (file.has("problem.f") || file.has("problem.g")) rc.problem.exact.reset();
  }
  if (file.has("problem.exact")) rc.problem.exact = field(file.raw("problem.exact"));

  SchemeConfig& s = rc.scheme;
  if (file.has("scheme.stencil_width")) {
    s.stencil_width = file.raw("scheme.stencil_width") == "auto" ? 0 : file.get_int("scheme.stencil_width", 2);
    if (s.stencil_width < 1 && file.raw("scheme.stencil_width") != "auto") {
      throw InputError("scheme.stencil_width must be >= 1 or auto");
    }
  }
  if (file.has("scheme.solver")) s.solver = parse_solver(file.raw("scheme.solver"));
  s.dt = file.get_double("scheme.dt", s.dt);
  s.tol_residual = file.get_double("scheme.tol_residual", s.tol_residual);
  s.max_iters = file.get_int("scheme.max_iters", s.max_iters);
  s.bisection_iterations = file.get_int("scheme.bisection_iterations", s.bisection_iterations);
  if (file.has("scheme.init")) s.init = parse_init(file.raw("scheme.init"));
  if (s.init == InitKind::custom) throw InputError("scheme.init = custom is only available from the library");
  if (!(s.tol_residual > 0.0)) throw InputError("scheme.tol_residual must be positive");
  if (s.max_iters < 1) throw InputError("scheme.max_iters must be positive");
  if (s.dt < 0.0) throw InputError("scheme.dt must be >= 0");

  if (file.has("study.delta")) {
    rc.delta = file.get_double("study.delta", 0.0);
    if (!(*rc.delta > 0.0)) throw InputError("study.delta must be positive");
  }
  rc.timing = file.get_bool("study.timing", rc.timing);
  rc.sample_density = file.get_int("study.sample_density", rc.sample_density);
  rc.probe_segments = file.get_int("study.probe_segments", rc.probe_segments);
  if (rc.sample_density < 1 || rc.probe_segments < 1) {
    throw InputError("study.sample_density and study.probe_segments must be positive");
  }

  rc.abp_C = file.get_double("abp.C", rc.abp_C);
  if (file.has("abp.z")) rc.abp_z = file.raw("abp.z");
  rc.envelope_samples = file.get_int("envelope.samples", rc.envelope_samples);
  if (file.has("envelope.points")) {
    const auto v = file.get_doubles("envelope.points");
    if (v.size() % 2 != 0) throw InputError("envelope.points needs coordinate pairs");
    for (std::size_t k = 0; k < v.size(); k += 2) rc.envelope_points.push_back({v[k], v[k + 1]});
  }

  const std::string cs = file.get_string("measure.constraint_set", "all");
  if (cs == "all") {
    rc.measure.constraints = ConstraintSet::all_nodes();
  } else if (cs.rfind("radius:", 0) == 0) {
    const double r = constant(cs.substr(7), "measure.constraint_set");
    if (!(r > 0.0)) throw InputError("measure.constraint_set radius must be positive");
    rc.measure.constraints = ConstraintSet::radius_limited(r);
  } else {
    throw InputError("measure.constraint_set must be 'all' or 'radius:<r>'");
  }
  const std::string nc = file.get_string("measure.on_nonconvex", "warn");
  if (nc == "warn") {
    rc.measure.on_nonconvex = NonconvexPolicy::warn;
  } else if (nc == "error") {
    rc.measure.on_nonconvex = NonconvexPolicy::error;
  } else if (nc == "ignore") {
    rc.measure.on_nonconvex = NonconvexPolicy::ignore;
  } else {
    throw InputError("measure.on_nonconvex must be warn, error or ignore");
  }
  if (file.has("measure.input")) rc.measure_input = file.raw("measure.input");
  if (file.has("measure.function")) rc.measure_function = file.raw("measure.function");
  if (file.has("measure.f")) rc.measure_f = file.raw("measure.f");
  rc.mass_C = file.get_double("measure.C", rc.mass_C);

  if (file.has("seed")) {
    const double v = file.get_double("seed", 1.0);
    if (v < 0 || v != std::floor(v)) throw InputError("seed must be a nonnegative integer");
    rc.seed = static_cast<std::uint64_t>(v);
  }
  return rc;
}

RunConfig load_run_config(const std::string& path) { return make_run_config(ConfigFile::load(path)); }

}  // namespace dcm
