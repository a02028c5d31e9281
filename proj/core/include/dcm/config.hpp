#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcm/measure.hpp"
#include "dcm/scheme.hpp"

namespace dcm {

// Flat `key = value` text with `#` comments. Keys are dotted.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  std::vector<std::string> keys() const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  // Numbers accept constant expressions such as 1/64.
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
};

enum class ProblemKind { quadratic, exp, affine, custom };
ProblemKind parse_problem(const std::string& s);
std::string to_string(ProblemKind k);

// Built-in problems on an arbitrary domain: quadratic (f = 1, g = |x|^2/2),
// exp (u = exp(|x|^2/2)) and affine (f = 0, u = 1 + x/2 - y/4).
MAProblem builtin_problem(ProblemKind kind, const ConvexDomain& domain);

struct RunConfig {
  ConvexDomain domain = ConvexDomain::box({0, 0}, {1, 1});
  BoundaryMode boundary_mode = BoundaryMode::projected;
  double h = 0.125;
  std::vector<double> h_values{0.125, 0.0625, 0.03125};
  ProblemKind problem_kind = ProblemKind::quadratic;
  MAProblem problem;
  SchemeConfig scheme;
  std::optional<double> delta;  // unset: 0.2 * diameter
  bool timing = true;
  int sample_density = 2;
  int probe_segments = 1000;
  double abp_C = 5.0;
  std::optional<std::string> abp_z;  // expression for check-abp
  int envelope_samples = 64;
  std::vector<Vec2> envelope_points;
  MeasureOptions measure;
  std::optional<std::string> measure_input;     // CSV path
  std::optional<std::string> measure_function;  // expression
  std::optional<std::string> measure_f;         // density for the mass bound
  double mass_C = 2.0;
  std::uint64_t seed = 1;

  double compact_delta() const { return delta ? *delta : 0.2 * domain.diameter(); }
};

// Unknown keys and malformed values raise InputError.
RunConfig make_run_config(const ConfigFile& file);
RunConfig load_run_config(const std::string& path);

}  // namespace dcm
