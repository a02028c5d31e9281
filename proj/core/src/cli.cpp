#include "dcm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dcm/config.hpp"
#include "dcm/error.hpp"
#include "dcm/expr.hpp"
#include "dcm/harness.hpp"
#include "dcm/measure.hpp"
#include "dcm/principle.hpp"
#include "dcm/selftest.hpp"

namespace dcm {
namespace {

struct Context {
  RunConfig config;
  std::string out_dir;
  std::ostream& out;
};

std::string path_in(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_solve(Context& c) {
  auto lat = std::make_shared<const Lattice>(c.config.domain, c.config.h, c.config.boundary_mode);
  const SolveResult r = solve(c.config.problem, lat, c.config.scheme);
  std::ostringstream csv;
  r.u.write_csv(csv);
  write_file_atomic(path_in(c.out_dir, "solution.csv"), csv.str());
  std::ostringstream json;
  r.report.write_json(json, c.config.timing);
  write_file_atomic(path_in(c.out_dir, "solve_report.json"), json.str());
  c.out << "solved " << lat->interior_count() << " interior nodes in " << r.report.iterations
        << " iterations, residual " << r.report.final_residual << ", MA mass "
        << r.report.ma_total_mass << '\n';
  if (!r.report.discrete_convex) {
    c.out << "note: solution is not discrete convex along every stencil direction (min lambda "
          << r.report.min_lambda << ")\n";
  }
  return 0;
}

int cmd_measure(Context& c) {
  auto lat = std::make_shared<const Lattice>(c.config.domain, c.config.h, c.config.boundary_mode);
  std::optional<MeshFunction> v;
  if (c.config.measure_input) {
    std::ifstream in(*c.config.measure_input);
    if (!in) throw InputError("cannot open measure.input '" + *c.config.measure_input + "'");
    v = MeshFunction::read_csv(lat, in);
  } else if (c.config.measure_function) {
    const Expression e(*c.config.measure_function);
    v = MeshFunction::sample(lat, [&e](Vec2 x) { return e(x); });
  } else {
    v = MeshFunction::sample(lat, c.config.problem.g);
  }
  const MAMeasure m = ma_measure(*v, c.config.measure);
  std::ostringstream csv;
  csv << "x,y,mass\n";
  csv.precision(17);
  for (std::size_t k = 0; k < m.node_masses.size(); ++k) {
    csv << lat->point(k).x << ',' << lat->point(k).y << ',' << m.node_masses[k] << '\n';
  }
  write_file_atomic(path_in(c.out_dir, "masses.csv"), csv.str());
  c.out << "total MA mass " << std::setprecision(12) << m.total << " over "
        << m.node_masses.size() << " interior nodes" << (m.input_convex ? "" : " (input not discrete convex)")
        << '\n';
  if (c.config.measure_f) {
    const Expression f(*c.config.measure_f);
    const MassBoundReport r =
        mass_bound_check(*v, [&f](Vec2 x) { return f(x); }, c.config.mass_C, c.config.measure);
    c.out << "mass / integral f = " << r.ratio << " (C = " << r.C << ")\n";
    if (r.exceeds) return 1;
  }
  return 0;
}

int cmd_abp(Context& c) {
  auto lat = std::make_shared<const Lattice>(c.config.domain, c.config.h, c.config.boundary_mode);
  std::optional<MeshFunction> z;
  if (c.config.abp_z) {
    const Expression e(*c.config.abp_z);
    z = MeshFunction::sample(lat, [&e](Vec2 x) { return e(x); });
  } else {
    const SolveResult r = solve(c.config.problem, lat, c.config.scheme);
    const EnvelopeValue L = convex_envelope(EnvelopeSamples::at_boundary_nodes(r.u),
                                            c.config.domain.centroid(), EnvelopeMethod::simplex);
    std::vector<double> vals(r.u.values().begin(), r.u.values().end());
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] -= (*L.support)(lat->point(k));
    z = MeshFunction(lat, std::move(vals));
  }
  ABPOptions opt;
  opt.stencil_width = effective_stencil_width(c.config.scheme, lat->h());
  opt.measure = c.config.measure;
  const ABPReport rep = abp_check(*z, c.config.abp_C, opt);
  std::ostringstream json;
  rep.write_json(json);
  write_file_atomic(path_in(c.out_dir, "abp.json"), json.str());
  std::ostringstream viol;
  rep.write_violations_csv(viol);
  write_file_atomic(path_in(c.out_dir, "abp_violations.csv"), viol.str());
  c.out << "empirical C " << rep.empirical_C << " (allowed " << rep.C << "): "
        << (rep.pass ? "pass" : "FAIL") << '\n';
  return rep.pass ? 0 : 1;
}

int cmd_envelope(Context& c) {
  const EnvelopeSamples s =
      EnvelopeSamples::on_boundary(c.config.domain, c.config.problem.g, c.config.envelope_samples);
  std::vector<Vec2> points = c.config.envelope_points;
  if (points.empty()) {
    const Lattice lat(c.config.domain, c.config.h, c.config.boundary_mode);
    for (std::size_t k = 0; k < lat.interior_count(); ++k) points.push_back(lat.point(k));
  }
  std::ostringstream csv;
  csv << "x,y,value\n";
  csv.precision(17);
  for (const Vec2 p : points) csv << p.x << ',' << p.y << ',' << convex_envelope(s, p).value << '\n';
  write_file_atomic(path_in(c.out_dir, "envelope.csv"), csv.str());
  c.out << "evaluated the boundary-data envelope at " << points.size() << " points\n";
  return 0;
}

int cmd_study(Context& c) {
  const StudyReport r = run_refinement_study(c.config);
  write_study_outputs(r, c.out_dir, c.config.timing);
  std::ostringstream table;
  r.write_table_csv(table, c.config.timing);
  c.out << table.str();
  if (r.boundary.alpha) c.out << "boundary deficit exponent " << *r.boundary.alpha << '\n';
  for (const std::string& f : r.failures) c.out << "FAIL " << f << '\n';
  return r.passed() ? 0 : 1;
}

int cmd_selftest(Context& c) {
  bool ok = true;
  for (const SuiteResult& s : run_selftests(c.config.seed)) {
    c.out << (s.pass ? "PASS " : "FAIL ") << s.name << ": " << s.detail << '\n';
    ok &= s.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete convex mesh functions and Monge-Ampere tools", "dcm"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Config file (key = value lines)");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Seed for randomized checks");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve", "Solve the configured Monge-Ampere problem"},
      {"measure", "Discrete Monge-Ampere measure of a mesh function"},
      {"check-abp", "Check the discrete ABP lower bound"},
      {"envelope", "Convex envelope of the boundary data"},
      {"refine-study", "Refinement study with error tables and probes"},
      {"selftest", "Run the property suites"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    Context c{config_path.empty() ? make_run_config(ConfigFile{}) : load_run_config(config_path),
              out_dir, out};
    if (seed) c.config.seed = *seed;
    if (cmd == "solve") return cmd_solve(c);
    if (cmd == "measure") return cmd_measure(c);
    if (cmd == "check-abp") return cmd_abp(c);
    if (cmd == "envelope") return cmd_envelope(c);
    if (cmd == "refine-study") return cmd_study(c);
    return cmd_selftest(c);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "solver failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dcm
