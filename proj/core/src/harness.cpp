#include "dcm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dcm/error.hpp"
#include "dcm/measure.hpp"
#include "dcm/principle.hpp"
#include "dcm/rng.hpp"

namespace dcm {
namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw InputError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

BoundaryProbe boundary_adherence_probe(const std::vector<MeshFunction>& solutions,
                                       const ScalarField& g,
                                       const std::optional<ScalarField>& exact) {
  BoundaryProbe probe;
  std::vector<double> lx;
  std::vector<double> ly;
  for (const MeshFunction& u : solutions) {
    const Lattice& lat = u.lattice();
    const double h = lat.h();
    const EnvelopeSamples samples = EnvelopeSamples::at_boundary_nodes(u);
    const MeshFunction w = harmonic_solve(u.lattice_ptr(), g);
    for (int shell : {1, 2, 4}) {
      ShellRow row;
      row.h = h;
      row.shell = shell;
      row.distance = shell * h;
      double err = 0.0;
      for (std::size_t k = 0; k < lat.interior_count(); ++k) {
        if (std::abs(lat.distance_to_boundary(k) - row.distance) > 0.5 * h) continue;
        ++row.nodes;
        const Vec2 x = lat.point(k);
        const double U = convex_envelope(samples, x).value;
        row.deficit = std::max(row.deficit, U - u[k]);
        row.barrier_excess = std::max(row.barrier_excess, u[k] - w[k]);
        if (exact) err = std::max(err, std::abs(u[k] - (*exact)(x)));
      }
      if (exact) row.abs_err = err;
      if (row.nodes > 0 && row.deficit > 1e-12) {
        lx.push_back(std::log(row.distance));
        ly.push_back(std::log(row.deficit));
      }
      probe.rows.push_back(row);
    }
  }
  probe.fit_points = lx.size();
  if (lx.size() >= 2) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      mx += lx[k];
      my += ly[k];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    if (sxx > 0.0) probe.alpha = sxy / sxx;
  }
  return probe;
}

void BoundaryProbe::write_csv(std::ostream& out) const {
  out << "h,shell,distance,nodes,abs_err,deficit,barrier_excess\n";
  for (const ShellRow& r : rows) {
    out << fmt(r.h) << ',' << r.shell << ',' << fmt(r.distance) << ',' << r.nodes << ','
        << (r.abs_err ? fmt(*r.abs_err) : "") << ',' << fmt(r.deficit) << ','
        << fmt(r.barrier_excess) << '\n';
  }
}

ConvexityProbe convexity_of_limit_probe(const std::vector<MeshFunction>& solutions,
                                        const CompactSet& K, int segments, std::uint64_t seed) {
  ConvexityProbe probe;
  const std::size_t first = solutions.size() > 2 ? solutions.size() - 2 : 0;
  for (std::size_t s = first; s < solutions.size(); ++s) {
    const MeshFunction& u = solutions[s];
    const ConvexDomain& dom = u.lattice().domain();
    const PLFunction iu = interpolate(u);
    const auto [lo, hi] = K.bounding_box(dom);
    Rng rng(seed);
    auto draw = [&]() {
      for (int tries = 0; tries < 1000; ++tries) {
        const Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (K.contains(dom, p)) return p;
      }
      throw PreconditionError("compact set is too thin to sample");
    };
    ConvexityProbeRow row;
    row.h = u.lattice().h();
    for (int k = 0; k < segments; ++k) {
      const Vec2 a = draw();
      const Vec2 b = draw();
      const double t = rng.uniform(0.0, 1.0);
      const double mid = iu(t * a + (1.0 - t) * b);
      row.max_violation = std::max(row.max_violation, mid - (t * iu(a) + (1.0 - t) * iu(b)));
    }
    row.eps_constant = row.max_violation / row.h;
    probe.rows.push_back(row);
  }
  if (probe.rows.size() == 2) {
    const double coarse = probe.rows[0].max_violation;
    const double fine = probe.rows[1].max_violation;
    probe.shrinking = fine <= 1e-12 || fine < coarse;
  }
  return probe;
}

StudyReport run_refinement_study(const RunConfig& config) {
  StudyReport report;
  report.problem = config.problem.name;
  report.delta = config.compact_delta();
  report.has_exact = config.problem.exact.has_value();
  const CompactSet K = CompactSet::inner(report.delta);
  std::vector<MeshFunction> solutions;

  for (double h : config.h_values) {
    StudyRecord rec;
    rec.h = h;
    std::string stage = "lattice";
    try {
      auto lat = std::make_shared<const Lattice>(config.domain, h, config.boundary_mode);
      rec.stencil_width = effective_stencil_width(config.scheme, h);
      stage = "solve";
      SolveOptions opts;
      opts.compute_mass = true;
      const SolveResult res = solve(config.problem, lat, config.scheme, opts);
      const MeshFunction& u = res.u;
      rec.iters = res.report.iterations;
      rec.seconds = res.report.seconds;
      rec.final_residual = res.report.final_residual;
      rec.ma_mass = res.report.ma_total_mass;
      rec.sup_norm = res.report.sup_norm;
      rec.discrete_convex = res.report.discrete_convex;
      solutions.push_back(u);

      if (config.problem.exact) {
        stage = "errors";
        const ScalarField& ex = *config.problem.exact;
        rec.interp_err_K = sup_error_on_compact(u, ex, K, config.sample_density);
        double all = 0.0;
        double in_k = 0.0;
        double shell = 0.0;
        for (std::size_t k = 0; k < lat->size(); ++k) {
          const double e = std::abs(u[k] - ex(lat->point(k)));
          all = std::max(all, e);
          if (lat->distance_to_boundary(k) >= report.delta) in_k = std::max(in_k, e);
          if (lat->is_interior(k) && lat->distance_to_boundary(k) <= 2.0 * h + 1e-12) {
            shell = std::max(shell, e);
          }
        }
        rec.sup_err_K = in_k;
        rec.sup_err_all = all;
        rec.shell_err = shell;
      }
      stage = "lipschitz";
      rec.lipschitz_K = lipschitz_modulus(u, K);

      stage = "barrier";
      const BarrierResult bar = barrier_compare(u, harmonic_solve(lat, config.problem.g));
      rec.barrier_violation = bar.max_violation;
      rec.barrier_holds = bar.holds;

      stage = "abp";
      const EnvelopeValue L = convex_envelope(EnvelopeSamples::at_boundary_nodes(u),
                                              config.domain.centroid(), EnvelopeMethod::simplex);
      std::vector<double> z(u.values().begin(), u.values().end());
      for (std::size_t k = 0; k < z.size(); ++k) z[k] -= (*L.support)(lat->point(k));
      ABPOptions aopt;
      aopt.stencil_width = rec.stencil_width;
      const ABPReport abp = abp_check(MeshFunction(lat, std::move(z)), config.abp_C, aopt);
      rec.abp_empirical_C = abp.empirical_C;
      rec.abp_pass = abp.pass;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.failure = stage + ": " + e.what();
    }
    report.records.push_back(rec);
  }

  const double tol10 = 10.0 * config.scheme.tol_residual;
  for (std::size_t k = 1; k < report.records.size(); ++k) {
    StudyRecord& fine = report.records[k];
    const StudyRecord& coarse = report.records[k - 1];
    if (!fine.sup_err_K || !coarse.sup_err_K) continue;
    if (*fine.sup_err_K > tol10 && *coarse.sup_err_K > tol10) {
      fine.order = std::log(*coarse.sup_err_K / *fine.sup_err_K) / std::log(coarse.h / fine.h);
    }
  }

  for (const StudyRecord& r : report.records) {
    std::ostringstream tag;
    tag << "h=" << r.h << ": ";
    if (!r.ok) report.failures.push_back(tag.str() + r.failure);
    if (r.ok && !r.barrier_holds) {
      report.failures.push_back(tag.str() + "harmonic barrier violated by " + fmt(r.barrier_violation));
    }
    if (r.ok && !r.abp_pass) {
      report.failures.push_back(tag.str() + "ABP ratio " + fmt(r.abp_empirical_C) + " exceeds C");
    }
  }
  for (std::size_t k = 1; k < report.records.size(); ++k) {
    const StudyRecord& a = report.records[k - 1];
    const StudyRecord& b = report.records[k];
    if (!a.ok || !b.ok || a.h > 1.0 / 16 + 1e-15) continue;
    if (b.ma_mass > 1.25 * a.ma_mass && b.ma_mass > 1e-12) {
      report.mass_gate_ok = false;
      report.failures.push_back("MA mass grew from " + fmt(a.ma_mass) + " to " + fmt(b.ma_mass) +
                                " between h=" + fmt(a.h) + " and h=" + fmt(b.h));
    }
  }

  if (!solutions.empty()) {
    try {
      report.boundary = boundary_adherence_probe(solutions, config.problem.g, config.problem.exact);
    } catch (const std::exception& e) {
      report.failures.push_back(std::string("boundary probe: ") + e.what());
    }
    try {
      report.convexity = convexity_of_limit_probe(solutions, K, config.probe_segments, config.seed);
      if (!report.convexity.shrinking) {
        report.failures.push_back("convexity probe: violation does not shrink with h");
      }
    } catch (const std::exception& e) {
      report.failures.push_back(std::string("convexity probe: ") + e.what());
    }
  }
  return report;
}

void StudyReport::write_table_csv(std::ostream& out, bool include_timing) const {
  out << "h,sup_err_K,sup_err_all,shell_err,ma_mass,lipschitz_K,sup_norm,iters,seconds,order\n";
  for (const StudyRecord& r : records) {
    auto o = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    out << fmt(r.h) << ',' << o(r.sup_err_K) << ',' << o(r.sup_err_all) << ',' << o(r.shell_err)
        << ',' << fmt(r.ma_mass) << ',' << fmt(r.lipschitz_K) << ',' << fmt(r.sup_norm) << ','
        << r.iters << ',' << fmt(include_timing ? r.seconds : 0.0) << ',' << o(r.order) << '\n';
  }
}

void StudyReport::write_json(std::ostream& out, bool include_timing) const {
  nlohmann::json j;
  j["problem"] = problem;
  j["delta"] = delta;
  j["has_exact"] = has_exact;
  j["mass_gate_ok"] = mass_gate_ok;
  j["passed"] = passed();
  j["failures"] = failures;
  auto& recs = j["records"] = nlohmann::json::array();
  for (const StudyRecord& r : records) {
    recs.push_back({{"h", r.h},
                    {"stencil_width", r.stencil_width},
                    {"ok", r.ok},
                    {"failure", r.failure},
                    {"sup_err_K", opt_json(r.sup_err_K)},
                    {"interp_err_K", opt_json(r.interp_err_K)},
                    {"sup_err_all", opt_json(r.sup_err_all)},
                    {"shell_err", opt_json(r.shell_err)},
                    {"ma_mass", r.ma_mass},
                    {"lipschitz_K", r.lipschitz_K},
                    {"sup_norm", r.sup_norm},
                    {"iters", r.iters},
                    {"seconds", include_timing ? r.seconds : 0.0},
                    {"order", opt_json(r.order)},
                    {"final_residual", r.final_residual},
                    {"discrete_convex", r.discrete_convex},
                    {"barrier_violation", r.barrier_violation},
                    {"abp_empirical_C", r.abp_empirical_C}});
  }
  auto& shells = j["boundary_probe"]["shells"] = nlohmann::json::array();
  for (const ShellRow& s : boundary.rows) {
    shells.push_back({{"h", s.h},
                      {"shell", s.shell},
                      {"distance", s.distance},
                      {"nodes", s.nodes},
                      {"abs_err", opt_json(s.abs_err)},
                      {"deficit", s.deficit},
                      {"barrier_excess", s.barrier_excess}});
  }
  j["boundary_probe"]["alpha"] = opt_json(boundary.alpha);
  j["boundary_probe"]["predicted_alpha"] = 0.5;
  j["boundary_probe"]["fit_points"] = boundary.fit_points;
  auto& conv = j["convexity_probe"]["rows"] = nlohmann::json::array();
  for (const ConvexityProbeRow& r : convexity.rows) {
    conv.push_back({{"h", r.h}, {"max_violation", r.max_violation}, {"eps_constant", r.eps_constant}});
  }
  j["convexity_probe"]["shrinking"] = convexity.shrinking;
  out << j.dump(2) << '\n';
}

void write_study_outputs(const StudyReport& report, const std::string& dir, bool include_timing) {
  const std::filesystem::path base(dir);
  std::ostringstream table;
  report.write_table_csv(table, include_timing);
  write_file_atomic((base / "table.csv").string(), table.str());
  std::ostringstream json;
  report.write_json(json, include_timing);
  write_file_atomic((base / "report.json").string(), json.str());
  std::ostringstream shells;
  report.boundary.write_csv(shells);
  write_file_atomic((base / "boundary_probe.csv").string(), shells.str());
}

}  // namespace dcm
