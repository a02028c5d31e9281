#include "dcm/scheme.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dcm/error.hpp"
#include "dcm/measure.hpp"
#include "dcm/principle.hpp"
#include "dcm/rng.hpp"

namespace dcm {

SolverKind parse_solver(const std::string& s) {
  if (s == "explicit_euler") return SolverKind::explicit_euler;
  if (s == "gauss_seidel_bisection") return SolverKind::gauss_seidel_bisection;
  throw InputError("unknown solver '" + s + "' (expected explicit_euler or gauss_seidel_bisection)");
}

InitKind parse_init(const std::string& s) {
  if (s == "harmonic") return InitKind::harmonic;
  if (s == "boundary_min") return InitKind::boundary_min;
  if (s == "custom") return InitKind::custom;
  throw InputError("unknown init '" + s + "' (expected harmonic, boundary_min or custom)");
}

std::string to_string(SolverKind k) {
  return k == SolverKind::explicit_euler ? "explicit_euler" : "gauss_seidel_bisection";
}

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::harmonic: return "harmonic";
    case InitKind::boundary_min: return "boundary_min";
    case InitKind::custom: return "custom";
  }
  return "?";
}

int width_for_spacing(double h) {
  return std::max(2, static_cast<int>(std::ceil(0.5 / std::sqrt(h) - 1e-9)));
}

int effective_stencil_width(const SchemeConfig& config, double h) {
  if (config.stencil_width < 0) throw InputError("scheme.stencil_width must be >= 1 or auto");
  return config.stencil_width == 0 ? width_for_spacing(h) : config.stencil_width;
}

double pair_value(double de, double dperp) {
  return std::max(de, 0.0) * std::max(dperp, 0.0) + std::min(de, 0.0) + std::min(dperp, 0.0);
}

MAOperator::MAOperator(const Lattice& lattice, const DirectionStencil& stencil)
    : table_(lattice, stencil) {}

double MAOperator::evaluate(std::span<const double> u, std::size_t node, double center) const {
  const auto forms = table_.forms(node);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : table_.pairs(node)) {
    best = std::min(best, pair_value(forms[p[0]].apply(u, center), forms[p[1]].apply(u, center)));
  }
  return best;
}

double MAOperator::solve_local(std::span<const double> u, std::size_t node, double f,
                               int bisection_iterations) const {
  const auto forms = table_.forms(node);
  const auto pairs = table_.pairs(node);

  // D_k(c) = A_k - B_k c with B_k > 0: every difference decreases in the center.
  struct Line {
    double A, B;
  };
  std::array<Line, 2> lines_buf[64];
  std::vector<std::array<Line, 2>> lines_heap;
  std::span<std::array<Line, 2>> lines;
  if (pairs.size() <= 64) {
    lines = {lines_buf, pairs.size()};
  } else {
    lines_heap.resize(pairs.size());
    lines = lines_heap;
  }
  double hi = std::numeric_limits<double>::infinity();
  double min_bb = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (int s = 0; s < 2; ++s) {
      const DifferenceForm& fm = forms[pairs[k][s]];
      lines[k][s] = {fm.w_plus * u[fm.plus] + fm.w_minus * u[fm.minus], fm.w_center};
      hi = std::min(hi, lines[k][s].A / lines[k][s].B);
    }
    min_bb = std::min(min_bb, lines[k][0].B * lines[k][1].B);
  }
  // At hi some pair has a vanishing difference, so MA_h(hi) <= 0 <= f; at
  // hi - sqrt(f / min B1 B2) every pair product is >= f.
  if (!(f > 0.0)) return hi;
  double lo = hi - std::sqrt(f / min_bb);
  auto ma = [&](double c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& l : lines) best = std::min(best, (l[0].A - l[0].B * c) * (l[1].A - l[1].B * c));
    return best;
  };
  for (int it = 0; it < bisection_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (ma(mid) >= f) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double MAOperator::center_slope_bound(std::span<const double> u, std::size_t node) const {
  const auto forms = table_.forms(node);
  double bound = 0.0;
  for (const auto& p : table_.pairs(node)) {
    const DifferenceForm& a = forms[p[0]];
    const DifferenceForm& b = forms[p[1]];
    const double da = a.apply(u, u[node]);
    const double db = b.apply(u, u[node]);
    bound = std::max(bound, (a.w_center + b.w_center) * (1.0 + std::max({da, db, 0.0})));
  }
  return bound;
}

double ma_operator(const MeshFunction& u, std::size_t node, const DirectionStencil& stencil) {
  if (!u.lattice().is_interior(node)) {
    throw PreconditionError("ma_operator is defined at interior nodes only");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : stencil.pairs()) {
    const Direction e = stencil.directions()[p[0]];
    const Direction q = stencil.directions()[p[1]];
    const auto de = second_difference(u, node, e, StepPolicy::clipped);
    const auto dq = second_difference(u, node, q, StepPolicy::clipped);
    if (de && dq) best = std::min(best, pair_value(*de, *dq));
  }
  if (!std::isfinite(best)) throw PreconditionError("no orthogonal stencil pair available at node");
  return best;
}

// ---------------------------------------------------------------------------
// Property testers

MonotonicityResult monotonicity_test(const DirectionStencil& stencil, std::size_t trials,
                                     std::uint64_t seed) {
  Rng rng(seed);
  const int w = stencil.width();
  auto box = std::make_shared<const Lattice>(
      ConvexDomain::box({0, 0}, {1, 1}), 1.0 / (2 * w + 4), BoundaryMode::projected);
  auto disk = std::make_shared<const Lattice>(ConvexDomain::disk({0.03, -0.02}, 1.0),
                                              1.0 / (w + 2.5), BoundaryMode::projected);
  const MAOperator box_op(*box, stencil);
  const MAOperator disk_op(*disk, stencil);

  MonotonicityResult result;
  result.trials = trials;
  std::vector<double> u;
  for (std::size_t t = 0; t < trials; ++t) {
    const bool use_box = t % 2 == 0;
    const Lattice& lat = use_box ? *box : *disk;
    const MAOperator& op = use_box ? box_op : disk_op;
    u.resize(lat.size());
    const Quadratic q = Quadratic::rotated(rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0),
                                           rng.uniform(0.0, 3.2));
    const double noise = rng.uniform(0.0, 0.2);
    for (std::size_t n = 0; n < u.size(); ++n) u[n] = q(lat.point(n)) + noise * rng.uniform(-1, 1);
    const std::size_t node = rng.index(lat.interior_count());
    const double f = rng.uniform(0.0, 4.0);
    const double before = op(u, node) - f;

    std::vector<double> z = u;
    std::string what;
    const auto forms = op.table().forms(node);
    switch (t % 3) {
      case 0: {
        const DifferenceForm& fm = forms[rng.index(forms.size())];
        const std::size_t target = rng.index(2) == 0 ? fm.plus : fm.minus;
        z[target] += rng.uniform(0.0, 1.0) * std::pow(10.0, -rng.uniform(0.0, 6.0));
        what = "raise one stencil neighbor";
        break;
      }
      case 1:
        for (std::size_t n = 0; n < z.size(); ++n) {
          if (n != node) z[n] += rng.uniform(0.0, 0.5);
        }
        what = "raise all off-center values";
        break;
      default: {
        std::vector<std::size_t> outside;
        for (std::size_t n = 0; n < z.size(); ++n) {
          bool in = n == node;
          for (const DifferenceForm& fm : forms) in |= n == fm.plus || n == fm.minus;
          if (!in) outside.push_back(n);
        }
        if (!outside.empty()) z[outside[rng.index(outside.size())]] += rng.uniform(-1.0, 1.0);
        what = "perturb a node outside the stencil";
        break;
      }
    }
    const double after = op(z, node) - f;
    const bool ok = (t % 3 == 2) ? after == before : after >= before;
    if (!ok) {
      const Vec2 x = lat.point(node);
      std::ostringstream msg;
      msg << what << " at node (" << x.x << ", " << x.y << ") on the "
          << (use_box ? "box" : "disk") << " lattice";
      result.pass = false;
      result.counterexample = MonotonicityCounterexample{t, msg.str(), before, after};
      return result;
    }
  }
  return result;
}

Quadratic Quadratic::rotated(double lambda1, double lambda2, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {lambda1 * c * c + lambda2 * s * s, (lambda1 - lambda2) * c * s,
          lambda1 * s * s + lambda2 * c * c};
}

ConsistencyResult consistency_test(const DirectionStencil& stencil,
                                   std::span<const Quadratic> quadratics, double h) {
  auto lat = std::make_shared<const Lattice>(ConvexDomain::box({-1, -1}, {1, 1}), h,
                                             BoundaryMode::projected);
  const MAOperator op(*lat, stencil);
  ConsistencyResult result;
  for (const Quadratic& q : quadratics) {
    const MeshFunction v = MeshFunction::sample(lat, [&q](Vec2 x) { return q(x); });
    double err = 0.0;
    for (std::size_t n = 0; n < lat->interior_count(); ++n) {
      // only nodes where the full stencil fits
      if (op.table().pairs(n).size() != stencil.pairs().size()) continue;
      err = std::max(err, std::abs(op(v.values(), n) - q.det()));
    }
    result.errors.push_back(err);
    result.max_error = std::max(result.max_error, err);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Nonlinear solve

namespace {

std::string node_text(const Lattice& lat, std::size_t n) {
  std::ostringstream s;
  s << "(" << lat.point(n).x << ", " << lat.point(n).y << ")";
  return s.str();
}

[[noreturn]] void fail_iterations(const std::vector<double>& history, int max_iters) {
  std::ostringstream msg;
  msg << "Monge-Ampere solve did not converge in " << max_iters << " iterations; last residuals:";
  const std::size_t from = history.size() > 8 ? history.size() - 8 : 0;
  for (std::size_t k = from; k < history.size(); ++k) msg << ' ' << history[k];
  throw SolverError(msg.str());
}

}  // namespace

SolveResult solve(const MAProblem& problem, LatticePtr lattice, const SchemeConfig& config,
                  const SolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Lattice& lat = *lattice;
  const std::size_t n_int = lat.interior_count();
  if (!problem.f || !problem.g) throw InputError("problem needs both f and g");
  if (!(config.tol_residual > 0.0)) throw InputError("scheme.tol_residual must be positive");
  if (config.max_iters < 1) throw InputError("scheme.max_iters must be positive");

  std::vector<double> fv(n_int);
  for (std::size_t k = 0; k < n_int; ++k) {
    fv[k] = problem.f(lat.point(k));
    if (!std::isfinite(fv[k])) {
      throw InputError("source f is not finite at node " + node_text(lat, k));
    }
    if (fv[k] < 0.0) {
      std::ostringstream msg;
      msg << "source f = " << fv[k] << " < 0 at node " << node_text(lat, k);
      throw InputError(msg.str());
    }
  }
  std::vector<double> u(lat.size(), 0.0);
  for (std::size_t b = n_int; b < lat.size(); ++b) {
    u[b] = problem.g(lat.point(b));
    if (!std::isfinite(u[b])) throw InputError("boundary data g is not finite at node " + node_text(lat, b));
  }

  switch (config.init) {
    case InitKind::harmonic: {
      const MeshFunction w = harmonic_solve(MeshFunction(lattice, u));
      std::copy(w.values().begin(), w.values().begin() + static_cast<std::ptrdiff_t>(n_int), u.begin());
      break;
    }
    case InitKind::boundary_min: {
      const double gmin = *std::min_element(u.begin() + static_cast<std::ptrdiff_t>(n_int), u.end());
      std::fill(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n_int), gmin);
      break;
    }
    case InitKind::custom: {
      if (!options.initial || options.initial->size() != lat.size()) {
        throw InputError("custom init requires an initial mesh function on the same lattice");
      }
      for (std::size_t k = 0; k < n_int; ++k) u[k] = (*options.initial)[k];
      break;
    }
  }

  const DirectionStencil stencil(effective_stencil_width(config, lat.h()));
  const MAOperator op(lat, stencil);
  SolveReport report;
  report.solver = config.solver;

  auto residual = [&](std::span<const double> values) {
    double r = 0.0;
    for (std::size_t k = 0; k < n_int; ++k) r = std::max(r, std::abs(fv[k] - op(values, k)));
    return r;
  };

  report.residual_history.push_back(residual(u));
  if (config.solver == SolverKind::gauss_seidel_bisection) {
    while (report.residual_history.back() > config.tol_residual) {
      if (report.iterations >= config.max_iters) fail_iterations(report.residual_history, config.max_iters);
      for (std::size_t k = 0; k < n_int; ++k) {
        u[k] = op.solve_local(u, k, fv[k], config.bisection_iterations);
      }
      ++report.iterations;
      report.residual_history.push_back(residual(u));
    }
  } else {
    std::vector<double> ma(n_int);
    double scale = 1.0;
    double last = report.residual_history.back();
    while (last > config.tol_residual) {
      if (report.iterations >= config.max_iters) fail_iterations(report.residual_history, config.max_iters);
      double slope = 0.0;
      for (std::size_t k = 0; k < n_int; ++k) {
        ma[k] = op(u, k);
        slope = std::max(slope, op.center_slope_bound(u, k));
      }
      double dt = 1.0 / slope;
      if (config.dt > 0.0) dt = std::min(dt, config.dt);
      dt *= scale;
      for (std::size_t k = 0; k < n_int; ++k) u[k] += dt * (ma[k] - fv[k]);
      ++report.iterations;
      const double r = residual(u);
      report.residual_history.push_back(r);
      if (r > last) scale *= 0.5;
      last = r;
      report.dt = dt;
    }
  }
  report.final_residual = report.residual_history.back();

  MeshFunction result(lattice, std::move(u));
  report.sup_norm = result.max_abs();
  const ConvexityResult convex = is_discrete_convex(result, stencil, config.convex_tol);
  report.min_lambda = convex.min_lambda;
  report.discrete_convex = convex.convex;
  if (options.compute_mass) {
    MeasureOptions mopt;
    mopt.on_nonconvex = NonconvexPolicy::ignore;
    report.ma_total_mass = ma_measure(result, mopt).total;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(result), std::move(report)};
}

void SolveReport::write_json(std::ostream& out, bool include_timing) const {
  nlohmann::json j;
  j["solver"] = to_string(solver);
  j["iterations"] = iterations;
  j["residual_history"] = residual_history;
  j["final_residual"] = final_residual;
  j["ma_total_mass"] = ma_total_mass;
  j["sup_norm"] = sup_norm;
  j["min_lambda"] = min_lambda;
  j["discrete_convex"] = discrete_convex;
  if (solver == SolverKind::explicit_euler) j["dt"] = dt;
  if (include_timing) j["seconds"] = seconds;
  out << j.dump(2) << '\n';
}

StabilityReport stability_report(std::span<const MAProblem> problems,
                                 std::span<const double> h_values, const SchemeConfig& config,
                                 BoundaryMode mode) {
  StabilityReport report;
  for (const MAProblem& p : problems) {
    double first = 0.0;
    for (std::size_t k = 0; k < h_values.size(); ++k) {
      auto lat = std::make_shared<const Lattice>(p.domain, h_values[k], mode);
      SolveOptions opt;
      opt.compute_mass = false;
      const SolveResult r = solve(p, lat, config, opt);
      report.rows.push_back({p.name, h_values[k], r.report.sup_norm});
      if (k == 0) first = r.report.sup_norm;
      if (r.report.sup_norm > 1.1 * first) report.growth_flagged = true;
    }
  }
  return report;
}

void StabilityReport::write_csv(std::ostream& out) const {
  out << "problem,h,sup_norm\n";
  out.precision(17);
  for (const StabilityRow& r : rows) out << r.problem << ',' << r.h << ',' << r.sup_norm << '\n';
}

}  // namespace dcm
