#include "dcm/selftest.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <sstream>

#include "dcm/interp.hpp"
#include "dcm/measure.hpp"
#include "dcm/principle.hpp"
#include "dcm/rng.hpp"
#include "dcm/scheme.hpp"

namespace dcm {
namespace {

using Check = std::function<SuiteResult()>;

SuiteResult monotone(std::uint64_t seed) {
  const MonotonicityResult r = monotonicity_test(DirectionStencil(2), 10000, seed);
  SuiteResult s{"monotonicity", r.pass, "10000 trials"};
  if (!r.pass) s.detail = r.counterexample->description;
  return s;
}

SuiteResult consistency(std::uint64_t) {
  const Quadratic q = Quadratic::rotated(1.0, 3.0, std::acos(-1.0) / 6.0);
  const std::vector<Quadratic> qs{q};
  const double e1 = consistency_test(DirectionStencil(1), qs).max_error;
  const double e3 = consistency_test(DirectionStencil(3), qs).max_error;
  std::ostringstream d;
  d << "rotated quadratic error W=1 " << e1 << ", W=3 " << e3;
  return {"consistency", e1 > 0.0 && e3 < e1, d.str()};
}

SuiteResult quadratic_mass(std::uint64_t) {
  double worst = 0.0;
  for (double h : {0.25, 0.125}) {
    auto lat = std::make_shared<const Lattice>(ConvexDomain::box({-1, -1}, {1, 1}), h,
                                               BoundaryMode::exact);
    const MeshFunction v = MeshFunction::sample(lat, [](Vec2 x) { return 0.5 * dot(x, x); });
    for (double m : ma_measure(v).node_masses) worst = std::max(worst, std::abs(m - h * h));
  }
  std::ostringstream d;
  d << "max |mass - h^2| = " << worst;
  return {"quadratic mass", worst <= 1e-12, d.str()};
}

SuiteResult max_principle(std::uint64_t seed) {
  Rng rng(seed);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1.0), 0.15,
                                             BoundaryMode::projected);
  int held = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> b(lat->size(), 0.0);
    for (std::size_t k = lat->interior_count(); k < lat->size(); ++k) b[k] = -rng.uniform(0.0, 1.0);
    const MeshFunction w = harmonic_solve(MeshFunction(lat, b));
    const Quadratic q = Quadratic::rotated(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 3));
    double top = -1e300;
    for (std::size_t k = lat->interior_count(); k < lat->size(); ++k) top = std::max(top, q(lat->point(k)));
    std::vector<double> z(lat->size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = w[k] + q(lat->point(k)) - top;
    held += laplace_max_principle_check(MeshFunction(lat, z)).holds ? 1 : 0;
  }
  return {"laplace maximum principle", held == 20, std::to_string(held) + "/20 instances"};
}

SuiteResult envelope(std::uint64_t seed) {
  Rng rng(seed);
  const ConvexDomain dom = ConvexDomain::box({0, 0}, {1, 1});
  auto g = [](Vec2 x) { return std::exp(x.x) + (x.y - 0.3) * (x.y - 0.3); };
  const EnvelopeSamples s = EnvelopeSamples::on_boundary(dom, g, 64);
  double repro = 0.0;
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    repro = std::max(repro, std::abs(convex_envelope(s, s.points[k]).value - s.values[k]));
  }
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    const Vec2 a{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    const Vec2 b{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
    const double mid = convex_envelope(s, 0.5 * (a + b)).value;
    const double avg = 0.5 * (convex_envelope(s, a).value + convex_envelope(s, b).value);
    bad += mid > avg + 1e-10 ? 1 : 0;
  }
  std::ostringstream d;
  d << "boundary reproduction " << repro << ", midpoint violations " << bad;
  return {"convex envelope", repro <= 1e-8 && bad == 0, d.str()};
}

SuiteResult axis_linearity(std::uint64_t seed) {
  Rng rng(seed);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0.1, 0}, 1.0), 0.1,
                                             BoundaryMode::projected);
  std::vector<double> vals(lat->size());
  for (double& v : vals) v = rng.uniform(-1, 1);
  const MeshFunction v(lat, vals);
  const PLFunction iv = interpolate(v);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = rng.index(lat->interior_count());
    const Axis a = rng.index(2) == 0 ? Axis::plus_x : Axis::plus_y;
    const AxisArm& arm = lat->arm(k, a);
    const double s = rng.uniform(0.0, 1.0);
    const Vec2 p = (1.0 - s) * lat->point(k) + s * lat->point(arm.node);
    worst = std::max(worst, std::abs(iv(p) - ((1.0 - s) * v[k] + s * v[arm.node])));
  }
  std::ostringstream d;
  d << "max deviation " << worst;
  return {"axis linearity", worst <= 1e-12, d.str()};
}

SuiteResult quadratic_solve(std::uint64_t) {
  MAProblem p;
  p.f = [](Vec2) { return 1.0; };
  p.g = [](Vec2 x) { return 0.5 * dot(x, x); };
  SchemeConfig c;
  c.tol_residual = 1e-10;
  auto lat = std::make_shared<const Lattice>(p.domain, 0.125, BoundaryMode::projected);
  const SolveResult r = solve(p, lat, c);
  double err = 0.0;
  for (std::size_t k = 0; k < lat->size(); ++k) err = std::max(err, std::abs(r.u[k] - p.g(lat->point(k))));
  std::ostringstream d;
  d << "nodal error " << err << " after " << r.report.iterations << " sweeps";
  return {"exact quadratic solve", err <= 10 * c.tol_residual, d.str()};
}

}  // namespace

std::vector<SuiteResult> run_selftests(std::uint64_t seed) {
  const std::vector<std::function<SuiteResult(std::uint64_t)>> suites{
      monotone, consistency, quadratic_mass, max_principle, envelope, axis_linearity,
      quadratic_solve};
  std::vector<SuiteResult> out;
  for (const auto& suite : suites) {
    try {
      out.push_back(suite(seed));
    } catch (const std::exception& e) {
      out.push_back({"suite", false, e.what()});
    }
  }
  return out;
}

}  // namespace dcm
