#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dcm/error.hpp"
#include "dcm/principle.hpp"
#include "dcm/scheme.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

LatticePtr unit_box(double h) {
  return std::make_shared<const Lattice>(ConvexDomain::box({0, 0}, {1, 1}), h, BoundaryMode::projected);
}

MAProblem quadratic_problem() {
  MAProblem p;
  p.f = [](Vec2) { return 1.0; };
  p.g = [](Vec2 x) { return 0.5 * (x.x * x.x + x.y * x.y); };
  p.exact = p.g;
  return p;
}

MAProblem exp_problem() {
  MAProblem p;
  p.f = [](Vec2 x) {
    const double r2 = x.x * x.x + x.y * x.y;
    return (1 + r2) * std::exp(r2);
  };
  p.g = [](Vec2 x) { return std::exp(0.5 * (x.x * x.x + x.y * x.y)); };
  p.exact = p.g;
  return p;
}

// Minimum over stencil pairs, using exact-step second differences only.
std::optional<double> reference_operator(const MeshFunction& u, std::size_t k, const DirectionStencil& s) {
  double best = INFINITY;
  for (const auto& pr : s.pairs()) {
    const auto d1 = second_difference(u, k, s.directions()[pr[0]]);
    const auto d2 = second_difference(u, k, s.directions()[pr[1]]);
    if (!d1 || !d2) return std::nullopt;
    best = std::min(best, std::max(*d1, 0.0) * std::max(*d2, 0.0) + std::min(*d1, 0.0) + std::min(*d2, 0.0));
  }
  return best;
}

}  // namespace

TEST_CASE("operator examples") {
  auto lat = std::make_shared<const Lattice>(ConvexDomain::box({-1, -1}, {1, 1}), 0.125, BoundaryMode::exact);
  const DirectionStencil s(2);
  const MeshFunction aff = MeshFunction::sample(lat, [](Vec2 x) { return x.x - 3 * x.y; });
  const MeshFunction iso = MeshFunction::sample(lat, [](Vec2 x) { return 0.5 * (x.x * x.x + x.y * x.y); });
  const MeshFunction sad = MeshFunction::sample(lat, [](Vec2 x) { return 0.5 * (x.x * x.x - x.y * x.y); });
  for (std::size_t k = 0; k < lat->interior_count(); ++k) {
    CHECK(std::abs(ma_operator(aff, k, s)) < 1e-10);
    CHECK(ma_operator(iso, k, s) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ma_operator(sad, k, s) <= -1.0 + 1e-10);
  }
  CHECK(pair_value(1.0, -1.0) == -1.0);
  CHECK(pair_value(2.0, 3.0) == 6.0);
  CHECK(pair_value(-1.0, -2.0) == -3.0);
}

TEST_CASE("operator agrees with a direct pair minimum") {
  std::mt19937_64 gen(6);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::box({-1, -1}, {1, 1}), 0.125, BoundaryMode::exact);
  for (int w = 1; w <= 3; ++w) {
    const DirectionStencil s(w);
    const MeshFunction u = oracle::random_convex(lat, gen, 6, 0.5);
    std::size_t compared = 0;
    for (std::size_t k = 0; k < lat->interior_count(); ++k) {
      if (auto ref = reference_operator(u, k, s)) {
        CHECK(ma_operator(u, k, s) == doctest::Approx(*ref).epsilon(1e-12));
        ++compared;
      }
    }
    CHECK(compared > 0);
  }
}

TEST_CASE("consistency on quadratics") {
  const std::vector<Quadratic> iso{{1, 0, 1}};
  CHECK(consistency_test(DirectionStencil(2), iso).max_error < 1e-10);
  const std::vector<Quadratic> aligned{{1, 0, 4}};
  CHECK(consistency_test(DirectionStencil(2), aligned).max_error < 1e-10);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::box({-1, -1}, {1, 1}), 0.125, BoundaryMode::exact);
  const MeshFunction a = MeshFunction::sample(lat, [](Vec2 x) { return 0.5 * x.x * x.x + 2 * x.y * x.y; });
  CHECK(ma_operator(a, lat->interior_count() / 2, DirectionStencil(2)) == doctest::Approx(4.0));

  const std::vector<Quadratic> rot{Quadratic::rotated(1.0, 3.0, std::acos(-1.0) / 6)};
  CHECK(rot[0].det() == doctest::Approx(3.0));
  const double e1 = consistency_test(DirectionStencil(1), rot).max_error;
  const double e3 = consistency_test(DirectionStencil(3), rot).max_error;
  CHECK(e1 > 1e-3);
  CHECK(e3 < e1);
  // Widening the stencil helps the approximate minimum over directions.
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.5, 2.0), ang(0, 3.14159);
  for (int t = 0; t < 20; ++t) {
    const double l1 = u(gen), l2 = u(gen), th = ang(gen);
    auto lat2 = std::make_shared<const Lattice>(ConvexDomain::box({-1, -1}, {1, 1}), 0.125, BoundaryMode::exact);
    const Quadratic q = Quadratic::rotated(l1, l2, th);
    const MeshFunction v = MeshFunction::sample(lat2, [&](Vec2 x) { return q(x); });
    const double lmin = 2 * std::min(l1, l2) / 2;  // eigenvalues of D^2 q are l1, l2
    const double got = lambda1_h(v, lat2->interior_count() / 2, DirectionStencil(3));
    CHECK(got >= lmin - 1e-10);
    CHECK(got <= 1.05 * lmin + 1e-10);
  }
}

TEST_CASE("monotonicity of the scheme") {
  for (int w : {1, 2, 3}) {
    const MonotonicityResult r = monotonicity_test(DirectionStencil(w), 2000, 40 + w);
    CHECK(r.pass);
    CHECK(r.trials == 2000);
    CHECK_FALSE(r.counterexample.has_value());
  }
  // Direct check: raising any off-center value never lowers MA_h.
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(-1, 1), up(0, 1);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1), 0.2, BoundaryMode::projected);
  const DirectionStencil s(2);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(lat->size());
    for (double& x : v) x = u(gen);
    const std::size_t k = gen() % lat->interior_count();
    const double before = ma_operator(MeshFunction(lat, v), k, s);
    const std::size_t j = gen() % lat->size();
    if (j == k) continue;
    v[j] += up(gen);
    CHECK(ma_operator(MeshFunction(lat, v), k, s) >= before);
  }
}

TEST_CASE("center monotonicity supports the bisection bracket") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(-1, 1);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1), 0.15, BoundaryMode::projected);
  const MAOperator op(*lat, DirectionStencil(2));
  std::vector<double> v(lat->size());
  for (double& x : v) x = u(gen);
  for (std::size_t k = 0; k < lat->interior_count(); ++k) {
    double prev = INFINITY;
    for (int i = 0; i <= 40; ++i) {
      const double val = op.evaluate(v, k, -3.0 + 0.15 * i);
      CHECK(val <= prev);
      prev = val;
    }
    const double f = 0.5 + 0.01 * static_cast<double>(k % 7);
    const double c = op.solve_local(v, k, f, 60);
    CHECK(op.evaluate(v, k, c) == doctest::Approx(f).epsilon(1e-8));
  }
}

TEST_CASE("quadratic data is solved exactly") {
  const MAProblem p = quadratic_problem();
  SchemeConfig c;
  c.tol_residual = 1e-10;
  for (double h : {0.125, 0.0625}) {
    auto lat = unit_box(h);
    const SolveResult r = solve(p, lat, c);
    for (std::size_t k = 0; k < lat->size(); ++k) CHECK(std::abs(r.u[k] - p.g(lat->point(k))) <= 10 * c.tol_residual);
    CHECK(r.report.final_residual <= c.tol_residual);
    CHECK(r.report.discrete_convex);
    CHECK(!r.report.residual_history.empty());
    // The history starts with the residual of the initial guess.
    CHECK(r.report.iterations + 1 == static_cast<int>(r.report.residual_history.size()));
    for (std::size_t b = lat->interior_count(); b < lat->size(); ++b) CHECK(r.u[b] == p.g(lat->point(b)));
    CHECK(barrier_compare(r.u, harmonic_solve(lat, p.g)).holds);
  }
}

TEST_CASE("affine data with zero source") {
  MAProblem p;
  p.f = [](Vec2) { return 0.0; };
  p.g = [](Vec2 x) { return 1 + 0.5 * x.x - 0.25 * x.y; };
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0.5, 0.5}, 0.5), 0.1, BoundaryMode::projected);
  SchemeConfig c;
  const SolveResult r = solve(p, lat, c);
  for (std::size_t k = 0; k < lat->size(); ++k) CHECK(std::abs(r.u[k] - p.g(lat->point(k))) < 1e-9);
  CHECK(r.report.ma_total_mass < 1e-12);
}

TEST_CASE("explicit euler reaches the same discrete solution") {
  const MAProblem p = exp_problem();
  auto lat = unit_box(0.125);
  SchemeConfig gs;
  gs.tol_residual = 1e-9;
  SchemeConfig eu = gs;
  eu.solver = SolverKind::explicit_euler;
  const SolveResult a = solve(p, lat, gs);
  const SolveResult b = solve(p, lat, eu);
  CHECK(b.report.dt > 0.0);
  double diff = 0.0;
  for (std::size_t k = 0; k < lat->size(); ++k) diff = std::max(diff, std::abs(a.u[k] - b.u[k]));
  CHECK(diff < 1e-7);
}

TEST_CASE("smooth solution error decreases under refinement") {
  const MAProblem p = exp_problem();
  SchemeConfig c;
  double prev = INFINITY;
  for (double h : {0.125, 0.0625, 0.03125}) {
    auto lat = unit_box(h);
    const SolveResult r = solve(p, lat, c);
    double err = 0.0;
    for (std::size_t k = 0; k < lat->interior_count(); ++k) {
      if (lat->distance_to_boundary(k) >= 0.2) err = std::max(err, std::abs(r.u[k] - p.g(lat->point(k))));
    }
    CHECK(err < prev);
    prev = err;
    CHECK(r.report.discrete_convex);
    CHECK(barrier_compare(r.u, harmonic_solve(lat, p.g)).holds);
  }
}

TEST_CASE("discrete comparison for ordered sources") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0, 1);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1), 0.2, BoundaryMode::projected);
  for (int t = 0; t < 5; ++t) {
    const double a = u(gen), b = u(gen), extra = u(gen);
    MAProblem p1;
    p1.g = [](Vec2 x) { return x.x * x.x + 0.3 * x.y; };
    p1.f = [=](Vec2 x) { return 0.5 + a * x.x * x.x + b * std::abs(x.y); };
    MAProblem p2 = p1;
    p2.f = [=](Vec2 x) { return 0.5 + a * x.x * x.x + b * std::abs(x.y) + extra * (1 + x.x); };
    SchemeConfig c;
    const SolveResult r1 = solve(p1, lat, c);
    const SolveResult r2 = solve(p2, lat, c);
    for (std::size_t k = 0; k < lat->interior_count(); ++k) CHECK(r1.u[k] >= r2.u[k] - 1e-8);
  }
}

TEST_CASE("input validation and non-convergence") {
  auto lat = unit_box(0.25);
  MAProblem p = quadratic_problem();
  p.f = [](Vec2 x) { return x.x > 0.6 ? -1.0 : 1.0; };
  try {
    solve(p, lat, SchemeConfig{});
    FAIL("negative source accepted");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("node (0.75") != std::string::npos);
  }
  MAProblem q = exp_problem();
  SchemeConfig c;
  c.max_iters = 2;
  c.tol_residual = 1e-14;
  try {
    solve(q, lat, c);
    FAIL("expected non-convergence");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("last residuals") != std::string::npos);
  }
}

TEST_CASE("solve report json") {
  auto lat = unit_box(0.25);
  const SolveResult r = solve(quadratic_problem(), lat, SchemeConfig{});
  std::ostringstream a, b;
  r.report.write_json(a, true);
  r.report.write_json(b, false);
  for (const char* key : {"iterations", "residual_history", "ma_total_mass", "sup_norm"}) {
    CHECK(a.str().find(key) != std::string::npos);
  }
  std::ostringstream c;
  solve(quadratic_problem(), lat, SchemeConfig{}).report.write_json(c, false);
  CHECK(b.str() == c.str());
}

TEST_CASE("stencil width rule") {
  CHECK(width_for_spacing(1.0 / 8) == 2);
  CHECK(width_for_spacing(1.0 / 16) == 2);
  CHECK(width_for_spacing(1.0 / 32) == 3);
  CHECK(width_for_spacing(1.0 / 64) == 4);
  SchemeConfig c;
  CHECK(effective_stencil_width(c, 1.0 / 64) == 2);
  c.stencil_width = 0;
  CHECK(effective_stencil_width(c, 1.0 / 64) == 4);
}

TEST_CASE("envelope of affine data is the data") {
  const ConvexDomain dom = ConvexDomain::disk({0.2, 0.1}, 1.0);
  auto L = [](Vec2 x) { return 0.3 * x.x - 2 * x.y + 1; };
  const EnvelopeSamples s = EnvelopeSamples::on_boundary(dom, L, 40);
  for (const Vec2 x : {Vec2{0.2, 0.1}, Vec2{0.7, 0.3}, Vec2{-0.4, -0.5}}) {
    CHECK(convex_envelope(s, x).value == doctest::Approx(L(x)).epsilon(1e-10));
    CHECK(convex_envelope(s, x, EnvelopeMethod::simplex).value == doctest::Approx(L(x)).epsilon(1e-10));
  }
}

TEST_CASE("envelope at the center of the unit box") {
  const ConvexDomain box = ConvexDomain::box({0, 0}, {1, 1});
  auto g = [](Vec2 x) { return 0.5 * (x.x * x.x + x.y * x.y); };
  const EnvelopeSamples s = EnvelopeSamples::on_boundary(box, g, 64);
  const Vec2 c{0.5, 0.5};
  const double ref = oracle::envelope_by_planes(s.points, s.values, c);
  const EnvelopeValue e = convex_envelope(s, c);
  CHECK(e.value == doctest::Approx(ref).epsilon(1e-10));
  // Every boundary point is at least 1/2 from c, so the chord average is g(c) + 1/8.
  CHECK(e.value == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(e.value >= g(c));
  const EnvelopeValue sx = convex_envelope(s, c, EnvelopeMethod::simplex);
  CHECK(sx.value == doctest::Approx(ref).epsilon(1e-10));
  REQUIRE(sx.support.has_value());
  CHECK((*sx.support)(c) == doctest::Approx(sx.value).epsilon(1e-10));
  for (std::size_t k = 0; k < s.points.size(); ++k) CHECK((*sx.support)(s.points[k]) <= s.values[k] + 1e-10);
  CHECK(convex_envelope(box, g, 64, c) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("envelope reproduces convex data and is convex") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0, 1);
  const ConvexDomain dom = ConvexDomain::polygon({{0, 0}, {1.2, 0.1}, {1.0, 0.9}, {0.1, 1.0}});
  auto g = [](Vec2 x) { return std::exp(x.x - x.y) + 0.3 * x.y * x.y; };
  const EnvelopeSamples s = EnvelopeSamples::on_boundary(dom, g, 48);
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    CHECK(std::abs(convex_envelope(s, s.points[k]).value - s.values[k]) <= 1e-8);
  }
  const Vec2 ctr = dom.centroid();
  for (int t = 0; t < 60; ++t) {
    const Vec2 a = ctr + 0.4 * Vec2{u(gen) - 0.5, u(gen) - 0.5};
    const Vec2 b = ctr + 0.4 * Vec2{u(gen) - 0.5, u(gen) - 0.5};
    const double ua = convex_envelope(s, a).value, ub = convex_envelope(s, b).value;
    CHECK(convex_envelope(s, 0.5 * (a + b)).value <= 0.5 * (ua + ub) + 1e-10);
    CHECK(ua == doctest::Approx(oracle::envelope_by_planes(s.points, s.values, a)).epsilon(1e-9));
    CHECK(convex_envelope(s, a, EnvelopeMethod::simplex).value == doctest::Approx(ua).epsilon(1e-9));
    // g is convex, so its restriction to the boundary has an envelope above it.
    CHECK(ua >= g(a) - 1e-12);
    // Below the affine interpolant of any boundary triple whose hull contains a.
    for (int r = 0; r < 10; ++r) {
      const std::size_t i = gen() % s.points.size(), j = gen() % s.points.size(), k = gen() % s.points.size();
      const Vec2 p = s.points[i], q = s.points[j], w = s.points[k];
      const double det = (q.x - p.x) * (w.y - p.y) - (q.y - p.y) * (w.x - p.x);
      if (std::abs(det) < 1e-9) continue;
      const double l1 = ((q.x - a.x) * (w.y - a.y) - (q.y - a.y) * (w.x - a.x)) / det;
      const double l2 = ((w.x - a.x) * (p.y - a.y) - (w.y - a.y) * (p.x - a.x)) / det;
      const double l3 = 1 - l1 - l2;
      if (l1 < 0 || l2 < 0 || l3 < 0) continue;
      CHECK(ua <= l1 * s.values[i] + l2 * s.values[j] + l3 * s.values[k] + 1e-10);
    }
  }
  // More than 200 samples takes the simplex path.
  const EnvelopeSamples big = EnvelopeSamples::on_boundary(dom, g, 260);
  const double v = convex_envelope(big, ctr).value;
  CHECK(v == doctest::Approx(convex_envelope(big, ctr, EnvelopeMethod::enumeration).value).epsilon(1e-9));
  CHECK_THROWS_AS(EnvelopeSamples::on_boundary(dom, g, 2), InputError);
  CHECK_THROWS_AS(convex_envelope(s, {3.0, 3.0}), PreconditionError);
}

TEST_CASE("stability table") {
  MAProblem aff;
  aff.f = [](Vec2) { return 0.0; };
  aff.g = [](Vec2 x) { return 1 + 0.5 * x.x - 0.25 * x.y; };
  const std::vector<MAProblem> ps{quadratic_problem(), aff, exp_problem()};
  const std::vector<double> hs{0.125, 0.0625};
  const StabilityReport r = stability_report(ps, hs, SchemeConfig{});
  REQUIRE(r.rows.size() == 6);
  CHECK_FALSE(r.growth_flagged);
  for (const StabilityRow& row : r.rows) CHECK(row.sup_norm > 0.0);
  // Corners are not lattice nodes, so the maxima sit one step away from them.
  const double t = 0.875;
  CHECK(r.rows[0].sup_norm == doctest::Approx(0.5 * (1 + t * t)));
  CHECK(r.rows[2].sup_norm == doctest::Approx(1.5 - 0.25 * (1 - t)));
  CHECK(r.rows[4].sup_norm == doctest::Approx(std::exp(0.5 * (1 + t * t))));
  std::ostringstream out;
  r.write_csv(out);
  CHECK(out.str().find("sup_norm") != std::string::npos);
}
