#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dcm/error.hpp"
#include "dcm/measure.hpp"
#include "dcm/principle.hpp"
#include "oracles.hpp"

using namespace dcm;

namespace {

LatticePtr unit_box(double h) {
  return std::make_shared<const Lattice>(ConvexDomain::box({0, 0}, {1, 1}), h, BoundaryMode::exact);
}

MeshFunction with_boundary_of(const MeshFunction& w, std::function<double(Vec2)> interior) {
  std::vector<double> v(w.values().begin(), w.values().end());
  for (std::size_t k = 0; k < w.lattice().interior_count(); ++k) v[k] = interior(w.lattice().point(k));
  return MeshFunction(w.lattice_ptr(), v);
}

}  // namespace

TEST_CASE("abp check is vacuous for nonnegative z") {
  auto lat = unit_box(0.125);
  const ABPReport r = abp_check(MeshFunction::sample(lat, [](Vec2 x) { return x.x * x.x + 0.1; }), 5.0);
  CHECK(r.pass);
  CHECK(r.empirical_C == 0.0);
  CHECK(r.records.empty());
}

TEST_CASE("abp check on a centered quadratic matches a direct evaluation") {
  for (double h : {0.25, 0.125}) {
    auto lat = unit_box(h);
    auto z = [](Vec2 x) { return 0.5 * ((x.x - 0.5) * (x.x - 0.5) + (x.y - 0.5) * (x.y - 0.5)) - 0.125; };
    const MeshFunction v = MeshFunction::sample(lat, z);
    const ABPReport r = abp_check(v, 5.0);
    double mass = 0.0;
    for (std::size_t k = 0; k < lat->interior_count(); ++k) mass += oracle::subdifferential_area_by_vertices(v, k);
    CHECK(r.total_mass == doctest::Approx(mass).epsilon(1e-10));
    double want = 0.0;
    std::size_t negative = 0;
    for (std::size_t k = 0; k < lat->interior_count(); ++k) {
      const Vec2 x = lat->point(k);
      if (!(v[k] < 0.0)) continue;
      ++negative;
      const double d = std::min({x.x, x.y, 1 - x.x, 1 - x.y});
      want = std::max(want, -v[k] / std::sqrt(std::sqrt(2.0) * d * mass));
    }
    CHECK(r.records.size() == negative);
    CHECK(r.empirical_C == doctest::Approx(want).epsilon(1e-10));
    CHECK(std::isfinite(r.empirical_C));
    CHECK(r.pass);
    for (const ABPNodeRecord& rec : r.records) CHECK(rec.ratio <= r.empirical_C);
    std::ostringstream js, csv;
    r.write_json(js);
    r.write_violations_csv(csv);
    CHECK(js.str().find("empirical_C") != std::string::npos);
  }
}

TEST_CASE("abp constant of the pyramid stays bounded under refinement") {
  std::vector<double> cs;
  for (double h : {0.125, 0.0625, 0.03125}) {
    auto lat = unit_box(h);
    const MeshFunction z = MeshFunction::sample(lat, [](Vec2 x) { return -std::min({x.x, x.y, 1 - x.x, 1 - x.y}); });
    cs.push_back(abp_check(z, 5.0).empirical_C);
  }
  const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
  CHECK(*lo > 0.0);
  CHECK(*hi <= 2.0 * *lo);
}

TEST_CASE("abp preconditions name the node") {
  auto lat = unit_box(0.125);
  try {
    abp_check(MeshFunction::sample(lat, [](Vec2 x) { return -(x.x - 0.5) * (x.x - 0.5); }), 5.0);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
  CHECK_THROWS_AS(abp_check(MeshFunction::sample(lat, [](Vec2 x) { return x.x - 0.5; }), 5.0), PreconditionError);
}

TEST_CASE("laplace maximum principle examples") {
  auto lat = unit_box(0.125);
  CHECK(laplace_max_principle_check(MeshFunction::zeros(lat)).holds);
  auto saddle = [](Vec2 x) { return x.x * x.x - x.y * x.y; };
  double top = -1e300;
  for (std::size_t b = lat->interior_count(); b < lat->size(); ++b) top = std::max(top, saddle(lat->point(b)));
  const MeshFunction z = MeshFunction::sample(lat, [&](Vec2 x) { return saddle(x) - top; });
  const MaxPrincipleResult r = laplace_max_principle_check(z);
  CHECK(r.holds);
  CHECK(r.max_interior <= 0.0);
  std::vector<double> raised(z.values().begin(), z.values().end());
  raised[lat->interior_count() / 2] = 1.0;
  CHECK_THROWS_AS(laplace_max_principle_check(MeshFunction(lat, raised)), PreconditionError);
  CHECK_THROWS_AS(laplace_max_principle_check(MeshFunction::sample(lat, [](Vec2) { return 1.0; })),
                  PreconditionError);
}

TEST_CASE("harmonic solve reproduces discretely harmonic data") {
  auto disk = std::make_shared<const Lattice>(ConvexDomain::disk({0.02, 0.03}, 1.0), 0.1, BoundaryMode::projected);
  auto box = unit_box(0.0625);
  for (const LatticePtr& lat : {disk, box}) {
    auto aff = [](Vec2 x) { return 1 + 2 * x.x - 0.5 * x.y; };
    const MeshFunction w = harmonic_solve(lat, aff);
    for (std::size_t k = 0; k < lat->size(); ++k) CHECK(std::abs(w[k] - aff(lat->point(k))) < 1e-12);
    CHECK(harmonic_residual(w) <= 1e-12);
  }
  auto saddle = [](Vec2 x) { return x.x * x.x - x.y * x.y; };
  const MeshFunction s = harmonic_solve(box, saddle);
  for (std::size_t k = 0; k < box->size(); ++k) CHECK(std::abs(s[k] - saddle(box->point(k))) < 1e-12);
}

TEST_CASE("harmonic solve with one hot side matches a dense solve") {
  auto lat = unit_box(0.25);
  auto g = [](Vec2 x) { return x.y == 1.0 && x.x > 0.0 && x.x < 1.0 ? 1.0 : 0.0; };
  const MeshFunction w = harmonic_solve(lat, g);
  // Five-point system on the 3 x 3 interior, unknowns ordered by (j, i).
  std::vector<std::vector<double>> A(9, std::vector<double>(9, 0.0));
  std::vector<double> b(9, 0.0);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      const int r = 3 * j + i;
      A[r][r] = 4.0;
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (const auto& n : nb) {
        if (n[0] >= 0 && n[0] < 3 && n[1] >= 0 && n[1] < 3) {
          A[r][3 * n[1] + n[0]] = -1.0;
        } else {
          b[r] += g({0.25 * (n[0] + 1), 0.25 * (n[1] + 1)});
        }
      }
    }
  }
  const std::vector<double> ref = oracle::dense_solve(A, b);
  for (std::size_t k = 0; k < 9; ++k) {
    const Vec2 x = lat->point(k);
    const int i = static_cast<int>(std::lround(x.x / 0.25)) - 1;
    const int j = static_cast<int>(std::lround(x.y / 0.25)) - 1;
    CHECK(w[k] == doctest::Approx(ref[3 * j + i]).epsilon(1e-12));
    CHECK(w[k] > 0.0);
    CHECK(w[k] < 1.0);
    // Mirror across x = 1/2.
    const Vec2 m{1.0 - x.x, x.y};
    for (std::size_t q = 0; q < 9; ++q) {
      if (std::abs(lat->point(q).x - m.x) < 1e-12 && std::abs(lat->point(q).y - m.y) < 1e-12) {
        CHECK(std::abs(w[q] - w[k]) < 1e-13);
      }
    }
  }
}

TEST_CASE("harmonic solve is monotone in the boundary data and bounded by it") {
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> u(0, 1);
  auto lat = std::make_shared<const Lattice>(ConvexDomain::polygon({{0, 0}, {1.5, 0.2}, {1.2, 1.1}, {-0.1, 0.9}}),
                                             0.08, BoundaryMode::projected);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> b1(lat->size(), 0.0), b2(lat->size(), 0.0);
    for (std::size_t k = lat->interior_count(); k < lat->size(); ++k) {
      b1[k] = u(gen) - 0.5;
      b2[k] = b1[k] + u(gen);
    }
    const MeshFunction w1 = harmonic_solve(MeshFunction(lat, b1));
    const MeshFunction w2 = harmonic_solve(MeshFunction(lat, b2));
    const double lo = *std::min_element(b1.begin() + lat->interior_count(), b1.end());
    const double hi = *std::max_element(b1.begin() + lat->interior_count(), b1.end());
    for (std::size_t k = 0; k < lat->interior_count(); ++k) {
      CHECK(w1[k] <= w2[k] + 1e-12);
      CHECK(w1[k] >= lo - 1e-12);
      CHECK(w1[k] <= hi + 1e-12);
    }
    CHECK(harmonic_residual(w1) <= 1e-12);
  }
}

TEST_CASE("barrier comparison") {
  auto lat = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1.0), 0.1, BoundaryMode::projected);
  auto q = [](Vec2 x) { return 0.5 * (x.x * x.x + x.y * x.y); };
  const MeshFunction w = harmonic_solve(lat, q);
  const BarrierResult same = barrier_compare(w, w);
  CHECK(same.holds);
  CHECK(same.max_violation == 0.0);
  CHECK(barrier_compare(MeshFunction::sample(lat, q), w).holds);
  std::mt19937_64 gen(3);
  for (int t = 0; t < 10; ++t) {
    const MeshFunction u = oracle::random_convex(lat, gen, 2 + t, 0.1 * t);
    CHECK(barrier_compare(u, harmonic_solve(u)).holds);
  }
  auto other = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1.0), 0.2, BoundaryMode::projected);
  CHECK_THROWS_AS(barrier_compare(MeshFunction::zeros(other), w), PreconditionError);
  // An equal but separately built lattice is accepted.
  auto twin = std::make_shared<const Lattice>(ConvexDomain::disk({0, 0}, 1.0), 0.1, BoundaryMode::projected);
  CHECK(barrier_compare(MeshFunction::sample(twin, q), w).holds);
}
