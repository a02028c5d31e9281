#include <benchmark/benchmark.h>

#include <cmath>

#include "dcm/config.hpp"
#include "dcm/measure.hpp"
#include "dcm/scheme.hpp"

using namespace dcm;

namespace {

LatticePtr unit_box(double h) {
  return std::make_shared<const Lattice>(ConvexDomain::box({0, 0}, {1, 1}), h, BoundaryMode::projected);
}

double spacing(const benchmark::State& state) { return 1.0 / static_cast<double>(state.range(0)); }

}  // namespace

static void BM_Subdifferential(benchmark::State& state) {
  auto lat = unit_box(spacing(state));
  const MeshFunction v = MeshFunction::sample(lat, [](Vec2 x) { return std::exp(0.5 * dot(x, x)); });
  const std::size_t node = lat->interior_count() / 2;
  for (auto _ : state) benchmark::DoNotOptimize(subdifferential(v, node).area);
}
BENCHMARK(BM_Subdifferential)->Arg(8)->Arg(16)->Arg(32);

static void BM_MAMeasure(benchmark::State& state) {
  auto lat = unit_box(spacing(state));
  const MeshFunction v = MeshFunction::sample(lat, [](Vec2 x) { return std::exp(0.5 * dot(x, x)); });
  for (auto _ : state) benchmark::DoNotOptimize(ma_measure(v).total);
  state.counters["nodes"] = static_cast<double>(lat->interior_count());
}
BENCHMARK(BM_MAMeasure)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_Solve(benchmark::State& state) {
  auto lat = unit_box(spacing(state));
  const MAProblem p = builtin_problem(ProblemKind::exp, lat->domain());
  SchemeConfig c;
  c.tol_residual = 1e-8;
  int iters = 0;
  for (auto _ : state) {
    const SolveResult r = solve(p, lat, c, {.compute_mass = false});
    iters = r.report.iterations;
    benchmark::DoNotOptimize(r.u.max_abs());
  }
  state.counters["iterations"] = iters;
}
BENCHMARK(BM_Solve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_Envelope(benchmark::State& state) {
  const ConvexDomain box = ConvexDomain::box({0, 0}, {1, 1});
  const EnvelopeSamples s =
      EnvelopeSamples::on_boundary(box, [](Vec2 x) { return 0.5 * dot(x, x); }, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(convex_envelope(s, {0.4, 0.55}).value);
}
BENCHMARK(BM_Envelope)->Arg(64)->Arg(200)->Arg(400);

BENCHMARK_MAIN();
