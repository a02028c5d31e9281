#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcm/meshfn.hpp"

namespace dcm {

using ScalarField = std::function<double(Vec2)>;

// det D^2 u = f in the domain, u = g on its boundary.
struct MAProblem {
  ConvexDomain domain = ConvexDomain::box({0, 0}, {1, 1});
  ScalarField f;
  ScalarField g;
  std::optional<ScalarField> exact;
  std::string name;
};

enum class SolverKind { explicit_euler, gauss_seidel_bisection };
enum class InitKind { harmonic, boundary_min, custom };

SolverKind parse_solver(const std::string& s);
InitKind parse_init(const std::string& s);
std::string to_string(SolverKind k);
std::string to_string(InitKind k);

struct SchemeConfig {
  int stencil_width = 2;  // 0 selects width_for_spacing(h)
  SolverKind solver = SolverKind::gauss_seidel_bisection;
  double dt = 0.0;  // explicit Euler step; 0 selects the monotonicity bound
  int bisection_iterations = 60;
  double tol_residual = 1e-9;
  int max_iters = 200000;
  InitKind init = InitKind::harmonic;
  double convex_tol = kDefaultConvexTol;
};

// Width growing like h^(-1/2): max(2, ceil(h^(-1/2) / 2)).
int width_for_spacing(double h);
int effective_stencil_width(const SchemeConfig& config, double h);

// Wide-stencil Monge-Ampere operator
//   MA_h[u](x) = min over available orthogonal pairs (e, e_perp) of
//     max(D_e u, 0) max(D_perp u, 0) + min(D_e u, 0) + min(D_perp u, 0).
// The residual of the discrete equation is F_h(u)(x) = -MA_h[u](x) + f(x).
class MAOperator {
 public:
  MAOperator(const Lattice& lattice, const DirectionStencil& stencil);

  double operator()(std::span<const double> u, std::size_t node) const {
    return evaluate(u, node, u[node]);
  }
  // Value with the center replaced by `center`, neighbors taken from u.
  double evaluate(std::span<const double> u, std::size_t node, double center) const;

  // Center value solving MA_h = f with neighbors frozen, by bisection on a
  // bracket where every available second difference is nonnegative.
  double solve_local(std::span<const double> u, std::size_t node, double f,
                     int bisection_iterations) const;

  // Bound on |d MA_h / d u(x)| at the current state, used for the explicit step.
  double center_slope_bound(std::span<const double> u, std::size_t node) const;

  const StencilTable& table() const { return table_; }

 private:
  StencilTable table_;
};

double pair_value(double de, double dperp);

double ma_operator(const MeshFunction& u, std::size_t node, const DirectionStencil& stencil);

struct MonotonicityCounterexample {
  std::size_t trial = 0;
  std::string description;
  double before = 0.0;
  double after = 0.0;
};

struct MonotonicityResult {
  bool pass = true;
  std::size_t trials = 0;
  std::optional<MonotonicityCounterexample> counterexample;
};

// Randomized check that raising off-center values never decreases
// MA_h - f at the center (center value held fixed), and that nodes outside
// the stencil have no influence.
MonotonicityResult monotonicity_test(const DirectionStencil& stencil, std::size_t trials,
                                     std::uint64_t seed = 1);

struct Quadratic {
  double a11 = 1.0;
  double a12 = 0.0;
  double a22 = 1.0;  // q(x) = (a11 x^2 + 2 a12 x y + a22 y^2) / 2
  double det() const { return a11 * a22 - a12 * a12; }
  double operator()(Vec2 x) const {
    return 0.5 * (a11 * x.x * x.x + 2.0 * a12 * x.x * x.y + a22 * x.y * x.y);
  }
  static Quadratic rotated(double lambda1, double lambda2, double angle);
};

struct ConsistencyResult {
  double max_error = 0.0;
  std::vector<double> errors;  // per quadratic, max over interior nodes
};

ConsistencyResult consistency_test(const DirectionStencil& stencil,
                                   std::span<const Quadratic> quadratics, double h = 0.125);

// Per-run record of the nonlinear solve.
struct SolveReport {
  SolverKind solver = SolverKind::gauss_seidel_bisection;
  int iterations = 0;
  std::vector<double> residual_history;
  double final_residual = 0.0;
  double ma_total_mass = 0.0;
  double sup_norm = 0.0;
  double min_lambda = 0.0;      // lambda_{1,h} minimum over the solve stencil
  bool discrete_convex = true;  // min_lambda >= -convex threshold
  double dt = 0.0;              // final explicit step (explicit_euler only)
  double seconds = 0.0;

  void write_json(std::ostream& out, bool include_timing = true) const;
};

struct SolveResult {
  MeshFunction u;
  SolveReport report;
};

struct SolveOptions {
  std::optional<MeshFunction> initial;  // used with InitKind::custom
  bool compute_mass = true;
};

SolveResult solve(const MAProblem& problem, LatticePtr lattice, const SchemeConfig& config,
                  const SolveOptions& options = {});

// Affine function a.x + b.
struct Affine {
  Vec2 slope{};
  double intercept = 0.0;
  double operator()(Vec2 x) const { return dot(slope, x) + intercept; }
};

struct EnvelopeSamples {
  std::vector<Vec2> points;
  std::vector<double> values;

  static EnvelopeSamples on_boundary(const ConvexDomain& domain, const ScalarField& g, int count);
  static EnvelopeSamples at_boundary_nodes(const MeshFunction& v);
};

enum class EnvelopeMethod { automatic, enumeration, simplex };

struct EnvelopeValue {
  double value = 0.0;
  std::optional<Affine> support;  // optimal affine minorant when identified
};

// sup { L(x) : L affine, L <= g at the samples }, a three-variable linear
// program. `automatic` enumerates triangles of samples for <= 200 samples and
// runs a dense simplex above that.
EnvelopeValue convex_envelope(const EnvelopeSamples& samples, Vec2 x,
                              EnvelopeMethod method = EnvelopeMethod::automatic);

double convex_envelope(const ConvexDomain& domain, const ScalarField& g, int boundary_samples,
                       Vec2 x);

struct StabilityRow {
  std::string problem;
  double h = 0.0;
  double sup_norm = 0.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  bool growth_flagged = false;  // some sup norm exceeds the coarsest one by > 10%
  void write_csv(std::ostream& out) const;
};

StabilityReport stability_report(std::span<const MAProblem> problems,
                                 std::span<const double> h_values, const SchemeConfig& config,
                                 BoundaryMode mode = BoundaryMode::projected);

}  // namespace dcm
