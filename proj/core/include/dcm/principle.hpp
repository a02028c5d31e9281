#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dcm/measure.hpp"
#include "dcm/meshfn.hpp"

namespace dcm {

struct ABPNodeRecord {
  std::size_t node = 0;
  Vec2 x{};
  double z = 0.0;
  double distance = 0.0;
  double bound_core = 0.0;  // [diam^(d-1) d(x, boundary) M_h(Omega)]^(1/d), d = 2
  double ratio = 0.0;       // -z / bound_core
};

struct ABPReport {
  std::vector<ABPNodeRecord> records;  // nodes with z < 0 only
  double diameter = 0.0;
  double total_mass = 0.0;
  double empirical_C = 0.0;
  double C = 0.0;
  bool pass = true;

  void write_json(std::ostream& out) const;
  void write_violations_csv(std::ostream& out) const;
};

struct ABPOptions {
  int stencil_width = 2;
  double convex_tol = kDefaultConvexTol;
  double boundary_tol = 1e-10;  // z >= -boundary_tol * max(1, max|z|) on boundary
  MeasureOptions measure{};
};

// Lower bound of a discrete convex z with z >= 0 on the boundary, checked at
// every interior node. Precondition failures throw PreconditionError naming
// the node.
ABPReport abp_check(const MeshFunction& z, double C, const ABPOptions& options = {});

struct MaxPrincipleResult {
  bool holds = true;
  double max_interior = 0.0;
  std::size_t node = 0;
};

// Requires Delta_h z >= 0 on interior nodes and z <= 0 on boundary nodes.
MaxPrincipleResult laplace_max_principle_check(const MeshFunction& z, double tol = 1e-12);

struct HarmonicSolveOptions {
  std::size_t direct_limit = 100000;  // unknowns; iterative above
  double iterative_tol = 1e-14;
  int max_iterations = 20000;
};

// Solves Delta_h w = 0 on interior nodes with w = g on boundary nodes.
MeshFunction harmonic_solve(LatticePtr lattice, const std::function<double(Vec2)>& g,
                            const HarmonicSolveOptions& options = {});
// Same, with the boundary data taken from the boundary nodes of `boundary`.
MeshFunction harmonic_solve(const MeshFunction& boundary, const HarmonicSolveOptions& options = {});

// max over interior nodes of |h^2 Delta_h w|; the scaled residual of the solve.
double harmonic_residual(const MeshFunction& w);

struct BarrierResult {
  bool holds = true;
  double max_violation = 0.0;  // max(u - w), may be negative
  std::size_t node = 0;
};

BarrierResult barrier_compare(const MeshFunction& u, const MeshFunction& w, double tol = 1e-8);

}  // namespace dcm
