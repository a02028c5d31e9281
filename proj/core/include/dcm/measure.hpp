#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "dcm/meshfn.hpp"

namespace dcm {

// Which nodes contribute supporting constraints p.(x - x0) <= v(x) - v(x0).
struct ConstraintSet {
  std::optional<double> radius;  // unset: every node of the closed lattice

  static ConstraintSet all_nodes() { return {}; }
  static ConstraintSet radius_limited(double r) { return {r}; }
};

struct HalfPlaneConstraint {
  Vec2 normal;   // x - x0
  double bound;  // v(x) - v(x0)
};

// Discrete subdifferential at an interior node: the convex polygon of slopes
// supporting v at x0 against the constraint set.
struct SubdiffPolytope {
  std::size_t node = 0;
  Vec2 base{};
  std::vector<HalfPlaneConstraint> halfplanes;
  std::vector<Vec2> vertices;  // counterclockwise; empty when the set is empty
  double area = 0.0;
};

enum class NonconvexPolicy { warn, error, ignore };

struct MeasureOptions {
  ConstraintSet constraints = ConstraintSet::all_nodes();
  NonconvexPolicy on_nonconvex = NonconvexPolicy::warn;
  int stencil_width = 2;  // used for the discrete convexity precondition
  bool keep_halfplanes = true;
};

SubdiffPolytope subdifferential(const MeshFunction& v, std::size_t node,
                                const MeasureOptions& options = {});

struct MAMeasure {
  std::vector<double> node_masses;  // per interior node, node order
  double total = 0.0;               // left-to-right sum of node_masses
  bool input_convex = true;
};

MAMeasure ma_measure(const MeshFunction& v, const MeasureOptions& options = {});

struct MassBoundReport {
  double total_mass = 0.0;
  double nodal_sum = 0.0;    // sum over interior nodes of h^2 f(x)
  double integral_f = 0.0;   // midpoint quadrature over the domain
  double ratio = 0.0;        // total_mass / integral_f
  double C = 0.0;
  bool exceeds = false;      // ratio > C
};

MassBoundReport mass_bound_check(const MeshFunction& u, const std::function<double(Vec2)>& f,
                                 double C, const MeasureOptions& options = {});

// Midpoint quadrature of f over the domain on an n x n cell grid of its
// bounding box (cells whose midpoint lies outside are dropped).
double integrate_over_domain(const ConvexDomain& domain, const std::function<double(Vec2)>& f,
                             int cells_per_side = 512);

}  // namespace dcm
