#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "dcm/meshfn.hpp"

namespace dcm {

// Triangulation of Conv of the closed node set with vertices at nodes.
// Full lattice squares are split by the lower-left to upper-right diagonal;
// the remaining cells are cut by the lattice lines through interior nodes, so
// every segment between adjacent nodes on such a line is a union of edges.
class Triangulation {
 public:
  explicit Triangulation(LatticePtr lattice);

  struct Location {
    std::size_t triangle = 0;
    std::array<double, 3> bary{};
  };

  const Lattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  const std::vector<std::array<std::size_t, 3>>& triangles() const { return triangles_; }
  // Triangle containing x, or nothing when x is outside the triangulated hull.
  std::optional<Location> locate(Vec2 x) const;
  double area() const;

 private:
  std::size_t face_of(int cs, int rs) const {
    return static_cast<std::size_t>(cs + 1) + static_cast<std::size_t>(ncols_ + 1) * (rs + 1);
  }
  int strip(double coord, double origin) const;

  LatticePtr lattice_;
  double x0_ = 0.0;
  double y0_ = 0.0;
  int ncols_ = 0;
  int nrows_ = 0;
  std::vector<std::array<std::size_t, 3>> triangles_;
  std::vector<std::size_t> face_begin_;  // triangles of face f: [face_begin_[f], face_begin_[f+1])
};

// Piecewise-linear interpolant of a mesh function.
class PLFunction {
 public:
  PLFunction(std::shared_ptr<const Triangulation> mesh, std::vector<double> values);

  // Throws PreconditionError outside the triangulated hull.
  double operator()(Vec2 x) const;
  std::optional<double> try_evaluate(Vec2 x) const;
  const Triangulation& mesh() const { return *mesh_; }

  // `x,y,value` rows on a regular grid over the domain bounding box; points
  // outside the hull are skipped.
  void write_grid_csv(std::ostream& out, int samples_per_side) const;

 private:
  std::shared_ptr<const Triangulation> mesh_;
  std::vector<double> values_;
};

PLFunction interpolate(const MeshFunction& v);
PLFunction interpolate(const MeshFunction& v, std::shared_ptr<const Triangulation> mesh);

// Compact subset of the domain: an explicit box or {x : d(x, boundary) >= delta}.
class CompactSet {
 public:
  static CompactSet box(Vec2 lo, Vec2 hi);
  static CompactSet inner(double delta);

  bool contains(const ConvexDomain& domain, Vec2 x) const;
  // Distance from the set to the boundary of the domain; throws when the set
  // is not inside the domain.
  double margin(const ConvexDomain& domain) const;
  // Distance from x to the set is at most r (cheap upper test).
  bool near(const ConvexDomain& domain, Vec2 x, double r) const;
  bool meets_segment(const ConvexDomain& domain, Vec2 a, Vec2 b) const;
  std::array<Vec2, 2> bounding_box(const ConvexDomain& domain) const;
  bool is_box() const { return is_box_; }
  double delta() const { return delta_; }

 private:
  bool is_box_ = false;
  Vec2 lo_{};
  Vec2 hi_{};
  double delta_ = 0.0;
};

// max of |v(y) - v(x)| / h over axis edges [x, y] of the lattice that meet K.
// Requires h < margin(K).
double lipschitz_modulus(const MeshFunction& v, const CompactSet& K);

// max |I(v)(s) - exact(s)| over grid points s in K, spaced h / density on the
// lattice-aligned grid.
double sup_error_on_compact(const PLFunction& iv, const std::function<double(Vec2)>& exact,
                            const CompactSet& K, int density);
double sup_error_on_compact(const MeshFunction& v, const std::function<double(Vec2)>& exact,
                            const CompactSet& K, int density);

}  // namespace dcm
