#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcm/geometry.hpp"

namespace dcm {

enum class DomainKind { box, polygon, disk };

// Bounded convex planar domain. Boxes and polygons share the half-plane
// representation; the disk is handled in closed form.
class ConvexDomain {
 public:
  static ConvexDomain box(Vec2 lo, Vec2 hi);
  // Counterclockwise vertex list; collinear vertices along an edge are allowed.
  static ConvexDomain polygon(std::vector<Vec2> vertices);
  static ConvexDomain disk(Vec2 center, double radius);

  DomainKind kind() const { return kind_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  Vec2 center() const { return center_; }
  double radius() const { return radius_; }

  // Signed distance to the boundary: positive inside, negative outside.
  // Exact for interior points; outside points get a lower bound on the
  // magnitude (enough for classification).
  double signed_distance(Vec2 x) const;

  // Exact Euclidean distance to the boundary for x in the closure.
  // Throws PreconditionError for points outside the closure.
  double distance_to_boundary(Vec2 x) const;

  double diameter() const;
  double area() const;
  double perimeter() const;
  std::array<Vec2, 2> bounding_box() const;
  Vec2 centroid() const;

  // For x strictly inside and a nonzero step d, the smallest t > 0 with
  // x + t d on the boundary.
  double ray_exit(Vec2 x, Vec2 d) const;

  // Point at arclength fraction s in [0,1) along the boundary, counterclockwise
  // from the first vertex (polygons) or from angle 0 (disk).
  Vec2 boundary_point(double s) const;

  // Tolerance used to decide that a point lies on the boundary.
  double boundary_tolerance() const { return 1e-12 * scale_; }

 private:
  DomainKind kind_ = DomainKind::box;
  std::vector<Vec2> vertices_;
  std::vector<Vec2> normals_;   // outward unit normals per nondegenerate edge
  std::vector<double> offsets_;  // normal . x <= offset inside
  Vec2 center_{};
  double radius_ = 0.0;
  double scale_ = 1.0;
};

std::string to_string(DomainKind kind);

enum class BoundaryMode { exact, projected };

BoundaryMode parse_boundary_mode(const std::string& s);
std::string to_string(BoundaryMode mode);

struct LatticeIndex {
  long i = 0;
  long j = 0;
  friend bool operator==(LatticeIndex, LatticeIndex) = default;
};

struct LatticeIndexHash {
  std::size_t operator()(LatticeIndex m) const noexcept {
    return std::hash<long>{}(m.i) * 0x9E3779B97F4A7C15ULL ^ std::hash<long>{}(m.j);
  }
};

enum class Axis : int { plus_x = 0, minus_x = 1, plus_y = 2, minus_y = 3 };

// Neighbor reached from an interior node along a coordinate axis; `length` is
// the arm in units of h (1 for a lattice neighbor, in (0,1] when the arm ends
// at a projected boundary node).
struct AxisArm {
  std::size_t node = 0;
  double length = 1.0;
};

enum class NodeRole { interior, boundary };

// Nodes of the closed discrete domain. Interior nodes occupy offsets
// [0, interior_count()) in lexicographic (row-major, y then x) order; boundary
// nodes follow, also sorted by (y, x).
class Lattice {
 public:
  Lattice(ConvexDomain domain, double h, BoundaryMode mode);

  const ConvexDomain& domain() const { return domain_; }
  double h() const { return h_; }
  BoundaryMode mode() const { return mode_; }

  std::size_t size() const { return coords_.size(); }
  std::size_t interior_count() const { return interior_count_; }
  std::size_t boundary_count() const { return coords_.size() - interior_count_; }
  bool is_interior(std::size_t node) const { return node < interior_count_; }
  NodeRole role(std::size_t node) const {
    return is_interior(node) ? NodeRole::interior : NodeRole::boundary;
  }

  Vec2 point(std::size_t node) const { return coords_[node]; }
  const std::vector<Vec2>& points() const { return coords_; }

  // Lattice multi-index of a node sitting on the lattice h*Z^2.
  std::optional<LatticeIndex> index_of(std::size_t node) const { return lattice_index_[node]; }
  // Node at lattice point m*h, if that point belongs to the closed node set.
  std::optional<std::size_t> find(LatticeIndex m) const;

  const AxisArm& arm(std::size_t interior_node, Axis a) const {
    return arms_[interior_node][static_cast<int>(a)];
  }

  double distance_to_boundary(std::size_t node) const { return distance_[node]; }

  void write_csv(std::ostream& out) const;

 private:
  ConvexDomain domain_;
  double h_;
  BoundaryMode mode_;
  std::vector<Vec2> coords_;
  std::vector<std::optional<LatticeIndex>> lattice_index_;
  std::vector<std::array<AxisArm, 4>> arms_;
  std::vector<double> distance_;
  std::size_t interior_count_ = 0;
  std::unordered_map<LatticeIndex, std::size_t, LatticeIndexHash> by_index_;
};

Lattice build_lattice(const ConvexDomain& domain, double h,
                      BoundaryMode mode = BoundaryMode::projected);

inline double distance_to_boundary(const ConvexDomain& domain, Vec2 x) {
  return domain.distance_to_boundary(x);
}
inline double diameter(const ConvexDomain& domain) { return domain.diameter(); }

}  // namespace dcm
