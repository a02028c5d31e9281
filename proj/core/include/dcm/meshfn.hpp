#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dcm/domain.hpp"

namespace dcm {

using LatticePtr = std::shared_ptr<const Lattice>;

// Real values on every node of a lattice, stored in node-offset order.
class MeshFunction {
 public:
  MeshFunction(LatticePtr lattice, std::vector<double> values);

  static MeshFunction sample(LatticePtr lattice, const std::function<double(Vec2)>& fn);
  static MeshFunction zeros(LatticePtr lattice);

  const Lattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }

  double operator[](std::size_t node) const { return values_[node]; }
  double& operator[](std::size_t node) { return values_[node]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  double max_abs() const;
  double oscillation() const;

  void write_csv(std::ostream& out) const;
  // Reads `x,y,value` rows and matches them to lattice nodes by coordinates.
  static MeshFunction read_csv(LatticePtr lattice, std::istream& in);

 private:
  LatticePtr lattice_;
  std::vector<double> values_;
};

struct Direction {
  int a = 1;
  int b = 0;
  double norm2() const { return static_cast<double>(a * a + b * b); }
  bool is_axis() const { return a == 0 || b == 0; }
  Direction perp() const;  // canonical representative of (-b, a)
  friend bool operator==(Direction, Direction) = default;
};

// Coprime lattice directions with max(|a|,|b|) <= width, one representative
// per antipodal pair, plus the orthogonal pairs used by the Monge-Ampere
// operator. The axis pair comes first.
class DirectionStencil {
 public:
  explicit DirectionStencil(int width);

  int width() const { return width_; }
  const std::vector<Direction>& directions() const { return directions_; }
  // Indices into directions(); the first pair is {(1,0), (0,1)}.
  const std::vector<std::array<std::size_t, 2>>& pairs() const { return pairs_; }

 private:
  int width_;
  std::vector<Direction> directions_;
  std::vector<std::array<std::size_t, 2>> pairs_;
};

enum class StepPolicy {
  exact_step,  // both endpoints x +- h e must be nodes
  clipped,     // axis directions may end at projected boundary nodes
};

std::optional<double> second_difference(const MeshFunction& v, std::size_t node, Direction e,
                                        StepPolicy policy = StepPolicy::exact_step);

// Minimum directional second difference over the stencil directions available
// at `node` (axis directions use clipped arms, so at least two always exist).
double lambda1_h(const MeshFunction& v, std::size_t node, const DirectionStencil& stencil);

double discrete_laplacian(const MeshFunction& v, std::size_t node);

struct ConvexityWitness {
  std::size_t node = 0;
  Direction direction{};
  double value = 0.0;
};

struct ConvexityResult {
  bool convex = true;
  double min_lambda = 0.0;
  std::optional<ConvexityWitness> witness;
  explicit operator bool() const { return convex; }
};

constexpr double kDefaultConvexTol = 1e-10;

// Threshold is -tol * max(1, max|v|) / h^2 to absorb rounding in the
// difference quotients.
ConvexityResult is_discrete_convex(const MeshFunction& v, const DirectionStencil& stencil,
                                   double tol = kDefaultConvexTol);

double convexity_threshold(const MeshFunction& v, double tol = kDefaultConvexTol);

// Precomputed linear form of every available directional second difference:
//   diff = w_plus * v[plus] + w_minus * v[minus] - w_center * v[center].
struct DifferenceForm {
  std::size_t direction = 0;  // index into DirectionStencil::directions()
  std::size_t plus = 0;
  std::size_t minus = 0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double w_center = 0.0;

  double apply(std::span<const double> v, double center) const {
    return w_plus * v[plus] + w_minus * v[minus] - w_center * center;
  }
};

class StencilTable {
 public:
  StencilTable(const Lattice& lattice, const DirectionStencil& stencil);

  std::span<const DifferenceForm> forms(std::size_t node) const {
    return {forms_.data() + form_begin_[node], form_begin_[node + 1] - form_begin_[node]};
  }
  // Orthogonal pairs available at `node`, as indices into forms(node).
  std::span<const std::array<std::size_t, 2>> pairs(std::size_t node) const {
    return {pairs_.data() + pair_begin_[node], pair_begin_[node + 1] - pair_begin_[node]};
  }
  const DirectionStencil& stencil() const { return stencil_; }

 private:
  DirectionStencil stencil_;
  std::vector<DifferenceForm> forms_;
  std::vector<std::size_t> form_begin_;
  std::vector<std::array<std::size_t, 2>> pairs_;
  std::vector<std::size_t> pair_begin_;
};

}  // namespace dcm
