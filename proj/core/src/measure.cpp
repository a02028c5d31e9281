#include "dcm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "dcm/error.hpp"

namespace dcm {
namespace {

// Keep the part of a convex polygon where p.n <= c.
void clip(std::vector<Vec2>& poly, std::vector<Vec2>& scratch, Vec2 n, double c) {
  if (poly.empty()) return;
  bool any_out = false;
  bool any_in = false;
  for (const Vec2& p : poly) {
    const double s = dot(p, n) - c;
    any_out |= s > 0.0;
    any_in |= s <= 0.0;
  }
  if (!any_out) return;
  if (!any_in) {
    poly.clear();
    return;
  }
  scratch.clear();
  const std::size_t m = poly.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2 a = poly[k];
    const Vec2 b = poly[(k + 1) % m];
    const double sa = dot(a, n) - c;
    const double sb = dot(b, n) - c;
    if (sa <= 0.0) scratch.push_back(a);
    if ((sa <= 0.0) != (sb <= 0.0)) {
      const double t = sa / (sa - sb);
      scratch.push_back(a + t * (b - a));
    }
  }
  poly.swap(scratch);
}

struct NodePolygon {
  std::vector<Vec2> vertices;
  double area = 0.0;
};

class SubdiffBuilder {
 public:
  SubdiffBuilder(const MeshFunction& v, const ConstraintSet& set) : v_(v), set_(set) {
    const double osc = v.oscillation();
    degenerate_area_ = 1e-14 * osc * osc;
  }

  NodePolygon build(std::size_t node, std::vector<HalfPlaneConstraint>* record) {
    const Lattice& lat = v_.lattice();
    const Vec2 x0 = lat.point(node);
    const double v0 = v_[node];
    const double h = lat.h();

    // Axis neighbors bound every slope component: start from that box.
    const AxisArm& px = lat.arm(node, Axis::plus_x);
    const AxisArm& mx = lat.arm(node, Axis::minus_x);
    const AxisArm& py = lat.arm(node, Axis::plus_y);
    const AxisArm& my = lat.arm(node, Axis::minus_y);
    const double x_hi = (v_[px.node] - v0) / (px.length * h);
    const double x_lo = (v0 - v_[mx.node]) / (mx.length * h);
    const double y_hi = (v_[py.node] - v0) / (py.length * h);
    const double y_lo = (v0 - v_[my.node]) / (my.length * h);

    NodePolygon out;
    if (record) {
      record->clear();
      for (const AxisArm* arm : {&px, &mx, &py, &my}) {
        record->push_back({lat.point(arm->node) - x0, v_[arm->node] - v0});
      }
    }
    if (x_lo > x_hi || y_lo > y_hi) {
      if (record) collect_rest(node, {px.node, mx.node, py.node, my.node}, *record);
      return out;
    }
    poly_ = {{x_lo, y_lo}, {x_hi, y_lo}, {x_hi, y_hi}, {x_lo, y_hi}};

    // Nearest off-axis lattice neighbors first; they cut the box the most.
    const auto m0 = lat.index_of(node);
    std::array<std::size_t, 4> skip{px.node, mx.node, py.node, my.node};
    std::array<std::size_t, 4> diag{};
    std::size_t n_diag = 0;
    if (m0) {
      for (const LatticeIndex d : {LatticeIndex{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
        if (auto y = lat.find({m0->i + d.i, m0->j + d.j})) {
          diag[n_diag++] = *y;
          apply(*y, x0, v0, nullptr);
        }
      }
    }
    for (std::size_t y = 0; y < lat.size(); ++y) {
      if (y == node || std::find(skip.begin(), skip.end(), y) != skip.end()) continue;
      if (std::find(diag.begin(), diag.begin() + n_diag, y) != diag.begin() + n_diag) {
        if (record) record->push_back({lat.point(y) - x0, v_[y] - v0});
        continue;
      }
      apply(y, x0, v0, record);
    }

    validate(node, x0, v0);
    out.vertices = poly_;
    out.area = std::abs(signed_area(poly_));
    if (out.area < degenerate_area_) out.area = 0.0;
    return out;
  }

 private:
  bool in_set(Vec2 x0, Vec2 y) const { return !set_.radius || norm(y - x0) <= *set_.radius; }

  void apply(std::size_t y, Vec2 x0, double v0, std::vector<HalfPlaneConstraint>* record) {
    const Vec2 p = v_.lattice().point(y);
    if (!in_set(x0, p)) return;
    const Vec2 n = p - x0;
    const double c = v_[y] - v0;
    if (record) record->push_back({n, c});
    clip(poly_, scratch_, n, c);
  }

  void collect_rest(std::size_t node, std::array<std::size_t, 4> skip,
                    std::vector<HalfPlaneConstraint>& record) const {
    const Lattice& lat = v_.lattice();
    const Vec2 x0 = lat.point(node);
    for (std::size_t y = 0; y < lat.size(); ++y) {
      if (y == node || std::find(skip.begin(), skip.end(), y) != skip.end()) continue;
      if (in_set(x0, lat.point(y))) record.push_back({lat.point(y) - x0, v_[y] - v_[node]});
    }
  }

  // Every vertex must satisfy every constraint up to rounding.
  void validate(std::size_t node, Vec2 x0, double v0) const {
    const Lattice& lat = v_.lattice();
    for (std::size_t y = 0; y < lat.size(); ++y) {
      if (y == node) continue;
      const Vec2 n = lat.point(y) - x0;
      if (!in_set(x0, lat.point(y))) continue;
      const double c = v_[y] - v0;
      for (const Vec2& p : poly_) {
        const double tol = 1e-9 * (std::abs(c) + norm(n) * norm(p) + 1e-300);
        if (dot(p, n) - c > tol) {
          std::ostringstream msg;
          msg << "subdifferential polygon at node (" << x0.x << ", " << x0.y
              << ") violates a supporting constraint after clipping";
          throw std::logic_error(msg.str());
        }
      }
    }
  }

  const MeshFunction& v_;
  ConstraintSet set_;
  double degenerate_area_ = 0.0;
  std::vector<Vec2> poly_;
  std::vector<Vec2> scratch_;
};

bool check_convex(const MeshFunction& v, const MeasureOptions& options) {
  if (options.on_nonconvex == NonconvexPolicy::ignore) return true;
  const DirectionStencil stencil(options.stencil_width);
  const ConvexityResult res = is_discrete_convex(v, stencil);
  if (res.convex) return true;
  const Vec2 x = v.lattice().point(res.witness->node);
  std::ostringstream msg;
  msg << "mesh function is not discrete convex: second difference " << res.witness->value
      << " along (" << res.witness->direction.a << ", " << res.witness->direction.b
      << ") at node (" << x.x << ", " << x.y << ")";
  if (options.on_nonconvex == NonconvexPolicy::error) throw PreconditionError(msg.str());
  std::cerr << "warning: " << msg.str() << "; evaluating the measure anyway\n";
  return false;
}

}  // namespace

SubdiffPolytope subdifferential(const MeshFunction& v, std::size_t node,
                                const MeasureOptions& options) {
  if (!v.lattice().is_interior(node)) {
    throw PreconditionError("subdifferential requested at a boundary node");
  }
  check_convex(v, options);
  SubdiffBuilder builder(v, options.constraints);
  SubdiffPolytope out;
  out.node = node;
  out.base = v.lattice().point(node);
  NodePolygon poly = builder.build(node, options.keep_halfplanes ? &out.halfplanes : nullptr);
  out.vertices = std::move(poly.vertices);
  out.area = poly.area;
  return out;
}

MAMeasure ma_measure(const MeshFunction& v, const MeasureOptions& options) {
  MAMeasure out;
  out.input_convex = check_convex(v, options);
  SubdiffBuilder builder(v, options.constraints);
  const std::size_t n = v.lattice().interior_count();
  out.node_masses.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.node_masses[k] = builder.build(k, nullptr).area;
  for (double m : out.node_masses) out.total += m;
  return out;
}

double integrate_over_domain(const ConvexDomain& domain, const std::function<double(Vec2)>& f,
                             int cells_per_side) {
  const auto [lo, hi] = domain.bounding_box();
  const double dx = (hi.x - lo.x) / cells_per_side;
  const double dy = (hi.y - lo.y) / cells_per_side;
  double sum = 0.0;
  for (int j = 0; j < cells_per_side; ++j) {
    for (int i = 0; i < cells_per_side; ++i) {
      const Vec2 m{lo.x + (i + 0.5) * dx, lo.y + (j + 0.5) * dy};
      if (domain.signed_distance(m) > 0.0) sum += f(m);
    }
  }
  return sum * dx * dy;
}

MassBoundReport mass_bound_check(const MeshFunction& u, const std::function<double(Vec2)>& f,
                                 double C, const MeasureOptions& options) {
  MassBoundReport r;
  r.C = C;
  r.total_mass = ma_measure(u, options).total;
  const Lattice& lat = u.lattice();
  const double h2 = lat.h() * lat.h();
  for (std::size_t k = 0; k < lat.interior_count(); ++k) r.nodal_sum += h2 * f(lat.point(k));
  r.integral_f = integrate_over_domain(lat.domain(), f);
  r.ratio = r.integral_f != 0.0 ? r.total_mass / r.integral_f : 0.0;
  r.exceeds = r.ratio > C;
  return r;
}

}  // namespace dcm
