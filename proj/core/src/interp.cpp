#include "dcm/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dcm/error.hpp"

namespace dcm {
namespace {

constexpr double kLineTol = 1e-9;

double tri_area2(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

// Ear clipping of a weakly convex polygon (counterclockwise, collinear runs
// allowed). Ears are chosen so that the remainder keeps positive area, which
// keeps every collinear node a vertex of some triangle.
void clip_ears(const std::vector<Vec2>& pts, std::vector<std::size_t> poly, double eps,
               std::vector<std::array<std::size_t, 3>>& out) {
  auto remainder_area = [&](std::size_t skip) {
    double a = 0.0;
    const std::size_t m = poly.size();
    for (std::size_t k = 0; k < m; ++k) {
      if (k == skip) continue;
      std::size_t next = (k + 1) % m;
      if (next == skip) next = (next + 1) % m;
      a += cross(pts[poly[k]], pts[poly[next]]);
    }
    return 0.5 * a;
  };
  while (poly.size() > 3) {
    const std::size_t m = poly.size();
    std::size_t pick = m;
    std::size_t fallback = m;
    for (std::size_t k = 0; k < m; ++k) {
      const Vec2 a = pts[poly[(k + m - 1) % m]];
      const Vec2 b = pts[poly[k]];
      const Vec2 c = pts[poly[(k + 1) % m]];
      if (tri_area2(a, b, c) <= eps) continue;
      if (fallback == m) fallback = k;
      if (remainder_area(k) > 0.5 * eps) {
        pick = k;
        break;
      }
    }
    if (pick == m) pick = fallback;
    if (pick == m) return;  // degenerate remainder
    out.push_back({poly[(pick + m - 1) % m], poly[pick], poly[(pick + 1) % m]});
    poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  if (tri_area2(pts[poly[0]], pts[poly[1]], pts[poly[2]]) > eps) {
    out.push_back({poly[0], poly[1], poly[2]});
  }
}

}  // namespace

int Triangulation::strip(double coord, double origin) const {
  return static_cast<int>(std::floor((coord - origin) / lattice_->h()));
}

Triangulation::Triangulation(LatticePtr lattice) : lattice_(std::move(lattice)) {
  const Lattice& lat = *lattice_;
  const double h = lat.h();
  long imin = std::numeric_limits<long>::max();
  long imax = std::numeric_limits<long>::min();
  long jmin = imin;
  long jmax = imax;
  for (std::size_t k = 0; k < lat.interior_count(); ++k) {
    const LatticeIndex m = *lat.index_of(k);
    imin = std::min(imin, m.i);
    imax = std::max(imax, m.i);
    jmin = std::min(jmin, m.j);
    jmax = std::max(jmax, m.j);
  }
  x0_ = static_cast<double>(imin) * h;
  y0_ = static_cast<double>(jmin) * h;
  ncols_ = static_cast<int>(imax - imin + 1);
  nrows_ = static_cast<int>(jmax - jmin + 1);

  // Strips between consecutive lines, plus one unbounded strip at each end.
  auto strips_of = [h](double coord, double origin, int lines) {
    const double u = (coord - origin) / h;
    const double r = std::round(u);
    std::array<int, 2> s{};
    int count = 0;
    if (std::abs(u - r) <= kLineTol && r >= 0 && r <= lines - 1) {
      s[count++] = static_cast<int>(r) - 1;
      s[count++] = static_cast<int>(r);
    } else {
      s[count++] = std::clamp(static_cast<int>(std::floor(u)), -1, lines - 1);
    }
    return std::pair{s, count};
  };

  const std::size_t n_faces = static_cast<std::size_t>(ncols_ + 1) * (nrows_ + 1);
  std::vector<std::vector<std::size_t>> faces(n_faces);
  for (std::size_t n = 0; n < lat.size(); ++n) {
    const Vec2 p = lat.point(n);
    const auto [cs, nc] = strips_of(p.x, x0_, ncols_);
    const auto [rs, nr] = strips_of(p.y, y0_, nrows_);
    for (int a = 0; a < nc; ++a) {
      for (int b = 0; b < nr; ++b) faces[face_of(cs[a], rs[b])].push_back(n);
    }
  }

  const double eps = 1e-12 * h * h;
  face_begin_.assign(n_faces + 1, 0);
  for (std::size_t f = 0; f < n_faces; ++f) {
    face_begin_[f] = triangles_.size();
    std::vector<std::size_t>& nodes = faces[f];
    if (nodes.size() < 3) continue;
    Vec2 c{};
    for (std::size_t n : nodes) c += lat.point(n);
    c = (1.0 / static_cast<double>(nodes.size())) * c;
    std::sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) {
      const Vec2 pa = lat.point(a) - c;
      const Vec2 pb = lat.point(b) - c;
      return std::atan2(pa.y, pa.x) < std::atan2(pb.y, pb.x);
    });
    if (nodes.size() == 4) {
      // full lattice square: start at the lower-left corner
      const auto ll = std::min_element(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) {
        const Vec2 pa = lat.point(a);
        const Vec2 pb = lat.point(b);
        return pa.x + pa.y < pb.x + pb.y;
      });
      std::rotate(nodes.begin(), ll, nodes.end());
      const Vec2 p0 = lat.point(nodes[0]);
      const Vec2 p2 = lat.point(nodes[2]);
      const bool square = lat.index_of(nodes[0]) && lat.index_of(nodes[1]) &&
                          lat.index_of(nodes[2]) && lat.index_of(nodes[3]) &&
                          std::abs(p2.x - p0.x - h) <= kLineTol * h &&
                          std::abs(p2.y - p0.y - h) <= kLineTol * h;
      if (square) {
        triangles_.push_back({nodes[0], nodes[1], nodes[2]});
        triangles_.push_back({nodes[0], nodes[2], nodes[3]});
        continue;
      }
    }
    clip_ears(lat.points(), nodes, eps, triangles_);
  }
  face_begin_[n_faces] = triangles_.size();
}

double Triangulation::area() const {
  double a = 0.0;
  for (const auto& t : triangles_) {
    a += 0.5 * tri_area2(lattice_->point(t[0]), lattice_->point(t[1]), lattice_->point(t[2]));
  }
  return a;
}

std::optional<Triangulation::Location> Triangulation::locate(Vec2 x) const {
  const int cs = std::clamp(strip(x.x, x0_), -1, ncols_ - 1);
  const int rs = std::clamp(strip(x.y, y0_), -1, nrows_ - 1);
  std::optional<Location> best;
  double best_min = -1e-10;
  for (int dr : {0, -1, 1}) {
    for (int dc : {0, -1, 1}) {
      const int c = cs + dc;
      const int r = rs + dr;
      if (c < -1 || c > ncols_ - 1 || r < -1 || r > nrows_ - 1) continue;
      const std::size_t f = face_of(c, r);
      for (std::size_t t = face_begin_[f]; t < face_begin_[f + 1]; ++t) {
        const auto& tri = triangles_[t];
        const Vec2 a = lattice_->point(tri[0]);
        const Vec2 b = lattice_->point(tri[1]);
        const Vec2 d = lattice_->point(tri[2]);
        const double det = tri_area2(a, b, d);
        const double l1 = tri_area2(a, x, d) / det;
        const double l2 = tri_area2(a, b, x) / det;
        const double l0 = 1.0 - l1 - l2;
        const double mn = std::min({l0, l1, l2});
        if (mn >= best_min) {
          best_min = mn;
          best = Location{t, {l0, l1, l2}};
          if (mn >= 0.0) return best;
        }
      }
    }
  }
  return best;
}

PLFunction::PLFunction(std::shared_ptr<const Triangulation> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != mesh_->lattice().size()) {
    throw PreconditionError("interpolant value count does not match the lattice");
  }
}

std::optional<double> PLFunction::try_evaluate(Vec2 x) const {
  const auto loc = mesh_->locate(x);
  if (!loc) return std::nullopt;
  const auto& t = mesh_->triangles()[loc->triangle];
  // Vertices with a vanishing weight are dropped so values on edges depend
  // only on the two edge endpoints.
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(loc->bary[k]) > 1e-14) s += loc->bary[k] * values_[t[k]];
  }
  return s;
}

double PLFunction::operator()(Vec2 x) const {
  if (auto v = try_evaluate(x)) return *v;
  std::ostringstream msg;
  msg << "interpolant evaluated at (" << x.x << ", " << x.y << "), outside the node hull";
  throw PreconditionError(msg.str());
}

void PLFunction::write_grid_csv(std::ostream& out, int samples_per_side) const {
  const auto [lo, hi] = mesh_->lattice().domain().bounding_box();
  const int n = std::max(samples_per_side, 2);
  out << "x,y,value\n";
  out.precision(17);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Vec2 p{lo.x + (hi.x - lo.x) * i / (n - 1), lo.y + (hi.y - lo.y) * j / (n - 1)};
      if (auto v = try_evaluate(p)) out << p.x << ',' << p.y << ',' << *v << '\n';
    }
  }
}

PLFunction interpolate(const MeshFunction& v, std::shared_ptr<const Triangulation> mesh) {
  if (mesh->lattice_ptr() != v.lattice_ptr() && mesh->lattice().size() != v.size()) {
    throw PreconditionError("triangulation was built for a different lattice");
  }
  return PLFunction(std::move(mesh), std::vector<double>(v.values().begin(), v.values().end()));
}

PLFunction interpolate(const MeshFunction& v) {
  return interpolate(v, std::make_shared<const Triangulation>(v.lattice_ptr()));
}

CompactSet CompactSet::box(Vec2 lo, Vec2 hi) {
  if (!(lo.x < hi.x && lo.y < hi.y)) throw InputError("compact box needs lo < hi");
  CompactSet k;
  k.is_box_ = true;
  k.lo_ = lo;
  k.hi_ = hi;
  return k;
}

CompactSet CompactSet::inner(double delta) {
  if (!(delta > 0.0)) throw InputError("compact set margin delta must be positive");
  CompactSet k;
  k.delta_ = delta;
  return k;
}

bool CompactSet::contains(const ConvexDomain& domain, Vec2 x) const {
  if (is_box_) return x.x >= lo_.x && x.x <= hi_.x && x.y >= lo_.y && x.y <= hi_.y;
  return domain.signed_distance(x) >= 0.0 && domain.distance_to_boundary(x) >= delta_;
}

bool CompactSet::near(const ConvexDomain& domain, Vec2 x, double r) const {
  if (is_box_) {
    const double dx = std::max({lo_.x - x.x, 0.0, x.x - hi_.x});
    const double dy = std::max({lo_.y - x.y, 0.0, x.y - hi_.y});
    return std::hypot(dx, dy) <= r;
  }
  return domain.signed_distance(x) >= 0.0 && domain.distance_to_boundary(x) >= delta_ - r;
}

bool CompactSet::meets_segment(const ConvexDomain& domain, Vec2 a, Vec2 b) const {
  if (is_box_) {
    // Slab clipping of the segment against the box.
    double t0 = 0.0;
    double t1 = 1.0;
    const double lo[2] = {lo_.x, lo_.y};
    const double hi[2] = {hi_.x, hi_.y};
    const double p[2] = {a.x, a.y};
    const double d[2] = {b.x - a.x, b.y - a.y};
    for (int c = 0; c < 2; ++c) {
      if (d[c] == 0.0) {
        if (p[c] < lo[c] || p[c] > hi[c]) return false;
        continue;
      }
      double s0 = (lo[c] - p[c]) / d[c];
      double s1 = (hi[c] - p[c]) / d[c];
      if (s0 > s1) std::swap(s0, s1);
      t0 = std::max(t0, s0);
      t1 = std::min(t1, s1);
    }
    return t0 <= t1;
  }
  // d(., boundary) is concave on the domain, so ternary search finds its
  // maximum along the segment.
  auto dist = [&](double t) {
    const Vec2 x = (1.0 - t) * a + t * b;
    return domain.signed_distance(x) >= 0.0 ? domain.distance_to_boundary(x) : -1.0;
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (dist(m1) < dist(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return std::max({dist(0.0), dist(1.0), dist(0.5 * (lo + hi))}) >= delta_;
}

double CompactSet::margin(const ConvexDomain& domain) const {
  if (!is_box_) return delta_;
  double m = std::numeric_limits<double>::infinity();
  for (const Vec2 c : {lo_, Vec2{hi_.x, lo_.y}, hi_, Vec2{lo_.x, hi_.y}}) {
    if (!(domain.signed_distance(c) > 0.0)) {
      throw PreconditionError("compact box is not contained in the open domain");
    }
    m = std::min(m, domain.distance_to_boundary(c));
  }
  return m;
}

std::array<Vec2, 2> CompactSet::bounding_box(const ConvexDomain& domain) const {
  if (is_box_) return {lo_, hi_};
  auto [lo, hi] = domain.bounding_box();
  return {Vec2{lo.x + delta_, lo.y + delta_}, Vec2{hi.x - delta_, hi.y - delta_}};
}

double lipschitz_modulus(const MeshFunction& v, const CompactSet& K) {
  const Lattice& lat = v.lattice();
  const double h = lat.h();
  const double margin = K.margin(lat.domain());
  if (h >= margin) {
    std::ostringstream msg;
    msg << "lattice spacing h = " << h << " is too large for the compact set (needs h < "
        << margin << ")";
    throw PreconditionError(msg.str());
  }
  double best = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < lat.interior_count(); ++k) {
    if (!K.near(lat.domain(), lat.point(k), h)) continue;
    const LatticeIndex m = *lat.index_of(k);
    for (const LatticeIndex d : {LatticeIndex{1, 0}, LatticeIndex{0, 1}, LatticeIndex{-1, 0}, LatticeIndex{0, -1}}) {
      auto y = lat.find({m.i + d.i, m.j + d.j});
      if (!y || !K.meets_segment(lat.domain(), lat.point(k), lat.point(*y))) continue;
      any = true;
      best = std::max(best, std::abs(v[*y] - v[k]) / h);
    }
  }
  if (!any) throw PreconditionError("compact set contains no lattice nodes");
  return best;
}

double sup_error_on_compact(const PLFunction& iv, const std::function<double(Vec2)>& exact,
                            const CompactSet& K, int density) {
  const Lattice& lat = iv.mesh().lattice();
  const double s = lat.h() / std::max(density, 1);
  const auto [lo, hi] = K.bounding_box(lat.domain());
  const long i0 = static_cast<long>(std::ceil(lo.x / s - 1e-9));
  const long i1 = static_cast<long>(std::floor(hi.x / s + 1e-9));
  const long j0 = static_cast<long>(std::ceil(lo.y / s - 1e-9));
  const long j1 = static_cast<long>(std::floor(hi.y / s + 1e-9));
  double err = 0.0;
  for (long j = j0; j <= j1; ++j) {
    for (long i = i0; i <= i1; ++i) {
      const Vec2 p{static_cast<double>(i) * s, static_cast<double>(j) * s};
      if (!K.contains(lat.domain(), p) && !K.is_box()) continue;
      err = std::max(err, std::abs(iv(p) - exact(p)));
    }
  }
  return err;
}

double sup_error_on_compact(const MeshFunction& v, const std::function<double(Vec2)>& exact,
                            const CompactSet& K, int density) {
  return sup_error_on_compact(interpolate(v), exact, K, density);
}

}  // namespace dcm
