#include "dcm/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dcm/error.hpp"

namespace dcm {
namespace {

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double len2 = norm2(d);
  double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * d));
}

}  // namespace

ConvexDomain ConvexDomain::box(Vec2 lo, Vec2 hi) {
  if (!(hi.x > lo.x && hi.y > lo.y)) {
    throw InputError("box domain must have positive extent in both directions");
  }
  ConvexDomain d = polygon({lo, {hi.x, lo.y}, hi, {lo.x, hi.y}});
  d.kind_ = DomainKind::box;
  return d;
}

ConvexDomain ConvexDomain::polygon(std::vector<Vec2> vertices) {
  // drop repeated consecutive vertices
  std::vector<Vec2> v;
  for (const Vec2& p : vertices) {
    if (v.empty() || !(v.back() == p)) v.push_back(p);
  }
  while (v.size() > 1 && v.front() == v.back()) v.pop_back();
  if (v.size() < 3) throw InputError("polygon domain needs at least three distinct vertices");
  if (signed_area(v) <= 0.0) {
    throw InputError("polygon domain must be counterclockwise with positive area");
  }
  double scale = 0.0;
  for (const Vec2& p : v) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  scale = std::max(scale, 1.0);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec2 a = v[k];
    const Vec2 b = v[(k + 1) % v.size()];
    const Vec2 c = v[(k + 2) % v.size()];
    if (cross(b - a, c - b) < -1e-12 * scale * scale) {
      std::ostringstream msg;
      msg << "polygon domain is not convex at vertex (" << b.x << ", " << b.y << ")";
      throw InputError(msg.str());
    }
  }
  ConvexDomain d;
  d.kind_ = DomainKind::polygon;
  d.vertices_ = std::move(v);
  d.scale_ = scale;
  for (std::size_t k = 0; k < d.vertices_.size(); ++k) {
    const Vec2 a = d.vertices_[k];
    const Vec2 e = d.vertices_[(k + 1) % d.vertices_.size()] - a;
    const double len = norm(e);
    const Vec2 n{e.y / len, -e.x / len};
    d.normals_.push_back(n);
    d.offsets_.push_back(dot(n, a));
  }
  return d;
}

ConvexDomain ConvexDomain::disk(Vec2 center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("disk radius must be positive");
  ConvexDomain d;
  d.kind_ = DomainKind::disk;
  d.center_ = center;
  d.radius_ = radius;
  d.scale_ = std::max({1.0, std::abs(center.x) + radius, std::abs(center.y) + radius});
  return d;
}

double ConvexDomain::signed_distance(Vec2 x) const {
  if (kind_ == DomainKind::disk) return radius_ - norm(x - center_);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < normals_.size(); ++k) {
    best = std::min(best, offsets_[k] - dot(normals_[k], x));
  }
  return best;
}

double ConvexDomain::distance_to_boundary(Vec2 x) const {
  const double sd = signed_distance(x);
  if (sd < -boundary_tolerance()) {
    std::ostringstream msg;
    msg << "point (" << x.x << ", " << x.y << ") lies outside the domain";
    throw PreconditionError(msg.str());
  }
  if (kind_ == DomainKind::disk) return std::max(sd, 0.0);
  // For a convex polygon the nearest boundary point of an inner point lies on
  // an edge; use segment distances so the value is exact.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < vertices_.size(); ++k) {
    best = std::min(best, segment_distance(x, vertices_[k], vertices_[(k + 1) % vertices_.size()]));
  }
  return sd <= boundary_tolerance() ? 0.0 : best;
}

double ConvexDomain::diameter() const {
  if (kind_ == DomainKind::disk) return 2.0 * radius_;
  double best = 0.0;
  for (std::size_t a = 0; a < vertices_.size(); ++a) {
    for (std::size_t b = a + 1; b < vertices_.size(); ++b) {
      best = std::max(best, norm(vertices_[a] - vertices_[b]));
    }
  }
  return best;
}

double ConvexDomain::area() const {
  if (kind_ == DomainKind::disk) return std::numbers::pi * radius_ * radius_;
  return signed_area(vertices_);
}

double ConvexDomain::perimeter() const {
  if (kind_ == DomainKind::disk) return 2.0 * std::numbers::pi * radius_;
  double p = 0.0;
  for (std::size_t k = 0; k < vertices_.size(); ++k) {
    p += norm(vertices_[(k + 1) % vertices_.size()] - vertices_[k]);
  }
  return p;
}

std::array<Vec2, 2> ConvexDomain::bounding_box() const {
  if (kind_ == DomainKind::disk) {
    return {Vec2{center_.x - radius_, center_.y - radius_},
            Vec2{center_.x + radius_, center_.y + radius_}};
  }
  Vec2 lo = vertices_.front();
  Vec2 hi = lo;
  for (const Vec2& p : vertices_) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return {lo, hi};
}

Vec2 ConvexDomain::centroid() const {
  if (kind_ == DomainKind::disk) return center_;
  const double a = signed_area(vertices_);
  Vec2 c{};
  for (std::size_t k = 0; k < vertices_.size(); ++k) {
    const Vec2 p = vertices_[k];
    const Vec2 q = vertices_[(k + 1) % vertices_.size()];
    c += cross(p, q) * (p + q);
  }
  return (1.0 / (6.0 * a)) * c;
}

double ConvexDomain::ray_exit(Vec2 x, Vec2 d) const {
  if (kind_ == DomainKind::disk) {
    const Vec2 w = x - center_;
    const double a = norm2(d);
    const double b = dot(w, d);
    const double c = norm2(w) - radius_ * radius_;
    const double disc = std::max(b * b - a * c, 0.0);
    return (-b + std::sqrt(disc)) / a;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < normals_.size(); ++k) {
    const double rate = dot(normals_[k], d);
    if (rate > 0.0) best = std::min(best, (offsets_[k] - dot(normals_[k], x)) / rate);
  }
  return best;
}

Vec2 ConvexDomain::boundary_point(double s) const {
  s -= std::floor(s);
  if (kind_ == DomainKind::disk) {
    const double theta = 2.0 * std::numbers::pi * s;
    return center_ + radius_ * Vec2{std::cos(theta), std::sin(theta)};
  }
  double target = s * perimeter();
  for (std::size_t k = 0; k < vertices_.size(); ++k) {
    const Vec2 a = vertices_[k];
    const Vec2 b = vertices_[(k + 1) % vertices_.size()];
    const double len = norm(b - a);
    if (target <= len || k + 1 == vertices_.size()) {
      const double t = len > 0.0 ? std::min(target / len, 1.0) : 0.0;
      return a + t * (b - a);
    }
    target -= len;
  }
  return vertices_.front();
}

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::box: return "box";
    case DomainKind::polygon: return "polygon";
    case DomainKind::disk: return "disk";
  }
  return "?";
}

BoundaryMode parse_boundary_mode(const std::string& s) {
  if (s == "exact") return BoundaryMode::exact;
  if (s == "projected") return BoundaryMode::projected;
  throw InputError("unknown boundary mode '" + s + "' (expected exact or projected)");
}

std::string to_string(BoundaryMode mode) {
  return mode == BoundaryMode::exact ? "exact" : "projected";
}

Lattice::Lattice(ConvexDomain domain, double h, BoundaryMode mode)
    : domain_(std::move(domain)), h_(h), mode_(mode) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("mesh length h must be positive");

  const auto [lo, hi] = domain_.bounding_box();
  const long i0 = static_cast<long>(std::ceil(lo.x / h)) - 1;
  const long i1 = static_cast<long>(std::floor(hi.x / h)) + 1;
  const long j0 = static_cast<long>(std::ceil(lo.y / h)) - 1;
  const long j1 = static_cast<long>(std::floor(hi.y / h)) + 1;
  const double tie = std::max(1e-9 * h, domain_.boundary_tolerance());

  struct Candidate {
    Vec2 x;
    std::optional<LatticeIndex> m;
  };
  std::vector<Candidate> interior;
  std::vector<Candidate> boundary;
  std::unordered_map<LatticeIndex, int, LatticeIndexHash> cls;  // 1 interior, 0 boundary

  for (long j = j0; j <= j1; ++j) {
    for (long i = i0; i <= i1; ++i) {
      const Vec2 x{static_cast<double>(i) * h, static_cast<double>(j) * h};
      const double sd = domain_.signed_distance(x);
      if (sd > tie) {
        interior.push_back({x, LatticeIndex{i, j}});
        cls[{i, j}] = 1;
      } else if (std::abs(sd) <= tie) {
        cls[{i, j}] = 0;
        if (mode == BoundaryMode::exact) boundary.push_back({x, LatticeIndex{i, j}});
      }
    }
  }
  if (interior.empty()) {
    std::ostringstream msg;
    msg << "no lattice point lies strictly inside the domain at h = " << h;
    throw InputError(msg.str());
  }
  if (mode == BoundaryMode::exact && boundary.empty()) {
    throw InputError("exact boundary mode: the domain boundary contains no lattice points");
  }

  static constexpr std::array<LatticeIndex, 4> kSteps{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

  // Boundary arms are resolved after all nodes are known.
  struct PendingArm {
    std::size_t interior;
    int axis;
    std::size_t boundary;  // index into `boundary`
    double length;
  };
  std::vector<PendingArm> pending;
  std::unordered_map<LatticeIndex, std::size_t, LatticeIndexHash> boundary_by_index;
  for (std::size_t b = 0; b < boundary.size(); ++b) boundary_by_index[*boundary[b].m] = b;

  for (std::size_t k = 0; k < interior.size(); ++k) {
    const LatticeIndex m = *interior[k].m;
    for (int a = 0; a < 4; ++a) {
      const LatticeIndex n{m.i + kSteps[a].i, m.j + kSteps[a].j};
      auto it = cls.find(n);
      if (it != cls.end() && it->second == 1) continue;
      if (mode == BoundaryMode::exact) {
        auto bt = boundary_by_index.find(n);
        if (bt == boundary_by_index.end()) {
          std::ostringstream msg;
          msg << "exact boundary mode: interior node (" << interior[k].x.x << ", "
              << interior[k].x.y << ") has no axis neighbor on the boundary; use projected mode";
          throw InputError(msg.str());
        }
        pending.push_back({k, a, bt->second, 1.0});
        continue;
      }
      if (it != cls.end() && it->second == 0) {
        auto [bt, inserted] = boundary_by_index.try_emplace(n, boundary.size());
        if (inserted) {
          boundary.push_back({Vec2{static_cast<double>(n.i) * h, static_cast<double>(n.j) * h}, n});
        }
        pending.push_back({k, a, bt->second, 1.0});
        continue;
      }
      const Vec2 step{static_cast<double>(kSteps[a].i) * h, static_cast<double>(kSteps[a].j) * h};
      const double t = std::clamp(domain_.ray_exit(interior[k].x, step), 0.0, 1.0);
      pending.push_back({k, a, boundary.size(), t});
      boundary.push_back({interior[k].x + t * step, std::nullopt});
    }
  }

  // Final ordering: interior row-major (already), boundary sorted by (y, x).
  std::vector<std::size_t> border(boundary.size());
  for (std::size_t b = 0; b < border.size(); ++b) border[b] = b;
  std::sort(border.begin(), border.end(), [&](std::size_t a, std::size_t b) {
    const Vec2 p = boundary[a].x;
    const Vec2 q = boundary[b].x;
    return p.y < q.y || (p.y == q.y && p.x < q.x);
  });
  std::vector<std::size_t> boundary_offset(boundary.size());
  interior_count_ = interior.size();
  for (std::size_t r = 0; r < border.size(); ++r) boundary_offset[border[r]] = interior_count_ + r;

  coords_.reserve(interior.size() + boundary.size());
  lattice_index_.reserve(coords_.capacity());
  for (const Candidate& c : interior) {
    coords_.push_back(c.x);
    lattice_index_.push_back(c.m);
  }
  for (std::size_t r = 0; r < border.size(); ++r) {
    coords_.push_back(boundary[border[r]].x);
    lattice_index_.push_back(boundary[border[r]].m);
  }
  for (std::size_t n = 0; n < coords_.size(); ++n) {
    if (lattice_index_[n]) by_index_[*lattice_index_[n]] = n;
  }

  arms_.assign(interior_count_, {});
  for (std::size_t k = 0; k < interior_count_; ++k) {
    const LatticeIndex m = *lattice_index_[k];
    for (int a = 0; a < 4; ++a) {
      arms_[k][a] = {by_index_.count({m.i + kSteps[a].i, m.j + kSteps[a].j})
                         ? by_index_.at({m.i + kSteps[a].i, m.j + kSteps[a].j})
                         : 0,
                     1.0};
    }
  }
  for (const PendingArm& p : pending) {
    arms_[p.interior][p.axis] = {boundary_offset[p.boundary], p.length};
  }

  distance_.resize(coords_.size(), 0.0);
  for (std::size_t k = 0; k < interior_count_; ++k) {
    distance_[k] = domain_.distance_to_boundary(coords_[k]);
  }
}

std::optional<std::size_t> Lattice::find(LatticeIndex m) const {
  auto it = by_index_.find(m);
  if (it == by_index_.end()) return std::nullopt;
  return it->second;
}

void Lattice::write_csv(std::ostream& out) const {
  out << "x,y,role\n";
  out.precision(17);
  for (std::size_t n = 0; n < coords_.size(); ++n) {
    out << coords_[n].x << ',' << coords_[n].y << ',' << (is_interior(n) ? "interior" : "boundary")
        << '\n';
  }
}

Lattice build_lattice(const ConvexDomain& domain, double h, BoundaryMode mode) {
  return Lattice(domain, h, mode);
}

}  // namespace dcm
