// Reference computations used by the tests. They share no code with the
// library beyond the Vec2 and lattice data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dcm/meshfn.hpp"

namespace oracle {

using dcm::Vec2;

struct HalfPlane {
  Vec2 n;
  double c;  // n . p <= c
};

inline std::vector<HalfPlane> supporting_constraints(const dcm::MeshFunction& v, std::size_t node) {
  const dcm::Lattice& lat = v.lattice();
  std::vector<HalfPlane> out;
  for (std::size_t y = 0; y < lat.size(); ++y) {
    if (y == node) continue;
    out.push_back({lat.point(y) - lat.point(node), v[y] - v[node]});
  }
  return out;
}

inline double polygon_area(std::vector<Vec2> pts) {
  if (pts.size() < 3) return 0.0;
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  auto turn = [](Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);
  double a = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 p = hull[i];
    const Vec2 q = hull[(i + 1) % hull.size()];
    a += p.x * q.y - p.y * q.x;
  }
  return 0.5 * std::abs(a);
}

// Intersect every pair of constraint lines, keep feasible points, take the hull.
inline double subdifferential_area_by_vertices(const dcm::MeshFunction& v, std::size_t node) {
  const auto hp = supporting_constraints(v, node);
  std::vector<Vec2> feasible;
  for (std::size_t i = 0; i < hp.size(); ++i) {
    for (std::size_t j = i + 1; j < hp.size(); ++j) {
      const double det = hp[i].n.x * hp[j].n.y - hp[i].n.y * hp[j].n.x;
      if (std::abs(det) < 1e-14) continue;
      const Vec2 p{(hp[i].c * hp[j].n.y - hp[j].c * hp[i].n.y) / det,
                   (hp[i].n.x * hp[j].c - hp[j].n.x * hp[i].c) / det};
      bool ok = true;
      for (const HalfPlane& h : hp) {
        const double tol = 1e-10 * (1.0 + std::abs(h.c) + std::hypot(h.n.x, h.n.y) * std::hypot(p.x, p.y));
        if (h.n.x * p.x + h.n.y * p.y - h.c > tol) {
          ok = false;
          break;
        }
      }
      if (ok) feasible.push_back(p);
    }
  }
  return polygon_area(feasible);
}

// Axis difference-quotient box containing the subdifferential (box lattices).
inline std::array<double, 4> axis_box(const dcm::MeshFunction& v, std::size_t node) {
  const dcm::Lattice& lat = v.lattice();
  const auto m = *lat.index_of(node);
  const double h = lat.h();
  auto at = [&](long di, long dj) { return v[*lat.find({m.i + di, m.j + dj})]; };
  return {(v[node] - at(-1, 0)) / h, (at(1, 0) - v[node]) / h, (v[node] - at(0, -1)) / h,
          (at(0, 1) - v[node]) / h};
}

inline double subdifferential_area_monte_carlo(const dcm::MeshFunction& v, std::size_t node,
                                               std::size_t samples, std::uint64_t seed) {
  const auto hp = supporting_constraints(v, node);
  const auto b = axis_box(v, node);
  if (b[0] >= b[1] || b[2] >= b[3]) return 0.0;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ux(b[0], b[1]);
  std::uniform_real_distribution<double> uy(b[2], b[3]);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 p{ux(gen), uy(gen)};
    bool in = true;
    for (const HalfPlane& h : hp) {
      if (h.n.x * p.x + h.n.y * p.y > h.c) {
        in = false;
        break;
      }
    }
    hits += in ? 1 : 0;
  }
  return (b[1] - b[0]) * (b[3] - b[2]) * static_cast<double>(hits) / static_cast<double>(samples);
}

// Primal form of the envelope: best plane through three samples lying below
// every sample.
inline double envelope_by_planes(const std::vector<Vec2>& z, const std::vector<double>& g, Vec2 x) {
  double best = -INFINITY;
  const std::size_t n = z.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const double ax = z[j].x - z[i].x;
        const double ay = z[j].y - z[i].y;
        const double bx = z[k].x - z[i].x;
        const double by = z[k].y - z[i].y;
        const double det = ax * by - ay * bx;
        if (std::abs(det) < 1e-12) continue;
        const double gj = g[j] - g[i];
        const double gk = g[k] - g[i];
        const double sx = (gj * by - gk * ay) / det;
        const double sy = (ax * gk - bx * gj) / det;
        const double c = g[i] - sx * z[i].x - sy * z[i].y;
        bool ok = true;
        for (std::size_t m = 0; m < n && ok; ++m) {
          ok = sx * z[m].x + sy * z[m].y + c <= g[m] + 1e-10;
        }
        if (ok) best = std::max(best, sx * x.x + sy * x.y + c);
      }
    }
  }
  return best;
}

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    }
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

// max over a random family of affine functions plus a small quadratic.
inline dcm::MeshFunction random_convex(const dcm::LatticePtr& lat, std::mt19937_64& gen,
                                       int pieces, double quad) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::array<double, 3>> planes(static_cast<std::size_t>(pieces));
  for (auto& p : planes) p = {u(gen), u(gen), u(gen)};
  std::vector<double> vals(lat->size());
  for (std::size_t n = 0; n < vals.size(); ++n) {
    const Vec2 x = lat->point(n);
    double m = -INFINITY;
    for (const auto& p : planes) m = std::max(m, p[0] * x.x + p[1] * x.y + p[2]);
    vals[n] = m + quad * (x.x * x.x + x.y * x.y);
  }
  return dcm::MeshFunction(lat, std::move(vals));
}

}  // namespace oracle
