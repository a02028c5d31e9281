#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dcm/error.hpp"
#include "dcm/scheme.hpp"

namespace dcm {
namespace {

double coordinate_scale(const EnvelopeSamples& s, Vec2 x) {
  double r = 0.0;
  for (const Vec2& p : s.points) r = std::max(r, norm(p - x));
  return std::max(r, 1e-300);
}

[[noreturn]] void outside_hull(Vec2 x) {
  std::ostringstream msg;
  msg << "envelope query point (" << x.x << ", " << x.y << ") lies outside the sample hull";
  throw PreconditionError(msg.str());
}

// Dual form: the envelope at x is the least interpolated value over sample
// simplices containing x.
EnvelopeValue by_enumeration(const EnvelopeSamples& s, Vec2 x) {
  const std::size_t n = s.points.size();
  const double scale = coordinate_scale(s, x);
  const double tol = 1e-12 * scale;
  double best = std::numeric_limits<double>::infinity();
  std::optional<Affine> support;

  for (std::size_t i = 0; i < n; ++i) {
    if (norm(s.points[i] - x) <= tol) best = std::min(best, s.values[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 d = s.points[j] - s.points[i];
      const double len2 = norm2(d);
      if (len2 <= tol * tol) continue;
      const Vec2 r = x - s.points[i];
      if (std::abs(cross(d, r)) > tol * std::sqrt(len2)) continue;
      const double t = dot(r, d) / len2;
      if (t < -1e-12 || t > 1.0 + 1e-12) continue;
      best = std::min(best, (1.0 - t) * s.values[i] + t * s.values[j]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 pi = s.points[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec2 e1 = s.points[j] - pi;
      for (std::size_t k = j + 1; k < n; ++k) {
        const Vec2 e2 = s.points[k] - pi;
        const double det = cross(e1, e2);
        if (std::abs(det) <= 1e-14 * scale * scale) continue;
        const Vec2 r = x - pi;
        const double bj = cross(r, e2) / det;
        const double bk = cross(e1, r) / det;
        const double bi = 1.0 - bj - bk;
        if (bi < -1e-12 || bj < -1e-12 || bk < -1e-12) continue;
        const double value = bi * s.values[i] + bj * s.values[j] + bk * s.values[k];
        if (value < best) {
          best = value;
          support.reset();
          if (bi > 1e-9 && bj > 1e-9 && bk > 1e-9) {
            // plane through the three lifted samples
            const double gj = s.values[j] - s.values[i];
            const double gk = s.values[k] - s.values[i];
            const Vec2 slope{(gj * e2.y - gk * e1.y) / det, (e1.x * gk - e2.x * gj) / det};
            support = Affine{slope, s.values[i] - dot(slope, pi)};
          }
        }
      }
    }
  }
  if (!std::isfinite(best)) outside_hull(x);
  return {best, support};
}

// Dense two-phase simplex on
//   min sum_i lambda_i g_i  s.t.  sum lambda_i = 1, sum lambda_i (z_i - x) = 0, lambda >= 0,
// with Bland's rule. The multipliers of the equality rows are the optimal
// affine minorant.
class DualSimplex {
 public:
  DualSimplex(const EnvelopeSamples& s, Vec2 x) : n_(s.points.size()), cols_(n_ + 3) {
    const double scale = coordinate_scale(s, x);
    A_.assign(3 * cols_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      A_[j] = 1.0;
      A_[cols_ + j] = (s.points[j].x - x.x) / scale;
      A_[2 * cols_ + j] = (s.points[j].y - x.y) / scale;
    }
    original_ = A_;
    for (int r = 0; r < 3; ++r) at(r, n_ + r) = 1.0;
    rhs_ = {1.0, 0.0, 0.0};
    basis_ = {n_, n_ + 1, n_ + 2};
    scale_ = scale;
    double gmax = 0.0;
    for (double g : s.values) gmax = std::max(gmax, std::abs(g));
    cost_eps_ = 1e-12 * std::max(1.0, gmax);
  }

  EnvelopeValue run(const EnvelopeSamples& s, Vec2 x) {
    std::vector<double> phase1(cols_, 0.0);
    for (int r = 0; r < 3; ++r) phase1[n_ + r] = 1.0;
    iterate(phase1, n_, 1e-12);
    double infeas = 0.0;
    for (int r = 0; r < 3; ++r) {
      if (basis_[r] >= n_) infeas += rhs_[r];
    }
    if (infeas > 1e-9) outside_hull(x);
    // drive remaining artificials out of the basis
    for (int r = 0; r < 3; ++r) {
      if (basis_[r] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(at(r, j)) > 1e-9 && !in_basis(j)) {
          pivot(r, j);
          break;
        }
      }
    }
    std::vector<double> cost(cols_, 0.0);
    std::copy(s.values.begin(), s.values.end(), cost.begin());
    iterate(cost, n_, cost_eps_);

    const std::array<double, 3> y = multipliers(cost);
    double value = 0.0;
    for (int r = 0; r < 3; ++r) {
      if (basis_[r] < n_) value += cost[basis_[r]] * rhs_[r];
    }
    const Vec2 slope{y[1] / scale_, y[2] / scale_};
    return {value, Affine{slope, y[0] - dot(slope, x)}};
  }

 private:
  double& at(int r, std::size_t c) { return A_[static_cast<std::size_t>(r) * cols_ + c]; }
  bool in_basis(std::size_t j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  void pivot(int r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j < cols_; ++j) at(r, j) /= p;
    rhs_[r] /= p;
    for (int q = 0; q < 3; ++q) {
      if (q == r) continue;
      const double f = at(q, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) at(q, j) -= f * at(r, j);
      rhs_[q] -= f * rhs_[r];
      at(q, c) = 0.0;
    }
    basis_[r] = c;
  }

  // y^T = c_B^T B^{-1}; the artificial columns of the tableau hold B^{-1}.
  std::array<double, 3> multipliers(const std::vector<double>& cost) {
    std::array<double, 3> y{};
    for (int k = 0; k < 3; ++k) {
      for (int r = 0; r < 3; ++r) y[k] += cost[basis_[r]] * at(r, n_ + k);
    }
    return y;
  }

  void iterate(const std::vector<double>& cost, std::size_t entering_limit, double eps) {
    const std::size_t cap = 50 * (n_ + 3) + 100;
    for (std::size_t step = 0; step < cap; ++step) {
      const std::array<double, 3> y = multipliers(cost);
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < entering_limit; ++j) {
        if (in_basis(j)) continue;
        const double d = cost[j] - (y[0] * original_col(0, j) + y[1] * original_col(1, j) +
                                    y[2] * original_col(2, j));
        if (d < -eps) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < 3; ++r) {
        const double a = at(r, enter);
        if (a <= 1e-12) continue;
        const double ratio = std::max(rhs_[r], 0.0) / a;
        if (ratio < best || (ratio == best && leave >= 0 && basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) throw SolverError("envelope linear program is unbounded");
      pivot(leave, enter);
    }
    throw SolverError("envelope simplex exceeded its pivot budget");
  }

  double original_col(int r, std::size_t j) const {
    if (j >= n_) return j - n_ == static_cast<std::size_t>(r) ? 1.0 : 0.0;
    return original_[static_cast<std::size_t>(r) * cols_ + j];
  }

  std::size_t n_;
  std::size_t cols_;
  std::vector<double> A_;
  std::vector<double> original_;
  std::array<double, 3> rhs_{};
  std::array<std::size_t, 3> basis_{};
  double scale_ = 1.0;
  double cost_eps_ = 1e-12;
};

}  // namespace

EnvelopeSamples EnvelopeSamples::on_boundary(const ConvexDomain& domain, const ScalarField& g,
                                             int count) {
  if (count < 3) throw InputError("envelope needs at least 3 boundary samples");
  EnvelopeSamples s;
  for (int k = 0; k < count; ++k) {
    const Vec2 p = domain.boundary_point(static_cast<double>(k) / count);
    s.points.push_back(p);
    s.values.push_back(g(p));
  }
  return s;
}

EnvelopeSamples EnvelopeSamples::at_boundary_nodes(const MeshFunction& v) {
  const Lattice& lat = v.lattice();
  EnvelopeSamples s;
  for (std::size_t b = lat.interior_count(); b < lat.size(); ++b) {
    s.points.push_back(lat.point(b));
    s.values.push_back(v[b]);
  }
  return s;
}

EnvelopeValue convex_envelope(const EnvelopeSamples& samples, Vec2 x, EnvelopeMethod method) {
  if (samples.points.size() != samples.values.size() || samples.points.empty()) {
    throw InputError("envelope samples need matching, nonempty point and value lists");
  }
  for (double g : samples.values) {
    if (!std::isfinite(g)) throw InputError("envelope sample value is not finite");
  }
  if (method == EnvelopeMethod::automatic) {
    method = samples.points.size() <= 200 ? EnvelopeMethod::enumeration : EnvelopeMethod::simplex;
  }
  if (method == EnvelopeMethod::enumeration) return by_enumeration(samples, x);
  DualSimplex lp(samples, x);
  return lp.run(samples, x);
}

double convex_envelope(const ConvexDomain& domain, const ScalarField& g, int boundary_samples,
                       Vec2 x) {
  return convex_envelope(EnvelopeSamples::on_boundary(domain, g, boundary_samples), x).value;
}

}  // namespace dcm
