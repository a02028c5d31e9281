#include "dcm/meshfn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "dcm/error.hpp"

namespace dcm {
namespace {

std::optional<DifferenceForm> make_form(const Lattice& lattice, std::size_t node, Direction e,
                                        StepPolicy policy) {
  const double h = lattice.h();
  if (e.is_axis() && policy == StepPolicy::clipped) {
    const bool along_x = e.b == 0;
    const AxisArm& fwd = lattice.arm(node, along_x ? Axis::plus_x : Axis::plus_y);
    const AxisArm& bwd = lattice.arm(node, along_x ? Axis::minus_x : Axis::minus_y);
    const double a = fwd.length;
    const double b = bwd.length;
    const double s = 2.0 / (h * h);
    DifferenceForm f;
    f.plus = fwd.node;
    f.minus = bwd.node;
    f.w_plus = s / (a * (a + b));
    f.w_minus = s / (b * (a + b));
    f.w_center = s / (a * b);
    return f;
  }
  const auto m = lattice.index_of(node);
  if (!m) return std::nullopt;
  const auto plus = lattice.find({m->i + e.a, m->j + e.b});
  const auto minus = lattice.find({m->i - e.a, m->j - e.b});
  if (!plus || !minus) return std::nullopt;
  const double w = 1.0 / (h * h * e.norm2());
  DifferenceForm f;
  f.plus = *plus;
  f.minus = *minus;
  f.w_plus = w;
  f.w_minus = w;
  f.w_center = 2.0 * w;
  return f;
}

void require_interior(const Lattice& lattice, std::size_t node) {
  if (!lattice.is_interior(node)) {
    throw PreconditionError("difference operators are defined at interior nodes only");
  }
}

}  // namespace

MeshFunction::MeshFunction(LatticePtr lattice, std::vector<double> values)
    : lattice_(std::move(lattice)), values_(std::move(values)) {
  if (!lattice_) throw PreconditionError("mesh function needs a lattice");
  if (values_.size() != lattice_->size()) {
    throw PreconditionError("mesh function value count does not match the lattice node count");
  }
  for (std::size_t n = 0; n < values_.size(); ++n) {
    if (!std::isfinite(values_[n])) {
      const Vec2 x = lattice_->point(n);
      std::ostringstream msg;
      msg << "non-finite mesh function value at node (" << x.x << ", " << x.y << ")";
      throw InputError(msg.str());
    }
  }
}

MeshFunction MeshFunction::sample(LatticePtr lattice, const std::function<double(Vec2)>& fn) {
  std::vector<double> v(lattice->size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = fn(lattice->point(n));
  return MeshFunction(std::move(lattice), std::move(v));
}

MeshFunction MeshFunction::zeros(LatticePtr lattice) {
  const std::size_t n = lattice->size();
  return MeshFunction(std::move(lattice), std::vector<double>(n, 0.0));
}

double MeshFunction::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

double MeshFunction::oscillation() const {
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  return *hi - *lo;
}

void MeshFunction::write_csv(std::ostream& out) const {
  out << "x,y,value\n";
  out.precision(17);
  for (std::size_t n = 0; n < values_.size(); ++n) {
    const Vec2 x = lattice_->point(n);
    out << x.x << ',' << x.y << ',' << values_[n] << '\n';
  }
}

MeshFunction MeshFunction::read_csv(LatticePtr lattice, std::istream& in) {
  const double h = lattice->h();
  auto key = [h](Vec2 x) {
    return std::pair{std::llround(x.x / h * 1e6), std::llround(x.y / h * 1e6)};
  };
  std::map<std::pair<long long, long long>, std::size_t> nodes;
  for (std::size_t n = 0; n < lattice->size(); ++n) nodes[key(lattice->point(n))] = n;

  std::vector<double> values(lattice->size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(lattice->size(), false);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (row == 1 && line.rfind("x,", 0) == 0) continue;
    std::istringstream fields(line);
    std::string sx, sy, sv;
    if (!std::getline(fields, sx, ',') || !std::getline(fields, sy, ',') ||
        !std::getline(fields, sv, ',')) {
      throw InputError("mesh function CSV: malformed row " + std::to_string(row));
    }
    Vec2 x;
    double value;
    try {
      x = {std::stod(sx), std::stod(sy)};
      value = std::stod(sv);
    } catch (const std::exception&) {
      throw InputError("mesh function CSV: non-numeric field in row " + std::to_string(row));
    }
    auto it = nodes.find(key(x));
    if (it == nodes.end()) {
      throw InputError("mesh function CSV: row " + std::to_string(row) +
                       " does not match any lattice node");
    }
    values[it->second] = value;
    seen[it->second] = true;
  }
  for (std::size_t n = 0; n < seen.size(); ++n) {
    if (!seen[n]) {
      const Vec2 x = lattice->point(n);
      std::ostringstream msg;
      msg << "mesh function CSV: no value for node (" << x.x << ", " << x.y << ")";
      throw InputError(msg.str());
    }
  }
  return MeshFunction(std::move(lattice), std::move(values));
}

Direction Direction::perp() const {
  Direction p{-b, a};
  if (p.a < 0 || (p.a == 0 && p.b < 0)) p = {-p.a, -p.b};
  return p;
}

DirectionStencil::DirectionStencil(int width) : width_(width) {
  if (width < 1) throw InputError("stencil width must be at least 1");
  for (int a = 0; a <= width; ++a) {
    for (int b = -width; b <= width; ++b) {
      if (a == 0 && b <= 0) continue;
      if (std::gcd(a, std::abs(b)) != 1) continue;
      directions_.push_back({a, b});
    }
  }
  std::sort(directions_.begin(), directions_.end(), [](Direction p, Direction q) {
    if (p.norm2() != q.norm2()) return p.norm2() < q.norm2();
    return std::atan2(p.b, p.a) < std::atan2(q.b, q.a);
  });
  auto index = [this](Direction d) {
    return static_cast<std::size_t>(std::find(directions_.begin(), directions_.end(), d) -
                                    directions_.begin());
  };
  for (std::size_t k = 0; k < directions_.size(); ++k) {
    const Direction d = directions_[k];
    if (d.a > 0 && d.b >= 0) pairs_.push_back({k, index(d.perp())});
  }
  std::stable_sort(pairs_.begin(), pairs_.end(), [this](const auto& p, const auto& q) {
    return directions_[p[0]].norm2() < directions_[q[0]].norm2();
  });
}

std::optional<double> second_difference(const MeshFunction& v, std::size_t node, Direction e,
                                        StepPolicy policy) {
  require_interior(v.lattice(), node);
  const auto form = make_form(v.lattice(), node, e, policy);
  if (!form) return std::nullopt;
  return form->apply(v.values(), v[node]);
}

double lambda1_h(const MeshFunction& v, std::size_t node, const DirectionStencil& stencil) {
  require_interior(v.lattice(), node);
  double best = std::numeric_limits<double>::infinity();
  for (const Direction& e : stencil.directions()) {
    if (auto d = second_difference(v, node, e, StepPolicy::clipped)) best = std::min(best, *d);
  }
  if (!std::isfinite(best)) throw PreconditionError("no stencil direction available at node");
  return best;
}

double discrete_laplacian(const MeshFunction& v, std::size_t node) {
  return *second_difference(v, node, {1, 0}, StepPolicy::clipped) +
         *second_difference(v, node, {0, 1}, StepPolicy::clipped);
}

double convexity_threshold(const MeshFunction& v, double tol) {
  const double h = v.lattice().h();
  return -tol * std::max(1.0, v.max_abs()) / (h * h);
}

ConvexityResult is_discrete_convex(const MeshFunction& v, const DirectionStencil& stencil,
                                   double tol) {
  const double threshold = convexity_threshold(v, tol);
  ConvexityResult result;
  result.min_lambda = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < v.lattice().interior_count(); ++n) {
    for (const Direction& e : stencil.directions()) {
      const auto d = second_difference(v, n, e, StepPolicy::clipped);
      if (!d) continue;
      if (*d < result.min_lambda) {
        result.min_lambda = *d;
        if (*d < threshold) result.witness = ConvexityWitness{n, e, *d};
      }
    }
  }
  result.convex = result.min_lambda >= threshold;
  if (result.convex) result.witness.reset();
  return result;
}

StencilTable::StencilTable(const Lattice& lattice, const DirectionStencil& stencil)
    : stencil_(stencil) {
  const std::size_t n_int = lattice.interior_count();
  form_begin_.reserve(n_int + 1);
  pair_begin_.reserve(n_int + 1);
  std::vector<std::ptrdiff_t> slot(stencil.directions().size());
  for (std::size_t n = 0; n < n_int; ++n) {
    form_begin_.push_back(forms_.size());
    pair_begin_.push_back(pairs_.size());
    const std::size_t base = forms_.size();
    for (std::size_t k = 0; k < stencil.directions().size(); ++k) {
      auto form = make_form(lattice, n, stencil.directions()[k], StepPolicy::clipped);
      if (!form) {
        slot[k] = -1;
        continue;
      }
      form->direction = k;
      slot[k] = static_cast<std::ptrdiff_t>(forms_.size() - base);
      forms_.push_back(*form);
    }
    for (const auto& p : stencil.pairs()) {
      if (slot[p[0]] >= 0 && slot[p[1]] >= 0) {
        pairs_.push_back({static_cast<std::size_t>(slot[p[0]]), static_cast<std::size_t>(slot[p[1]])});
      }
    }
  }
  form_begin_.push_back(forms_.size());
  pair_begin_.push_back(pairs_.size());
}

}  // namespace dcm
