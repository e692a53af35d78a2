#include "stochhom/geometry.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>

namespace stochhom {

namespace {

constexpr double kPi = std::numbers::pi;
// Below this, distances/penetrations count as contact (classified disjoint).
constexpr double kContactTol = 1e-12;

double wrap_component(double d, double L) { return d - L * std::floor(d / L + 0.5); }

Vec3 any_perpendicular(Vec3 a) {
  Vec3 t = std::abs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  return normalized(cross(a, t));
}

// Calls fn(offset) for every periodic image of `d0` whose length can be below
// `reach`. At most one wrap per axis.
template <class Fn>
void for_each_image(Vec3 d0, double reach, double L, Fn&& fn) {
  std::array<std::array<double, 3>, 3> shifts{};
  std::array<int, 3> counts{};
  for (int i = 0; i < 3; ++i) {
    for (int s = -1; s <= 1; ++s) {
      double v = d0[i] + s * L;
      if (std::abs(v) <= reach) shifts[i][counts[i]++] = v;
    }
  }
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) fn(Vec3{shifts[0][i], shifts[1][j], shifts[2][k]});
}

Vec3 support(const Shape& s, Vec3 dir) {
  if (const auto* sp = std::get_if<Sphere>(&s)) {
    double n = norm(dir);
    return n > 0.0 ? (sp->radius / n) * dir : Vec3{sp->radius, 0, 0};
  }
  const auto& c = std::get<Cylinder>(s);
  double along = dot(c.axis, dir);
  Vec3 p = (along >= 0.0 ? c.half_length : -c.half_length) * c.axis;
  Vec3 radial = dir - along * c.axis;
  double rn = norm(radial);
  // Below this the radial part is rounding noise: the whole cap supports.
  if (rn > 1e-12 * norm(dir)) p += (c.radius / rn) * radial;
  return p;
}

// Support value h(n) of a shape centered at the origin.
double support_value(const Shape& s, Vec3 n) { return dot(n, support(s, n)); }

// Closest point to the origin on the convex hull of `pts`; shrinks `pts` to the
// supporting subset. Brute force over all faces (at most 15).
Vec3 closest_on_simplex(std::vector<Vec3>& pts) {
  const int n = static_cast<int>(pts.size());
  double best = std::numeric_limits<double>::infinity();
  Vec3 best_point;
  int best_mask = 0;
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::array<Vec3, 4> sub{};
    int m = 0;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) sub[m++] = pts[i];
    // Minimize |p0 + sum mu_i (p_i - p0)| over the affine hull.
    std::array<Vec3, 3> e{};
    for (int i = 1; i < m; ++i) e[i - 1] = sub[i] - sub[0];
    const int k = m - 1;
    std::array<double, 3> mu{};
    if (k > 0) {
      double g[3][3];
      double rhs[3];
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) g[i][j] = dot(e[i], e[j]);
        rhs[i] = -dot(e[i], sub[0]);
      }
      // Gaussian elimination with partial pivoting on a <=3x3 system.
      bool singular = false;
      double scale = 0.0;
      for (int i = 0; i < k; ++i) scale = std::max(scale, g[i][i]);
      for (int col = 0; col < k && !singular; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
          if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        if (std::abs(g[piv][col]) <= 1e-14 * scale) {
          singular = true;
          break;
        }
        if (piv != col) {
          for (int j = 0; j < k; ++j) std::swap(g[piv][j], g[col][j]);
          std::swap(rhs[piv], rhs[col]);
        }
        for (int r = col + 1; r < k; ++r) {
          double f = g[r][col] / g[col][col];
          for (int j = col; j < k; ++j) g[r][j] -= f * g[col][j];
          rhs[r] -= f * rhs[col];
        }
      }
      if (singular) continue;
      for (int i = k - 1; i >= 0; --i) {
        double acc = rhs[i];
        for (int j = i + 1; j < k; ++j) acc -= g[i][j] * mu[j];
        mu[i] = acc / g[i][i];
      }
    }
    double lambda0 = 1.0;
    bool valid = true;
    for (int i = 0; i < k; ++i) {
      if (mu[i] < -1e-12) valid = false;
      lambda0 -= mu[i];
    }
    if (!valid || lambda0 < -1e-12) continue;
    Vec3 p = sub[0];
    for (int i = 0; i < k; ++i) p += mu[i] * e[i];
    double d2 = dot(p, p);
    if (d2 < best) {
      best = d2;
      best_point = p;
      best_mask = mask;
    }
  }
  std::vector<Vec3> kept;
  for (int i = 0; i < n; ++i)
    if (best_mask & (1 << i)) kept.push_back(pts[i]);
  pts = std::move(kept);
  return best_point;
}

// Minimum over unit n of h_A(n) + h_B(-n) - n.offset: the translation needed
// to separate B from A. Positive iff the solids overlap.
struct Penetration {
  double depth;
  Vec3 normal;
};

double separation_support(const Shape& a, const Shape& b, Vec3 offset, Vec3 n) {
  return support_value(a, n) + support_value(b, -n) - dot(n, offset);
}

// Compass search on the unit sphere from `n`, eight tangent directions.
void refine_direction(const std::function<double(Vec3)>& f, Vec3& n, double& fn, double step) {
  for (int evals = 0; step > 1e-11 && evals < 4000;) {
    const Vec3 u = any_perpendicular(n);
    const Vec3 v = cross(n, u);
    bool improved = false;
    for (int k = 0; k < 8; ++k) {
      const double ang = k * kPi / 4.0;
      const Vec3 trial = normalized(n + step * (std::cos(ang) * u + std::sin(ang) * v));
      const double ft = f(trial);
      ++evals;
      if (ft < fn) {
        fn = ft;
        n = trial;
        improved = true;
        break;
      }
    }
    if (!improved) step *= 0.5;
  }
}

// Minimum of f over the great circle orthogonal to `axis`.
void minimize_on_circle(const std::function<double(Vec3)>& f, Vec3 axis, Vec3& best_n, double& best_f) {
  const Vec3 u = any_perpendicular(axis);
  const Vec3 v = cross(axis, u);
  auto at = [&](double phi) { return std::cos(phi) * u + std::sin(phi) * v; };
  constexpr int kSamples = 128;
  int best_k = 0;
  double fk = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kSamples; ++k) {
    const double val = f(at(2.0 * kPi * k / kSamples));
    if (val < fk) {
      fk = val;
      best_k = k;
    }
  }
  // Golden-section search on the bracketing arc.
  double lo = 2.0 * kPi * (best_k - 1) / kSamples, hi = 2.0 * kPi * (best_k + 1) / kSamples;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(at(x1)), f2 = f(at(x2));
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(at(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(at(x2));
    }
  }
  const double phi = f1 < f2 ? x1 : x2;
  const double val = std::min({f1, f2, fk});
  if (val < best_f) {
    best_f = val;
    best_n = val == fk ? at(2.0 * kPi * best_k / kSamples) : at(phi);
  }
}

// Global minimum of the separation support function: dense direction
// sampling, compass refinement of the best starts, and explicit searches
// along the kinks of the cylinder support functions (n orthogonal to an axis).
Penetration penetration(const Shape& a, const Shape& b, Vec3 offset) {
  const std::function<double(Vec3)> f = [&](Vec3 n) { return separation_support(a, b, offset, n); };
  std::vector<Vec3> candidates;
  auto push = [&](Vec3 v) {
    double l = norm(v);
    if (l > 1e-12) {
      candidates.push_back((1.0 / l) * v);
      candidates.push_back((-1.0 / l) * v);
    }
  };
  push(offset);
  std::vector<Vec3> axes;
  for (const Shape* s : {&a, &b}) {
    if (const auto* c = std::get_if<Cylinder>(s)) {
      axes.push_back(c->axis);
      push(c->axis);
      push(offset - dot(offset, c->axis) * c->axis);
    }
  }
  if (axes.size() == 2) push(cross(axes[0], axes[1]));
  constexpr int kFib = 192;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < kFib; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / kFib;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    candidates.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
  }

  std::vector<std::pair<double, Vec3>> scored;
  scored.reserve(candidates.size());
  for (Vec3 n : candidates) scored.emplace_back(f(n), n);
  std::partial_sort(scored.begin(), scored.begin() + 4, scored.end(),
                    [](const auto& x, const auto& y) { return x.first < y.first; });

  Penetration best{scored.front().first, scored.front().second};
  for (int i = 0; i < 4; ++i) {
    Vec3 n = scored[static_cast<std::size_t>(i)].second;
    double fn = scored[static_cast<std::size_t>(i)].first;
    refine_direction(f, n, fn, 0.1);
    if (fn < best.depth) best = {fn, n};
  }
  for (Vec3 ax : axes) minimize_on_circle(f, ax, best.normal, best.depth);
  // Refinement from the kink minimum may still descend into a smooth region.
  refine_direction(f, best.normal, best.depth, 1e-3);
  return best;
}

}  // namespace

Vec3 support_point(const Shape& s, Vec3 dir) { return support(s, dir); }

Vec3 Inclusion::center() const {
  return std::visit([](const auto& s) { return s.center; }, shape);
}

Vec3 wrap_point(Vec3 p, const PeriodicCell& cell) {
  const double L = cell.edge_length;
  for (int i = 0; i < 3; ++i) {
    double v = p[i] - L * std::floor(p[i] / L);
    if (v >= L) v -= L;  // rounding of tiny negatives
    p[i] = v;
  }
  return p;
}

Vec3 periodic_displacement(Vec3 a, Vec3 b, const PeriodicCell& cell) {
  const double L = cell.edge_length;
  return {wrap_component(b.x - a.x, L), wrap_component(b.y - a.y, L), wrap_component(b.z - a.z, L)};
}

double bounding_radius(const Shape& s) {
  if (const auto* sp = std::get_if<Sphere>(&s)) return sp->radius;
  const auto& c = std::get<Cylinder>(s);
  return std::hypot(c.radius, c.half_length);
}

double signed_distance_to_cylinder(Vec3 q, const Cylinder& c) {
  double t = dot(q, c.axis);
  double rho = norm(q - t * c.axis);
  double dr = rho - c.radius;
  double dt = std::abs(t) - c.half_length;
  if (dr <= 0.0 && dt <= 0.0) return std::max(dr, dt);
  return std::hypot(std::max(dr, 0.0), std::max(dt, 0.0));
}

namespace {

// Outward direction of the signed distance field of a cylinder at q.
Vec3 cylinder_distance_gradient(Vec3 q, const Cylinder& c) {
  double t = dot(q, c.axis);
  Vec3 radial = q - t * c.axis;
  double rho = norm(radial);
  Vec3 rhat = rho > 1e-300 ? (1.0 / rho) * radial : any_perpendicular(c.axis);
  Vec3 ahat = (t >= 0.0 ? 1.0 : -1.0) * c.axis;
  double dr = rho - c.radius;
  double dt = std::abs(t) - c.half_length;
  if (dr <= 0.0 && dt <= 0.0) return dr > dt ? rhat : ahat;
  if (dt <= 0.0) return rhat;
  if (dr <= 0.0) return ahat;
  return normalized(dr * rhat + dt * ahat);
}

Overlap merge(Overlap acc, const Overlap& o) {
  if (o.overlapping && (!acc.overlapping || o.depth > acc.depth)) return o;
  return acc;
}

}  // namespace

Overlap sphere_sphere_overlap(const Sphere& s1, const Sphere& s2, const PeriodicCell& cell) {
  Vec3 d0 = periodic_displacement(s1.center, s2.center, cell);
  const double reach = s1.radius + s2.radius;
  Overlap result;
  for_each_image(d0, reach, cell.edge_length, [&](Vec3 d) {
    double dist = norm(d);
    if (dist < reach) {
      Vec3 n = dist > 0.0 ? (1.0 / dist) * d : Vec3{1, 0, 0};
      double depth = reach - dist;
      result = merge(result, {true, depth, n, d});
    }
  });
  return result;
}

Overlap sphere_cylinder_overlap(const Sphere& s, const Cylinder& c, const PeriodicCell& cell) {
  // Offset of the sphere center relative to the cylinder center.
  Vec3 q0 = periodic_displacement(c.center, s.center, cell);
  const double reach = s.radius + bounding_radius(c);
  Overlap result;
  for_each_image(q0, reach, cell.edge_length, [&](Vec3 q) {
    double sd = signed_distance_to_cylinder(q, c);
    if (sd < s.radius) {
      // The cylinder (second argument) moves against the distance gradient.
      result = merge(result, {true, s.radius - sd, -cylinder_distance_gradient(q, c), -q});
    }
  });
  return result;
}

double convex_distance(const Shape& a, const Shape& b, Vec3 offset) {
  // GJK on the Minkowski difference A - (B + offset).
  auto md_support = [&](Vec3 dir) { return support(a, dir) - (support(b, -dir) + offset); };
  Vec3 v = md_support(-offset);
  if (norm(offset) < 1e-300) return 0.0;
  std::vector<Vec3> simplex{v};
  for (int iter = 0; iter < 128; ++iter) {
    double vv = dot(v, v);
    if (vv < 1e-28) return 0.0;
    Vec3 w = md_support(-v);
    // Lower bound on the distance is v.w / |v|; stop when the gap closes.
    double gap = vv - dot(v, w);
    if (gap <= 1e-13 * std::sqrt(vv) || gap <= 1e-24) return std::sqrt(vv);
    bool duplicate = false;
    for (const auto& p : simplex)
      if (dot(p - w, p - w) < 1e-28) duplicate = true;
    if (duplicate) return std::sqrt(vv);
    simplex.push_back(w);
    v = closest_on_simplex(simplex);
    if (simplex.size() == 4) return 0.0;
  }
  return norm(v);
}

namespace {

bool cylinder_less(const Cylinder& a, const Cylinder& b) {
  auto key = [](const Cylinder& c) {
    return std::array{c.radius, c.half_length, c.center.x, c.center.y, c.center.z, c.axis.x, c.axis.y, c.axis.z};
  };
  return key(a) < key(b);
}

}  // namespace

Overlap cylinder_cylinder_overlap(const Cylinder& c1, const Cylinder& c2, const PeriodicCell& cell) {
  // Fixed evaluation order keeps the result exactly antisymmetric.
  if (cylinder_less(c2, c1)) {
    Overlap o = cylinder_cylinder_overlap(c2, c1, cell);
    o.normal = -o.normal;
    o.offset = -o.offset;
    return o;
  }
  Vec3 d0 = periodic_displacement(c1.center, c2.center, cell);
  const double reach = bounding_radius(c1) + bounding_radius(c2);
  const Shape a = c1;
  const Shape b = c2;
  Overlap result;
  for_each_image(d0, reach, cell.edge_length, [&](Vec3 d) {
    if (convex_distance(a, b, d) > kContactTol) return;
    Penetration p = penetration(a, b, d);
    if (p.depth > kContactTol) result = merge(result, {true, p.depth, p.normal, d});
  });
  return result;
}

Overlap shape_overlap(const Shape& a, const Shape& b, const PeriodicCell& cell) {
  if (const auto* sa = std::get_if<Sphere>(&a)) {
    if (const auto* sb = std::get_if<Sphere>(&b)) return sphere_sphere_overlap(*sa, *sb, cell);
    return sphere_cylinder_overlap(*sa, std::get<Cylinder>(b), cell);
  }
  const auto& ca = std::get<Cylinder>(a);
  if (const auto* sb = std::get_if<Sphere>(&b)) {
    Overlap o = sphere_cylinder_overlap(*sb, ca, cell);
    o.normal = -o.normal;
    o.offset = -o.offset;
    return o;
  }
  return cylinder_cylinder_overlap(ca, std::get<Cylinder>(b), cell);
}

double sphere_wave_factor(Vec3 dir, const SurfaceWaves& waves) {
  if (!waves.active()) return 1.0;
  double r = norm(dir);
  if (r == 0.0) return 1.0;
  double theta = std::acos(std::clamp(dir.z / r, -1.0, 1.0));
  double phi = std::atan2(dir.y, dir.x);
  return 1.0 + waves.amplitude * std::sin(waves.count * theta) * std::sin(waves.count * phi);
}

double cylinder_wave_factor(double t, double half_length, const SurfaceWaves& waves) {
  if (!waves.active()) return 1.0;
  return 1.0 + waves.amplitude * std::sin(waves.count * kPi * t / half_length);
}

bool shape_contains_offset(const Shape& s, Vec3 o, const SurfaceWaves& waves) {
  if (const auto* sp = std::get_if<Sphere>(&s)) {
    double r = sp->radius * sphere_wave_factor(o, waves);
    return dot(o, o) < r * r;
  }
  const auto& c = std::get<Cylinder>(s);
  double t = dot(o, c.axis);
  if (std::abs(t) >= c.half_length) return false;
  Vec3 radial = o - t * c.axis;
  double r = c.radius * cylinder_wave_factor(t, c.half_length, waves);
  return dot(radial, radial) < r * r;
}

bool shape_contains(const Shape& s, Vec3 p, const SurfaceWaves& waves, const PeriodicCell& cell) {
  Vec3 center = std::visit([](const auto& x) { return x.center; }, s);
  Vec3 d0 = periodic_displacement(center, p, cell);
  double reach = bounding_radius(s) * (1.0 + (waves.active() ? waves.amplitude : 0.0));
  bool inside = false;
  for_each_image(d0, reach, cell.edge_length, [&](Vec3 d) {
    if (!inside && shape_contains_offset(s, d, waves)) inside = true;
  });
  return inside;
}

bool sphere_contains(const Sphere& s, Vec3 p, const PeriodicCell& cell) {
  Vec3 d = periodic_displacement(s.center, p, cell);
  return dot(d, d) < s.radius * s.radius;
}

bool in_defect_zone(const Imperfections& imp, Vec3 p, const PeriodicCell& cell) {
  for (const auto& z : imp.zones)
    if (sphere_contains(Sphere{z.center, z.radius}, p, cell)) return true;
  return false;
}

int point_in_microstructure(Vec3 p, const Microstructure& m) {
  const auto& imp = m.imperfections;
  for (const auto& f : imp.fragments)
    if (sphere_contains(f, p, m.cell)) return kInclusionPhase;
  if (!m.inclusions.empty() && in_defect_zone(imp, p, m.cell)) return kMatrixPhase;
  for (const auto& inc : m.inclusions)
    if (shape_contains(inc.shape, p, imp.waves, m.cell)) return inc.phase_id;
  return kMatrixPhase;
}

double shape_volume(const Shape& s) {
  if (const auto* sp = std::get_if<Sphere>(&s)) return 4.0 * kPi * std::pow(sp->radius, 3) / 3.0;
  const auto& c = std::get<Cylinder>(s);
  return 2.0 * kPi * c.radius * c.radius * c.half_length;
}

FamilyFractions analytic_family_fractions(const Microstructure& m) {
  const double cell_volume = std::pow(m.cell.edge_length, 3);
  FamilyFractions f;
  for (const auto& inc : m.inclusions) {
    double v = shape_volume(inc.shape) / cell_volume;
    (inc.is_sphere() ? f.spheres : f.cylinders) += v;
  }
  for (const auto& s : m.imperfections.fragments) f.fragments += shape_volume(s) / cell_volume;
  return f;
}

std::vector<double> analytic_volume_fraction(const Microstructure& m) {
  std::vector<double> out(static_cast<std::size_t>(std::max(m.phase_count, 2)), 0.0);
  double inclusion = analytic_family_fractions(m).total();
  out[kInclusionPhase] = inclusion;
  out[kMatrixPhase] = 1.0 - inclusion;
  return out;
}

bool is_non_overlapping(const Microstructure& m) {
  std::vector<Shape> shapes;
  shapes.reserve(m.inclusions.size() + m.imperfections.fragments.size());
  for (const auto& inc : m.inclusions) shapes.push_back(inc.shape);
  for (const auto& f : m.imperfections.fragments) shapes.push_back(f);
  for (std::size_t i = 0; i < shapes.size(); ++i)
    for (std::size_t j = i + 1; j < shapes.size(); ++j)
      if (shape_overlap(shapes[i], shapes[j], m.cell)) return false;
  return true;
}

}  // namespace stochhom
