#pragma once

// Periodic geometry kernel: shapes in the unit cell, minimum-image arithmetic,
// overlap predicates with a penetration measure, and point membership.

#include <array>
#include <cmath>
#include <variant>
#include <vector>

namespace stochhom {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return s * a; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;
  Vec3& operator+=(Vec3 b) { x += b.x; y += b.y; z += b.z; return *this; }
  Vec3& operator-=(Vec3 b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(Vec3 a) { return (1.0 / norm(a)) * a; }

// Edge length is fixed to 1 in normalized units; kept as a field so the
// serialized header carries it.
struct PeriodicCell {
  double edge_length = 1.0;
};

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

// Flat-capped finite cylinder. `axis` is a unit vector; the solid spans
// center +- half_length * axis.
struct Cylinder {
  Vec3 center;
  Vec3 axis{0.0, 0.0, 1.0};
  double radius = 0.0;
  double half_length = 0.0;

  double aspect_ratio() const { return half_length / radius; }
};

using Shape = std::variant<Sphere, Cylinder>;

inline constexpr int kMatrixPhase = 0;
inline constexpr int kInclusionPhase = 1;

struct Inclusion {
  Shape shape;
  int phase_id = kInclusionPhase;

  bool is_sphere() const { return std::holds_alternative<Sphere>(shape); }
  bool is_cylinder() const { return std::holds_alternative<Cylinder>(shape); }
  const Sphere& sphere() const { return std::get<Sphere>(shape); }
  const Cylinder& cylinder() const { return std::get<Cylinder>(shape); }
  Vec3 center() const;
};

// Separable sinusoidal modulation of inclusion surfaces. Spheres use
// r(1 + A sin(m theta) sin(m phi)); cylinder lateral surfaces use
// r(1 + A sin(m pi t / h)) along the axial coordinate t. Caps are untouched.
struct SurfaceWaves {
  double amplitude = 0.0;
  int count = 0;
  // (perturbed volume - nominal volume) / nominal volume over all inclusions.
  double volume_drift = 0.0;

  bool active() const { return amplitude > 0.0 && count > 0; }
};

// Spherical zone from which inclusion material is removed.
struct DefectZone {
  Vec3 center;
  double radius = 0.0;
};

struct Imperfections {
  SurfaceWaves waves;
  std::vector<DefectZone> zones;
  // Compensating material moved out of the zones; never waved or cut.
  std::vector<Sphere> fragments;
  double removed_volume = 0.0;

  bool empty() const { return !waves.active() && zones.empty() && fragments.empty(); }
};

struct Microstructure {
  PeriodicCell cell;
  std::vector<Inclusion> inclusions;
  Imperfections imperfections;
  int phase_count = 2;
};

// Result of an overlap predicate. `normal` is the unit direction along which
// the second shape should move to separate from the first.
struct Overlap {
  bool overlapping = false;
  double depth = 0.0;
  Vec3 normal;
  // Center of the second shape relative to the first, for the image in contact.
  Vec3 offset;

  explicit operator bool() const { return overlapping; }
  static Overlap disjoint() { return {}; }
};

Vec3 wrap_point(Vec3 p, const PeriodicCell& cell);

// b - a with each component wrapped into [-L/2, L/2).
Vec3 periodic_displacement(Vec3 a, Vec3 b, const PeriodicCell& cell);

// Radius of the smallest center-based ball enclosing the shape.
double bounding_radius(const Shape& s);

// Signed distance from a point (relative to the cylinder center) to the
// closed cylinder solid; negative inside.
double signed_distance_to_cylinder(Vec3 offset, const Cylinder& c);

Overlap sphere_sphere_overlap(const Sphere& s1, const Sphere& s2, const PeriodicCell& cell);
Overlap sphere_cylinder_overlap(const Sphere& s, const Cylinder& c, const PeriodicCell& cell);
Overlap cylinder_cylinder_overlap(const Cylinder& c1, const Cylinder& c2, const PeriodicCell& cell);
Overlap shape_overlap(const Shape& a, const Shape& b, const PeriodicCell& cell);

// Farthest point of the shape (centered at the origin) along `dir`.
Vec3 support_point(const Shape& s, Vec3 dir);

// Euclidean distance between two convex solids (0 if they intersect),
// non-periodic; `offset` is the center of b relative to a.
double convex_distance(const Shape& a, const Shape& b, Vec3 offset);

// Whether `offset` (relative to the shape center, no wrapping) lies inside the
// shape, honoring surface waves.
bool shape_contains_offset(const Shape& s, Vec3 offset, const SurfaceWaves& waves);

// Minimum-image membership over all periodic images that can reach p.
bool shape_contains(const Shape& s, Vec3 p, const SurfaceWaves& waves, const PeriodicCell& cell);
bool sphere_contains(const Sphere& s, Vec3 p, const PeriodicCell& cell);
bool in_defect_zone(const Imperfections& imp, Vec3 p, const PeriodicCell& cell);

int point_in_microstructure(Vec3 p, const Microstructure& m);

// Nominal radius multiplier r_eff/r for a sphere in direction `dir`.
double sphere_wave_factor(Vec3 dir, const SurfaceWaves& waves);
// Radius multiplier for a cylinder at axial coordinate t.
double cylinder_wave_factor(double t, double half_length, const SurfaceWaves& waves);

double shape_volume(const Shape& s);

struct FamilyFractions {
  double spheres = 0.0;
  double cylinders = 0.0;
  double fragments = 0.0;

  double total() const { return spheres + cylinders + fragments; }
};

FamilyFractions analytic_family_fractions(const Microstructure& m);

// Closed-form fractions indexed by phase id (matrix first). For overlapping
// structures the inclusion entry is the sum of volumes, i.e. an upper bound.
std::vector<double> analytic_volume_fraction(const Microstructure& m);

// True if every pair of inclusions (and fragments) is disjoint.
bool is_non_overlapping(const Microstructure& m);

}  // namespace stochhom
