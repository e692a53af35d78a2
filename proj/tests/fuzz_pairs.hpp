#pragma once

// Randomized near-contact shape pairs checked against the sampling oracle.

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "stochhom/geometry.hpp"
#include "stochhom/rng.hpp"

namespace fuzz {

enum class PairKind { SphereSphere, SphereCylinder, CylinderCylinder };

struct PairStats {
  int pairs = 0;
  int in_band = 0;
  int disagreements = 0;
  int false_disjoint = 0;  // oracle witnessed overlap, predicate said disjoint
};

inline oracle::SolidSpec to_solid(const stochhom::Shape& s) {
  oracle::SolidSpec o;
  if (const auto* sp = std::get_if<stochhom::Sphere>(&s)) {
    o.c = {sp->center.x, sp->center.y, sp->center.z};
    o.r = sp->radius;
  } else {
    const auto& c = std::get<stochhom::Cylinder>(s);
    o.cylinder = true;
    o.c = {c.center.x, c.center.y, c.center.z};
    o.axis = {c.axis.x, c.axis.y, c.axis.z};
    o.r = c.radius;
    o.h = c.half_length;
  }
  return o;
}

inline stochhom::Shape random_shape(bool cylinder, stochhom::Rng& rng, stochhom::Vec3 center) {
  if (!cylinder) return stochhom::Sphere{center, rng.uniform(0.02, 0.15)};
  const double r = rng.uniform(0.02, 0.1);
  const double h = r * rng.uniform(0.3, 4.0);
  return stochhom::Cylinder{center, rng.unit_vector(), r, std::min(h, 0.3)};
}

// Second shape placed at a distance that straddles contact; centers may lie
// anywhere in the cell so periodic images are exercised.
inline std::pair<stochhom::Shape, stochhom::Shape> random_pair(PairKind kind, stochhom::Rng& rng) {
  const bool cyl_a = kind == PairKind::CylinderCylinder;
  const bool cyl_b = kind != PairKind::SphereSphere;
  stochhom::Vec3 ca = rng.point_in_cell();
  stochhom::Shape a = random_shape(cyl_a, rng, ca);
  stochhom::Shape b = random_shape(cyl_b, rng, {0, 0, 0});
  const double reach = stochhom::bounding_radius(a) + stochhom::bounding_radius(b);
  const stochhom::Vec3 cb = stochhom::wrap_point(ca + (rng.uniform(0.0, 1.05) * reach) * rng.unit_vector(), {});
  std::visit([&](auto& s) { s.center = cb; }, b);
  return {a, b};
}

// Lattice shifts of b that can bring it within reach of a.
inline std::vector<oracle::P3> candidate_images(const stochhom::Shape& a, const stochhom::Shape& b) {
  std::vector<oracle::P3> out;
  const stochhom::Vec3 d = std::visit([](const auto& s) { return s.center; }, b) -
                           std::visit([](const auto& s) { return s.center; }, a);
  const double reach = stochhom::bounding_radius(a) + stochhom::bounding_radius(b) + 0.01;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        stochhom::Vec3 s{double(i), double(j), double(k)};
        if (stochhom::norm(d + s) < reach) out.push_back({s.x, s.y, s.z});
      }
  return out;
}

// Classifies `pairs` random pairs; the band excludes |separation| <= band.
inline PairStats check_pairs(PairKind kind, int pairs, int points_per_pair, double band, std::uint64_t seed) {
  PairStats st;
  stochhom::Rng rng(seed);
  const stochhom::PeriodicCell cell;
  for (int n = 0; n < pairs; ++n) {
    auto [a, b] = random_pair(kind, rng);
    const bool predicate = static_cast<bool>(stochhom::shape_overlap(a, b, cell));
    const auto images = candidate_images(a, b);
    ++st.pairs;
    if (images.empty()) {
      if (predicate) ++st.disagreements;
      continue;
    }
    const double s = oracle::sampled_separation(to_solid(a), to_solid(b), points_per_pair / 2, images);
    if (!predicate && s < -1e-9) ++st.false_disjoint;
    if (std::abs(s) <= band) {
      ++st.in_band;
      continue;
    }
    if (predicate != (s < 0.0)) ++st.disagreements;
  }
  return st;
}

}  // namespace fuzz
