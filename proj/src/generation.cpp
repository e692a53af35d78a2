#include "stochhom/generation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stochhom/error.hpp"

namespace stochhom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDefaultMdStep = 0.25;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

Cylinder random_cylinder(Rng& rng, double radius, double half_length) {
  Cylinder c;
  c.center = rng.point_in_cell();
  c.axis = rng.unit_vector();
  c.radius = radius;
  c.half_length = half_length;
  return c;
}

Sphere random_sphere(Rng& rng, double radius) { return {rng.point_in_cell(), radius}; }

// Copy of the shape grown by `skin` in every direction.
Shape inflate(const Shape& s, double skin) {
  if (const auto* sp = std::get_if<Sphere>(&s)) return Sphere{sp->center, sp->radius + skin};
  Cylinder c = std::get<Cylinder>(s);
  c.radius += skin;
  c.half_length += skin;
  return c;
}

}  // namespace

void GenerationSpec::validate() const {
  if (!(f_sp >= 0.0 && f_sp <= kMaxTotalFraction)) invalid("f_sp must lie in [0, 0.6]");
  if (!(f_cyl >= 0.0 && f_cyl <= kMaxTotalFraction)) invalid("f_cyl must lie in [0, 0.6]");
  if (f_sp + f_cyl > kMaxTotalFraction + 1e-12) invalid("f_sp + f_cyl must not exceed 0.6");
  if (n_sp < 0 || n_cyl < 0) invalid("inclusion counts must be non-negative");
  if (n_sp + n_cyl < 1) invalid("at least one inclusion is required");
  if ((f_sp > 0.0) != (n_sp > 0)) invalid("f_sp and n_sp must be both zero or both positive");
  if ((f_cyl > 0.0) != (n_cyl > 0)) invalid("f_cyl and n_cyl must be both zero or both positive");
  if (n_cyl > 0 && !(aspect_ratio > 0.0)) invalid("aspect_ratio must be positive");
}

void MdParams::validate() const {
  if (!(epsilon_stop > 0.0)) invalid("epsilon_stop must be positive");
  if (!(dt >= 0.0)) invalid("dt must be positive");
  if (max_steps < 1) invalid("max_steps must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) invalid("damping must lie in (0, 1]");
}

void ImperfectionSpec::validate() const {
  if (!(wave_amplitude >= 0.0 && wave_amplitude < 1.0)) invalid("wave_amplitude must lie in [0, 1)");
  if (wave_count < 0) invalid("wave_count must be non-negative");
  if (!(defect_zone_fraction >= 0.0 && defect_zone_fraction <= 0.2))
    invalid("defect_zone_fraction must lie in [0, 0.2]");
  if (defect_zone_count < 0) invalid("defect_zone_count must be non-negative");
  if (!(zone_radius_min > 0.0 && zone_radius_max >= zone_radius_min)) invalid("bad zone radius range");
  if (!(fragment_radius > 0.0 && fragment_radius < 0.5)) invalid("fragment_radius must lie in (0, 0.5)");
}

InclusionDimensions compute_inclusion_dimensions(const GenerationSpec& spec) {
  spec.validate();
  InclusionDimensions d;
  if (spec.n_sp > 0) {
    d.sphere_radius = std::cbrt(3.0 * spec.f_sp / (4.0 * kPi * spec.n_sp));
    if (*d.sphere_radius >= 0.5)
      throw Error(ErrorKind::DimensionTooLarge, "sphere radius exceeds half the cell");
  }
  if (spec.n_cyl > 0) {
    // n * pi r^2 * (2 aspect r) = f_cyl
    double r = std::cbrt(spec.f_cyl / (2.0 * kPi * spec.aspect_ratio * spec.n_cyl));
    d.cyl_radius = r;
    d.cyl_half_length = spec.aspect_ratio * r;
    if (r >= 0.5 || *d.cyl_half_length >= 0.5)
      throw Error(ErrorKind::DimensionTooLarge, "cylinder dimensions exceed half the cell");
  }
  return d;
}

Microstructure generate_rsa(const GenerationSpec& spec, const RsaLimits& limits, Rng& rng) {
  if (limits.max_attempts_per_inclusion < 1) invalid("max_attempts_per_inclusion must be >= 1");
  const InclusionDimensions dims = compute_inclusion_dimensions(spec);
  Microstructure m;
  const PeriodicCell& cell = m.cell;
  std::vector<Cylinder> cylinders;
  std::vector<Sphere> spheres;

  auto stalled = [&](const char* family) {
    std::ostringstream os;
    os << "RSA stalled placing " << family << ": placed " << cylinders.size() << "/" << spec.n_cyl
       << " cylinders and " << spheres.size() << "/" << spec.n_sp << " spheres";
    throw Error(ErrorKind::GenerationStalled, os.str());
  };

  while (static_cast<int>(cylinders.size()) < spec.n_cyl) {
    bool placed = false;
    for (long attempt = 0; attempt < limits.max_attempts_per_inclusion && !placed; ++attempt) {
      Cylinder c = random_cylinder(rng, *dims.cyl_radius, *dims.cyl_half_length);
      bool clash = std::any_of(cylinders.begin(), cylinders.end(), [&](const Cylinder& o) {
        return cylinder_cylinder_overlap(o, c, cell).overlapping;
      });
      if (!clash) {
        cylinders.push_back(c);
        placed = true;
      }
    }
    if (!placed) stalled("cylinders");
  }
  while (static_cast<int>(spheres.size()) < spec.n_sp) {
    bool placed = false;
    for (long attempt = 0; attempt < limits.max_attempts_per_inclusion && !placed; ++attempt) {
      Sphere s = random_sphere(rng, *dims.sphere_radius);
      bool clash = std::any_of(spheres.begin(), spheres.end(), [&](const Sphere& o) {
        return sphere_sphere_overlap(o, s, cell).overlapping;
      });
      if (clash) continue;
      clash = std::any_of(cylinders.begin(), cylinders.end(), [&](const Cylinder& c) {
        return sphere_cylinder_overlap(s, c, cell).overlapping;
      });
      if (!clash) {
        spheres.push_back(s);
        placed = true;
      }
    }
    if (!placed) stalled("spheres");
  }

  for (const auto& c : cylinders) m.inclusions.push_back({c, kInclusionPhase});
  for (const auto& s : spheres) m.inclusions.push_back({s, kInclusionPhase});
  return m;
}

double overlap_energy(const Microstructure& m) {
  double e = 0.0;
  for (std::size_t i = 0; i < m.inclusions.size(); ++i)
    for (std::size_t j = i + 1; j < m.inclusions.size(); ++j) {
      Overlap o = shape_overlap(m.inclusions[i].shape, m.inclusions[j].shape, m.cell);
      if (o) e += o.depth * o.depth;
    }
  return e;
}

Microstructure generate_md(const GenerationSpec& spec, const MdParams& md, Rng& rng, MdTrace* trace) {
  md.validate();
  const InclusionDimensions dims = compute_inclusion_dimensions(spec);
  Microstructure m;
  for (int i = 0; i < spec.n_cyl; ++i)
    m.inclusions.push_back({random_cylinder(rng, *dims.cyl_radius, *dims.cyl_half_length)});
  for (int i = 0; i < spec.n_sp; ++i) m.inclusions.push_back({random_sphere(rng, *dims.sphere_radius)});

  const double dt = (md.dt > 0.0 ? md.dt : kDefaultMdStep) * md.damping;
  // Relaxing slightly inflated shapes makes energy <= epsilon_stop imply
  // strict separation of the nominal shapes.
  const double skin = std::max(std::sqrt(md.epsilon_stop), 1e-9);
  const std::size_t n = m.inclusions.size();
  std::vector<Vec3> force(n);
  std::vector<Vec3> torque(n);
  if (trace) *trace = {};

  for (int step = 0;; ++step) {
    std::fill(force.begin(), force.end(), Vec3{});
    std::fill(torque.begin(), torque.end(), Vec3{});
    std::vector<Shape> grown(n);
    for (std::size_t i = 0; i < n; ++i) grown[i] = inflate(m.inclusions[i].shape, skin);

    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        Overlap o = shape_overlap(grown[i], grown[j], m.cell);
        if (!o) continue;
        energy += o.depth * o.depth;
        const Vec3 f = o.depth * o.normal;  // acts on j; -f on i
        force[j] += f;
        force[i] -= f;
        // Contact point relative to the center of i.
        Vec3 contact = 0.5 * (support_point(grown[i], o.normal) + o.offset +
                              support_point(grown[j], -o.normal));
        torque[i] += cross(contact, -f);
        torque[j] += cross(contact - o.offset, f);
      }
    }
    if (trace) trace->energy.push_back(energy);
    if (energy <= md.epsilon_stop && is_non_overlapping(m)) {
      if (trace) trace->steps = step;
      return m;
    }
    if (step >= md.max_steps) {
      std::ostringstream os;
      os << "MD relaxation did not reach overlap energy " << md.epsilon_stop << " within "
         << md.max_steps << " steps (energy " << energy << ")";
      throw Error(ErrorKind::RelaxationFailed, os.str());
    }

    for (std::size_t i = 0; i < n; ++i) {
      auto& shape = m.inclusions[i].shape;
      if (auto* c = std::get_if<Cylinder>(&shape)) {
        c->center = wrap_point(c->center + dt * force[i], m.cell);
        double inertia = c->half_length * c->half_length + c->radius * c->radius;
        Vec3 rot = (dt / inertia) * torque[i];
        c->axis = normalized(c->axis + cross(rot, c->axis));
      } else {
        auto& s = std::get<Sphere>(shape);
        s.center = wrap_point(s.center + dt * force[i], m.cell);
      }
    }
  }
}

double sphere_wave_volume_factor(double amplitude, int count) {
  if (amplitude <= 0.0 || count <= 0) return 1.0;
  // int sin^2(m theta) sin(theta) dtheta over [0, pi] = 1 + 1 / (4 m^2 - 1)
  const double m2 = static_cast<double>(count) * count;
  return 1.0 + 0.75 * amplitude * amplitude * (1.0 + 1.0 / (4.0 * m2 - 1.0));
}

double cylinder_wave_volume_factor(double amplitude, int count) {
  if (amplitude <= 0.0 || count <= 0) return 1.0;
  return 1.0 + 0.5 * amplitude * amplitude;
}

Microstructure apply_surface_waves(const Microstructure& m, const ImperfectionSpec& imp) {
  imp.validate();
  Microstructure out = m;
  auto& w = out.imperfections.waves;
  w.amplitude = imp.wave_amplitude;
  w.count = imp.wave_count;
  w.volume_drift = 0.0;
  if (!w.active()) return out;
  double nominal = 0.0;
  double perturbed = 0.0;
  const double fs = sphere_wave_volume_factor(w.amplitude, w.count);
  const double fc = cylinder_wave_volume_factor(w.amplitude, w.count);
  for (const auto& inc : out.inclusions) {
    double v = shape_volume(inc.shape);
    nominal += v;
    perturbed += v * (inc.is_sphere() ? fs : fc);
  }
  if (nominal > 0.0) w.volume_drift = (perturbed - nominal) / nominal;
  return out;
}

double removed_inclusion_volume(const Microstructure& m, double spacing) {
  const auto& zones = m.imperfections.zones;
  const auto& waves = m.imperfections.waves;
  const double wave_reach = 1.0 + (waves.active() ? waves.amplitude : 0.0);
  const int n = static_cast<int>(std::ceil(m.cell.edge_length / spacing));
  const double h = m.cell.edge_length / n;
  long count = 0;
  for (std::size_t z = 0; z < zones.size(); ++z) {
    const auto& zone = zones[z];
    std::vector<const Inclusion*> near;
    for (const auto& inc : m.inclusions) {
      Vec3 d = periodic_displacement(zone.center, inc.center(), m.cell);
      if (norm(d) <= zone.radius + bounding_radius(inc.shape) * wave_reach + 1e-12)
        near.push_back(&inc);
    }
    if (near.empty()) continue;
    std::array<int, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      lo[a] = static_cast<int>(std::floor((zone.center[a] - zone.radius) / h - 0.5));
      hi[a] = static_cast<int>(std::ceil((zone.center[a] + zone.radius) / h - 0.5));
    }
    const Sphere ball{zone.center, zone.radius};
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int k = lo[2]; k <= hi[2]; ++k) {
          Vec3 p = wrap_point({(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h}, m.cell);
          if (!sphere_contains(ball, p, m.cell)) continue;
          bool earlier = false;
          for (std::size_t y = 0; y < z && !earlier; ++y)
            earlier = sphere_contains(Sphere{zones[y].center, zones[y].radius}, p, m.cell);
          if (earlier) continue;
          for (const Inclusion* inc : near)
            if (shape_contains(inc->shape, p, waves, m.cell)) {
              ++count;
              break;
            }
        }
  }
  return count * h * h * h;
}

Microstructure apply_defect_zones(const Microstructure& m, const ImperfectionSpec& imp, Rng& rng,
                                  const RsaLimits& limits) {
  imp.validate();
  Microstructure out = m;
  if (!imp.has_zones()) return out;
  auto& rec = out.imperfections;

  // Radii drawn in the configured range, then scaled to the target volume.
  std::vector<double> radii(static_cast<std::size_t>(imp.defect_zone_count));
  double vol = 0.0;
  for (auto& r : radii) {
    r = rng.uniform(imp.zone_radius_min, imp.zone_radius_max);
    vol += 4.0 * kPi * r * r * r / 3.0;
  }
  const double scale = std::cbrt(imp.defect_zone_fraction * std::pow(m.cell.edge_length, 3) / vol);
  for (double r : radii) {
    if (r * scale >= 0.5 * m.cell.edge_length) invalid("defect zone radius exceeds half the cell");
    rec.zones.push_back({rng.point_in_cell(m.cell.edge_length), r * scale});
  }

  rec.removed_volume = removed_inclusion_volume(out, m.cell.edge_length / 320.0);
  const double rf = imp.fragment_radius;
  const double vf = 4.0 * kPi * rf * rf * rf / 3.0;
  const long wanted = std::lround(rec.removed_volume / vf);

  const double wave_grow = 1.0 + (rec.waves.active() ? rec.waves.amplitude : 0.0);
  std::vector<Shape> obstacles;
  for (const auto& inc : out.inclusions) {
    Shape s = inc.shape;
    if (auto* sp = std::get_if<Sphere>(&s)) sp->radius *= wave_grow;
    if (auto* c = std::get_if<Cylinder>(&s)) c->radius *= wave_grow;
    obstacles.push_back(s);
  }
  for (long f = 0; f < wanted; ++f) {
    bool placed = false;
    for (long attempt = 0; attempt < limits.max_attempts_per_inclusion && !placed; ++attempt) {
      Sphere s{rng.point_in_cell(m.cell.edge_length), rf};
      bool clash = false;
      for (const auto& z : rec.zones)
        if (norm(periodic_displacement(z.center, s.center, m.cell)) < z.radius + rf) clash = true;
      for (std::size_t o = 0; o < obstacles.size() && !clash; ++o)
        clash = shape_overlap(obstacles[o], s, m.cell).overlapping;
      for (std::size_t o = 0; o < rec.fragments.size() && !clash; ++o)
        clash = sphere_sphere_overlap(rec.fragments[o], s, m.cell).overlapping;
      if (!clash) {
        rec.fragments.push_back(s);
        placed = true;
      }
    }
    if (!placed) {
      std::ostringstream os;
      os << "could not place compensating fragment " << f + 1 << " of " << wanted;
      throw Error(ErrorKind::CompensationFailed, os.str());
    }
  }
  return out;
}

Microstructure generate_microstructure(const GenerationSpec& spec, const MdParams& md,
                                       const RsaLimits& limits, const ImperfectionSpec& imp) {
  Rng root(spec.rng_seed);
  Rng placement = root.split(1);
  Microstructure m = spec.method == GenerationMethod::RSA ? generate_rsa(spec, limits, placement)
                                                          : generate_md(spec, md, placement);
  if (imp.has_waves()) m = apply_surface_waves(m, imp);
  if (imp.has_zones()) {
    Rng zones = root.split(2);
    m = apply_defect_zones(m, imp, zones, limits);
  }
  return m;
}

}  // namespace stochhom
