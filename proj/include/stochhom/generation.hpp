#pragma once

// Random periodic microstructures: sequential adsorption (RSA), overlap
// relaxation (MD) and the two imperfection operators.

#include <cstdint>
#include <optional>
#include <vector>

#include "stochhom/geometry.hpp"
#include "stochhom/rng.hpp"

namespace stochhom {

enum class GenerationMethod { RSA, MD };

// Total inclusion fraction accepted by the generators.
inline constexpr double kMaxTotalFraction = 0.6;

struct GenerationSpec {
  double f_sp = 0.0;
  double f_cyl = 0.0;
  int n_sp = 0;
  int n_cyl = 0;
  double aspect_ratio = 3.0;
  std::uint64_t rng_seed = 0;
  GenerationMethod method = GenerationMethod::RSA;

  // Throws Error(InvalidArgument) on a bad spec.
  void validate() const;
};

struct MdParams {
  double epsilon_stop = 1e-12;
  // Fraction of the current overlap removed per step by the unit-stiffness
  // spring force. Zero selects the default.
  double dt = 0.0;
  int max_steps = 200000;
  double damping = 1.0;

  void validate() const;
};

struct RsaLimits {
  long max_attempts_per_inclusion = 1000000;
};

struct ImperfectionSpec {
  double wave_amplitude = 0.0;
  int wave_count = 0;
  double defect_zone_fraction = 0.0;
  int defect_zone_count = 0;
  // Zone radii are drawn in this range before scaling to the target volume.
  double zone_radius_min = 0.05;
  double zone_radius_max = 0.1;
  double fragment_radius = 0.02;

  bool has_waves() const { return wave_amplitude > 0.0 && wave_count > 0; }
  bool has_zones() const { return defect_zone_fraction > 0.0 && defect_zone_count > 0; }
  void validate() const;
};

struct InclusionDimensions {
  std::optional<double> sphere_radius;
  std::optional<double> cyl_radius;
  std::optional<double> cyl_half_length;
};

// Equal-size inclusions per family from the target fractions and counts.
// Throws Error(DimensionTooLarge) if any dimension reaches half the cell.
InclusionDimensions compute_inclusion_dimensions(const GenerationSpec& spec);

// Cylinders first, then spheres, each placed by repeated uniform proposals.
// Throws Error(GenerationStalled) when an inclusion exhausts its attempts.
Microstructure generate_rsa(const GenerationSpec& spec, const RsaLimits& limits, Rng& rng);

struct MdTrace {
  int steps = 0;
  std::vector<double> energy;  // overlap energy before each step, plus the final value
};

// Random placement ignoring overlaps, then damped explicit relaxation with
// pairwise linear repulsion until the overlap energy (sum of squared depths)
// drops below epsilon_stop and exact predicates report no overlap.
// Throws Error(RelaxationFailed) after max_steps.
Microstructure generate_md(const GenerationSpec& spec, const MdParams& md, Rng& rng,
                           MdTrace* trace = nullptr);

// Overlap energy of the given inclusions (sum of squared penetration depths).
double overlap_energy(const Microstructure& m);

Microstructure apply_surface_waves(const Microstructure& m, const ImperfectionSpec& imp);

// Relative volume change produced by the wave modulation, per shape kind.
double sphere_wave_volume_factor(double amplitude, int count);
double cylinder_wave_volume_factor(double amplitude, int count);

// Cuts spherical zones out of the inclusions and re-deposits the removed
// volume as small non-overlapping spheres in the matrix.
// Throws Error(CompensationFailed) if the fragments cannot be placed.
Microstructure apply_defect_zones(const Microstructure& m, const ImperfectionSpec& imp, Rng& rng,
                                  const RsaLimits& limits = {});

// Inclusion volume inside the union of defect zones, estimated on a lattice of
// the given spacing.
double removed_inclusion_volume(const Microstructure& m, double spacing);

// Generator + imperfections with independent sub-streams of one seed.
Microstructure generate_microstructure(const GenerationSpec& spec, const MdParams& md,
                                       const RsaLimits& limits, const ImperfectionSpec& imp);

}  // namespace stochhom
