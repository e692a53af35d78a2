#pragma once

// Flat "key = value" campaign configuration. Sweep axes accept arrays
// ("f_sp = [0.05, 0.1]"); every other key takes a scalar. Unknown keys,
// duplicates and malformed values are rejected with Error(ConfigError).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stochhom/fft_solver.hpp"
#include "stochhom/generation.hpp"

namespace stochhom {

// Which moduli each sample computes: all six load cases, or only the
// hydrostatic one (bulk modulus only).
enum class ModuliMode { Full, Bulk };

struct SweepAxes {
  std::vector<double> f_sp{0.1};
  std::vector<double> f_cyl{0.0};
  std::vector<double> aspect_ratio{3.0};
  std::vector<int> n_sp{20};
  std::vector<int> n_cyl{0};
  std::vector<double> contrast{16.0};
  std::vector<double> wave_amplitude{0.0};
  std::vector<double> defect_fraction{0.0};

  bool operator==(const SweepAxes&) const = default;
};

struct CampaignConfig {
  SweepAxes axes;
  GenerationMethod method = GenerationMethod::RSA;
  MdParams md;
  RsaLimits rsa;
  int wave_count = 0;
  int defect_zone_count = 0;

  double matrix_young = 1.0;
  double matrix_poisson = 0.3;

  int resolution = 64;
  bool supersample = false;

  double solver_acc = 1e-6;
  int solver_max_iterations = 1000;
  ModuliMode moduli = ModuliMode::Full;

  int samples_per_point = 10;
  int max_samples_per_point = 20;
  double escalation_threshold = 0.05;
  double confidence_level = 0.95;
  std::uint64_t base_seed = 1;
  int workers = 1;
  long budget = 0;  // total samples; 0 means unlimited

  bool operator==(const CampaignConfig&) const;
  void validate() const;
};

CampaignConfig parse_config(std::string_view text);
CampaignConfig load_config(const std::filesystem::path& path);

// Canonical text: sorted keys, every key present, shortest round-trip numbers.
std::string serialize_config(const CampaignConfig& cfg);

// FNV-1a 64 of the canonical text.
std::uint64_t config_hash(const CampaignConfig& cfg);
std::string hash_hex(std::uint64_t h);

// One node of the Cartesian grid of sweep axes.
struct GridPoint {
  int index = 0;
  double f_sp = 0.0;
  double f_cyl = 0.0;
  double aspect_ratio = 3.0;
  int n_sp = 0;
  int n_cyl = 0;
  double contrast = 1.0;
  double wave_amplitude = 0.0;
  double defect_fraction = 0.0;
};

// Axis order f_sp, f_cyl, aspect_ratio, n_sp, n_cyl, contrast,
// wave_amplitude, defect_fraction; the last axis varies fastest.
std::vector<GridPoint> expand_grid(const CampaignConfig& cfg);

// Names of axes with more than one value, in grid order.
std::vector<std::string> swept_axes(const CampaignConfig& cfg);
double axis_value(const GridPoint& p, std::string_view axis);

GenerationSpec generation_spec(const CampaignConfig& cfg, const GridPoint& p, std::uint64_t seed);
ImperfectionSpec imperfection_spec(const CampaignConfig& cfg, const GridPoint& p);
// Matrix phase 0 and inclusion phase 1 scaled by the point's contrast.
PhaseTable phase_table(const CampaignConfig& cfg, double contrast);
SolverConfig solver_config(const CampaignConfig& cfg);

// Hash of everything that determines the samples of one grid point.
std::uint64_t point_hash(const CampaignConfig& cfg, const GridPoint& p);

}  // namespace stochhom
