#pragma once

// Monte Carlo campaigns: independent generate -> voxelize -> homogenize
// pipelines per grid point, Student-t aggregation, resumable sweeps.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stochhom/config.hpp"

namespace stochhom {

struct SampleTimings {
  double generate_s = 0.0;
  double voxelize_s = 0.0;
  double solve_s = 0.0;
};

struct SampleResult {
  int point_index = 0;
  int sample_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure_kind;  // empty when ok
  std::string failure_message;

  std::optional<StiffnessTensor> c_hom;  // absent in bulk-only mode
  double bulk = 0.0;                     // normalized by the matrix
  double shear = 0.0;                    // normalized; NaN in bulk-only mode
  double anisotropy_index = 0.0;         // NaN in bulk-only mode
  double inclusion_fraction = 0.0;       // discrete
  int iterations = 0;                    // summed over load cases
  double max_eps_eq = 0.0;
  double max_eps_comp = 0.0;
  bool within_bounds = true;  // Voigt-Reuss check on the raw moduli
  SampleTimings timings;

  // Equality of every field except timings.
  bool same_outcome(const SampleResult& o) const;
};

// Seed of one sample; distinct for distinct (point, sample) pairs.
std::uint64_t sample_seed(std::uint64_t base_seed, int point_index, int sample_index);

// Runs one pipeline. Generation and solver failures are captured in the
// result; other errors propagate.
SampleResult run_sample(const CampaignConfig& cfg, const GridPoint& point, int sample_index);

struct MetricSummary {
  double mean = 0.0;
  double std_dev = 0.0;
  std::optional<double> half_width;  // absent with fewer than two samples
};

enum class PointStatus { Complete, Incomplete, Failed };

struct PointSummary {
  GridPoint point;
  PointStatus status = PointStatus::Complete;
  int samples = 0;  // successful
  int failures = 0;
  bool escalated = false;
  std::optional<MetricSummary> bulk;
  std::optional<MetricSummary> shear;
};

// Mean, unbiased std and CI over successful samples in sample-index order.
PointSummary summarize_point(const CampaignConfig& cfg, const GridPoint& point, std::vector<SampleResult> samples);

struct PointOutcome {
  std::vector<SampleResult> samples;
  PointSummary summary;
};

class PointFailedError : public Error {
 public:
  PointFailedError(const std::string& what, PointOutcome outcome)
      : Error(ErrorKind::PointFailed, what), outcome_(std::move(outcome)) {}
  const PointOutcome& outcome() const { return outcome_; }

 private:
  PointOutcome outcome_;
};

// samples_per_point pipelines, escalated to max_samples_per_point when the
// CI half-width of a metric exceeds escalation_threshold * |mean|.
// Throws PointFailedError if fewer than min(3, samples_per_point) succeed.
PointOutcome run_point(const CampaignConfig& cfg, const GridPoint& point);

struct CampaignTable {
  std::vector<PointSummary> points;
  bool complete = true;
};

struct SweepOptions {
  // When false only existing records are read and nothing is written.
  bool compute = true;
};

// Runs (or resumes) the whole grid. With an output directory, samples are
// persisted one file each and reused on restart; summary and series files
// are rewritten at the end.
CampaignTable sweep(const CampaignConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                    const SweepOptions& opts = {});

// Rebuilds the table from a campaign directory without computing anything.
CampaignTable report(const std::filesystem::path& out_dir);

std::string summary_csv(const CampaignConfig& cfg, const CampaignTable& table);

// Record file layout.
std::filesystem::path sample_record_path(const std::filesystem::path& out_dir, int point_index, int sample_index);
void write_sample_record(const std::filesystem::path& path, const SampleResult& r, std::uint64_t point_hash);
std::optional<SampleResult> read_sample_record(const std::filesystem::path& path, std::uint64_t point_hash);

}  // namespace stochhom
