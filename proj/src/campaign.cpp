#include "stochhom/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stochhom/io.hpp"
#include "stochhom/statistics.hpp"
#include "stochhom/voxel.hpp"

#ifndef STOCHHOM_VERSION
#define STOCHHOM_VERSION "0.0.0"
#endif

namespace stochhom {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// is rethrown after all threads finish.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t threads = std::min<std::size_t>(std::max(workers, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

int failure_threshold(const CampaignConfig& cfg) { return std::min(3, cfg.samples_per_point); }

bool needs_escalation(const CampaignConfig& cfg, const PointSummary& s) {
  if (cfg.max_samples_per_point <= cfg.samples_per_point) return false;
  auto wide = [&](const std::optional<MetricSummary>& m) {
    return m && m->half_width && *m->half_width > cfg.escalation_threshold * std::abs(m->mean);
  };
  return wide(s.bulk) || wide(s.shear);
}

std::string status_name(PointStatus s) {
  switch (s) {
    case PointStatus::Complete: return "complete";
    case PointStatus::Incomplete: return "incomplete";
    case PointStatus::Failed: return "failed";
  }
  return "unknown";
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string csv_number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return "";
  return format_double(*v);
}

void write_series(const CampaignConfig& cfg, const CampaignTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto axes = swept_axes(cfg);
  for (const auto& axis : axes) {
    // Group points that agree on every other swept axis.
    std::map<std::vector<double>, std::vector<const PointSummary*>> groups;
    for (const auto& s : table.points) {
      std::vector<double> key;
      for (const auto& other : axes)
        if (other != axis) key.push_back(axis_value(s.point, other));
      groups[key].push_back(&s);
    }
    int g = 0;
    for (const auto& [key, members] : groups) {
      for (const char* metric : {"bulk", "shear"}) {
        const bool bulk = std::string_view(metric) == "bulk";
        if (!bulk && cfg.moduli == ModuliMode::Bulk) continue;
        std::string out = "# stochhom-series v1\n# metric: normalized " + std::string(metric) + "\n";
        std::size_t k = 0;
        for (const auto& other : axes)
          if (other != axis) out += "# " + other + " = " + format_double(key[k++]) + "\n";
        out += axis + ",mean,ci_low,ci_high\n";
        for (const PointSummary* s : members) {
          const auto& m = bulk ? s->bulk : s->shear;
          if (!m) continue;
          std::optional<double> lo, hi;
          if (m->half_width) {
            lo = m->mean - *m->half_width;
            hi = m->mean + *m->half_width;
          }
          out += format_double(axis_value(s->point, axis)) + "," + format_double(m->mean) + "," + csv_number(lo) +
                 "," + csv_number(hi) + "\n";
        }
        std::string name = std::string(metric) + "_vs_" + axis;
        if (groups.size() > 1) name += "_g" + std::to_string(g);
        write_file_atomically(dir / (name + ".csv"), out);
      }
      ++g;
    }
  }
}

}  // namespace

bool SampleResult::same_outcome(const SampleResult& o) const {
  if (point_index != o.point_index || sample_index != o.sample_index || seed != o.seed || ok != o.ok ||
      failure_kind != o.failure_kind || failure_message != o.failure_message || iterations != o.iterations ||
      within_bounds != o.within_bounds || c_hom.has_value() != o.c_hom.has_value())
    return false;
  if (c_hom && *c_hom != *o.c_hom) return false;
  return same_double(bulk, o.bulk) && same_double(shear, o.shear) && same_double(anisotropy_index, o.anisotropy_index) &&
         same_double(inclusion_fraction, o.inclusion_fraction) && same_double(max_eps_eq, o.max_eps_eq) &&
         same_double(max_eps_comp, o.max_eps_comp);
}

std::uint64_t sample_seed(std::uint64_t base_seed, int point_index, int sample_index) {
  return derive_seed(base_seed, static_cast<std::uint64_t>(point_index), static_cast<std::uint64_t>(sample_index));
}

SampleResult run_sample(const CampaignConfig& cfg, const GridPoint& point, int sample_index) {
  SampleResult r;
  r.point_index = point.index;
  r.sample_index = sample_index;
  r.seed = sample_seed(cfg.base_seed, point.index, sample_index);
  r.shear = r.anisotropy_index = std::numeric_limits<double>::quiet_NaN();
  try {
    auto t0 = Clock::now();
    Microstructure m =
        generate_microstructure(generation_spec(cfg, point, r.seed), cfg.md, cfg.rsa, imperfection_spec(cfg, point));
    r.timings.generate_s = seconds_since(t0);

    t0 = Clock::now();
    VoxelizeOptions vopts;
    vopts.supersample = cfg.supersample;
    VoxelGrid grid = voxelize(m, {cfg.resolution, cfg.resolution, cfg.resolution}, vopts);
    r.timings.voxelize_s = seconds_since(t0);
    const auto fractions = discrete_volume_fraction(grid);
    r.inclusion_fraction = fractions[kInclusionPhase];

    t0 = Clock::now();
    const PhaseTable phases = phase_table(cfg, point.contrast);
    const SolverConfig scfg = solver_config(cfg);
    const auto bounds = voigt_reuss_bounds(fractions, phases);
    auto inside = [](double v, double lo, double hi) {
      const double tol = std::max(1e-3 * (hi - lo), 1e-9 * std::abs(hi));
      return v >= lo - tol && v <= hi + tol;
    };
    double bulk = 0.0;
    if (cfg.moduli == ModuliMode::Full) {
      Homogenization h = homogenize(grid, phases, scfg);
      auto iso = isotropic_projection(h.c_hom);
      bulk = iso.bulk;
      r.c_hom = h.c_hom;
      r.shear = iso.shear / phases[kMatrixPhase].mu;
      r.anisotropy_index = iso.anisotropy_index;
      r.within_bounds = inside(iso.shear, bounds.shear_lower, bounds.shear_upper);
      for (const auto& rep : h.reports) {
        r.iterations += rep.iterations;
        r.max_eps_eq = std::max(r.max_eps_eq, rep.eps_eq);
        r.max_eps_comp = std::max(r.max_eps_comp, rep.eps_comp);
      }
    } else {
      SolveReport rep;
      bulk = hydrostatic_bulk_modulus(grid, phases, scfg, &rep);
      r.iterations = rep.iterations;
      r.max_eps_eq = rep.eps_eq;
      r.max_eps_comp = rep.eps_comp;
    }
    r.within_bounds = r.within_bounds && inside(bulk, bounds.bulk_lower, bounds.bulk_upper);
    r.bulk = bulk / phases[kMatrixPhase].bulk();
    r.timings.solve_s = seconds_since(t0);
    r.ok = true;
  } catch (const Error& e) {
    const auto cat = e.category();
    if (cat != ErrorCategory::Generation && cat != ErrorCategory::Solver) throw;
    r.ok = false;
    r.failure_kind = to_string(e.kind());
    r.failure_message = e.what();
    r.c_hom.reset();
    r.bulk = std::numeric_limits<double>::quiet_NaN();
    r.shear = r.anisotropy_index = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

PointSummary summarize_point(const CampaignConfig& cfg, const GridPoint& point, std::vector<SampleResult> samples) {
  std::sort(samples.begin(), samples.end(),
            [](const SampleResult& a, const SampleResult& b) { return a.sample_index < b.sample_index; });
  PointSummary s;
  s.point = point;
  std::vector<double> bulk, shear;
  for (const auto& r : samples) {
    if (!r.ok) {
      ++s.failures;
      continue;
    }
    bulk.push_back(r.bulk);
    shear.push_back(r.shear);
  }
  s.samples = static_cast<int>(bulk.size());
  s.escalated = static_cast<int>(samples.size()) > cfg.samples_per_point;
  auto metric = [&](const std::vector<double>& v) -> std::optional<MetricSummary> {
    if (v.empty()) return std::nullopt;
    MetricSummary m;
    if (v.size() == 1) {
      m.mean = v.front();
      m.std_dev = std::numeric_limits<double>::quiet_NaN();
      return m;
    }
    auto ci = student_interval(v, cfg.confidence_level);
    m.mean = ci.mean;
    m.std_dev = ci.std_dev;
    m.half_width = ci.half_width;
    return m;
  };
  s.bulk = metric(bulk);
  if (cfg.moduli == ModuliMode::Full) s.shear = metric(shear);
  s.status = s.samples < failure_threshold(cfg) ? PointStatus::Failed : PointStatus::Complete;
  return s;
}

PointOutcome run_point(const CampaignConfig& cfg, const GridPoint& point) {
  PointOutcome out;
  out.samples.resize(static_cast<std::size_t>(cfg.samples_per_point));
  parallel_for(out.samples.size(), cfg.workers,
               [&](std::size_t i) { out.samples[i] = run_sample(cfg, point, static_cast<int>(i)); });
  out.summary = summarize_point(cfg, point, out.samples);
  if (out.summary.status == PointStatus::Complete && needs_escalation(cfg, out.summary)) {
    const std::size_t first = out.samples.size();
    out.samples.resize(static_cast<std::size_t>(cfg.max_samples_per_point));
    parallel_for(out.samples.size() - first, cfg.workers, [&](std::size_t i) {
      out.samples[first + i] = run_sample(cfg, point, static_cast<int>(first + i));
    });
    out.summary = summarize_point(cfg, point, out.samples);
  }
  if (out.summary.status == PointStatus::Failed)
    throw PointFailedError("grid point " + std::to_string(point.index) + ": only " +
                               std::to_string(out.summary.samples) + " successful samples",
                           std::move(out));
  return out;
}

std::filesystem::path sample_record_path(const std::filesystem::path& out_dir, int point_index, int sample_index) {
  char name[64];
  std::snprintf(name, sizeof name, "p%05d_s%03d.json", point_index, sample_index);
  return out_dir / "samples" / name;
}

void write_sample_record(const std::filesystem::path& path, const SampleResult& r, std::uint64_t point_hash) {
  json j;
  j["format"] = "stochhom-sample";
  j["version"] = 1;
  j["point_hash"] = hash_hex(point_hash);
  j["point_index"] = r.point_index;
  j["sample_index"] = r.sample_index;
  j["seed"] = r.seed;
  j["ok"] = r.ok;
  if (!r.ok) {
    j["failure_kind"] = r.failure_kind;
    j["failure_message"] = r.failure_message;
  }
  if (r.c_hom) {
    json c = json::array();
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < 6; ++k) c.push_back((*r.c_hom)(i, k));
    j["c_hom_mandel"] = c;
  }
  j["bulk"] = number_or_null(r.bulk);
  j["shear"] = number_or_null(r.shear);
  j["anisotropy_index"] = number_or_null(r.anisotropy_index);
  j["inclusion_fraction"] = r.inclusion_fraction;
  j["iterations"] = r.iterations;
  j["max_eps_eq"] = r.max_eps_eq;
  j["max_eps_comp"] = r.max_eps_comp;
  j["within_bounds"] = r.within_bounds;
  j["timings"] = {{"generate_s", r.timings.generate_s}, {"voxelize_s", r.timings.voxelize_s},
                  {"solve_s", r.timings.solve_s}};
  std::filesystem::create_directories(path.parent_path());
  write_file_atomically(path, j.dump(1) + "\n");
}

std::optional<SampleResult> read_sample_record(const std::filesystem::path& path, std::uint64_t point_hash) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  try {
    json j = json::parse(is);
    if (j.at("format") != "stochhom-sample" || j.at("version") != 1 || j.at("point_hash") != hash_hex(point_hash))
      return std::nullopt;
    SampleResult r;
    r.point_index = j.at("point_index");
    r.sample_index = j.at("sample_index");
    r.seed = j.at("seed");
    r.ok = j.at("ok");
    if (!r.ok) {
      r.failure_kind = j.at("failure_kind");
      r.failure_message = j.at("failure_message");
    }
    if (j.contains("c_hom_mandel")) {
      StiffnessTensor c;
      const auto& a = j["c_hom_mandel"];
      if (a.size() != 36) return std::nullopt;
      for (int i = 0; i < 6; ++i)
        for (int k = 0; k < 6; ++k) c(i, k) = a[static_cast<std::size_t>(6 * i + k)].get<double>();
      r.c_hom = c;
    }
    r.bulk = number_from(j.at("bulk"));
    r.shear = number_from(j.at("shear"));
    r.anisotropy_index = number_from(j.at("anisotropy_index"));
    r.inclusion_fraction = j.at("inclusion_fraction");
    r.iterations = j.at("iterations");
    r.max_eps_eq = j.at("max_eps_eq");
    r.max_eps_comp = j.at("max_eps_comp");
    r.within_bounds = j.at("within_bounds");
    const auto& t = j.at("timings");
    r.timings = {t.at("generate_s"), t.at("voxelize_s"), t.at("solve_s")};
    return r;
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable records are recomputed
  }
}

CampaignTable sweep(const CampaignConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                    const SweepOptions& opts) {
  cfg.validate();
  const auto grid = expand_grid(cfg);
  std::vector<std::uint64_t> hashes;
  for (const auto& p : grid) hashes.push_back(point_hash(cfg, p));
  if (out_dir && opts.compute) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir / "samples", ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir->string() + ": " + ec.message());
    write_file_atomically(*out_dir / "config.normalized", serialize_config(cfg));
  }

  std::vector<std::vector<std::optional<SampleResult>>> results(grid.size());
  long remaining = cfg.budget > 0 ? cfg.budget : std::numeric_limits<long>::max();
  std::vector<bool> within_budget(grid.size(), false);

  // Schedules samples [first, last) of each listed point, loading persisted
  // records and computing the rest in parallel.
  auto run_phase = [&](const std::vector<std::size_t>& points, auto sample_range) {
    struct Task {
      std::size_t point;
      int sample;
    };
    std::vector<Task> tasks;
    for (std::size_t p : points) {
      auto [first, last] = sample_range(p);
      results[p].resize(static_cast<std::size_t>(last));
      for (int s = first; s < last; ++s) {
        if (out_dir) {
          auto rec = read_sample_record(sample_record_path(*out_dir, grid[p].index, s), hashes[p]);
          if (rec && rec->seed == sample_seed(cfg.base_seed, grid[p].index, s)) {
            results[p][static_cast<std::size_t>(s)] = std::move(rec);
            continue;
          }
        }
        if (opts.compute) tasks.push_back({p, s});
      }
    }
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
      const auto& t = tasks[i];
      SampleResult r = run_sample(cfg, grid[t.point], t.sample);
      if (out_dir) write_sample_record(sample_record_path(*out_dir, grid[t.point].index, t.sample), r, hashes[t.point]);
      results[t.point][static_cast<std::size_t>(t.sample)] = std::move(r);
    });
  };

  auto collected = [&](std::size_t p) {
    std::vector<SampleResult> v;
    for (const auto& r : results[p])
      if (r) v.push_back(*r);
    return v;
  };

  std::vector<std::size_t> first_phase;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (remaining < cfg.samples_per_point) break;
    remaining -= cfg.samples_per_point;
    within_budget[p] = true;
    first_phase.push_back(p);
  }
  run_phase(first_phase, [&](std::size_t) { return std::pair{0, cfg.samples_per_point}; });

  std::vector<std::size_t> escalate;
  std::vector<bool> escalation_cut(grid.size(), false);
  for (std::size_t p : first_phase) {
    auto samples = collected(p);
    if (static_cast<int>(samples.size()) < cfg.samples_per_point) continue;
    auto s = summarize_point(cfg, grid[p], samples);
    if (s.status != PointStatus::Complete || !needs_escalation(cfg, s)) continue;
    const long extra = cfg.max_samples_per_point - cfg.samples_per_point;
    if (remaining < extra) {
      escalation_cut[p] = true;
      continue;
    }
    remaining -= extra;
    escalate.push_back(p);
  }
  run_phase(escalate, [&](std::size_t) { return std::pair{cfg.samples_per_point, cfg.max_samples_per_point}; });

  CampaignTable table;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto samples = collected(p);
    const std::size_t expected = results[p].size();
    PointSummary s = summarize_point(cfg, grid[p], samples);
    if (!within_budget[p] || escalation_cut[p] || samples.size() < expected || expected == 0) {
      s.status = PointStatus::Incomplete;
    }
    if (s.status != PointStatus::Complete) table.complete = false;
    table.points.push_back(std::move(s));
  }

  if (out_dir && opts.compute) {
    write_file_atomically(*out_dir / "summary.csv", summary_csv(cfg, table));
    write_series(cfg, table, *out_dir / "series");
    json manifest;
    manifest["format"] = "stochhom-manifest";
    manifest["version"] = 1;
    manifest["toolkit_version"] = STOCHHOM_VERSION;
    manifest["config_hash"] = hash_hex(config_hash(cfg));
    manifest["timestamp"] = utc_timestamp();
    manifest["complete"] = table.complete;
    manifest["layout"] = {{"config", "config.normalized"},
                          {"summary", "summary.csv"},
                          {"samples", "samples/pNNNNN_sNNN.json"},
                          {"series", "series/<metric>_vs_<axis>[_g<k>].csv"}};
    write_file_atomically(*out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return table;
}

CampaignTable report(const std::filesystem::path& out_dir) {
  SweepOptions opts;
  opts.compute = false;
  return sweep(load_config(out_dir / "config.normalized"), out_dir, opts);
}

std::string summary_csv(const CampaignConfig& cfg, const CampaignTable& table) {
  std::ostringstream os;
  os << "# stochhom-summary v1\n";
  os << "# config_hash " << hash_hex(config_hash(cfg)) << "\n";
  os << "point,f_sp,f_cyl,aspect_ratio,n_sp,n_cyl,contrast,wave_amplitude,defect_fraction,status,samples,failures,"
        "bulk_mean,bulk_std,bulk_ci_half_width,shear_mean,shear_std,shear_ci_half_width\n";
  auto metric = [](const std::optional<MetricSummary>& m) {
    if (!m) return std::string(",,");
    return csv_number(m->mean) + "," + csv_number(m->std_dev) + "," + csv_number(m->half_width);
  };
  for (const auto& s : table.points) {
    const auto& p = s.point;
    os << p.index << ',' << format_double(p.f_sp) << ',' << format_double(p.f_cyl) << ','
       << format_double(p.aspect_ratio) << ',' << p.n_sp << ',' << p.n_cyl << ',' << format_double(p.contrast) << ','
       << format_double(p.wave_amplitude) << ',' << format_double(p.defect_fraction) << ',' << status_name(s.status)
       << ',' << s.samples << ',' << s.failures << ',' << metric(s.bulk) << ',' << metric(s.shear) << '\n';
  }
  os << "# table " << (table.complete ? "complete" : "incomplete") << "\n";
  return os.str();
}

}  // namespace stochhom
