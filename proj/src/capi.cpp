#include "stochhom/stochhom.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "stochhom/campaign.hpp"
#include "stochhom/config.hpp"
#include "stochhom/io.hpp"
#include "stochhom/results.hpp"
#include "stochhom/voxel.hpp"

#ifndef STOCHHOM_VERSION
#define STOCHHOM_VERSION "0.0.0"
#endif

using namespace stochhom;

struct sh_config {
  CampaignConfig cfg;
};
struct sh_microstructure {
  Microstructure m;
};
struct sh_voxel_grid {
  VoxelGrid grid;
};
struct sh_homogenization {
  Homogenization h;
  PhaseTable phases;
};
struct sh_campaign {
  CampaignConfig cfg;
  CampaignTable table;
};

namespace {

thread_local std::string g_last_error;
thread_local int g_last_load_case = 0;

sh_status fail(sh_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

sh_status status_of(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config: return SH_ERR_CONFIG;
    case ErrorCategory::Generation: return SH_ERR_GENERATION;
    case ErrorCategory::Solver: return SH_ERR_SOLVER;
    case ErrorCategory::Io: return SH_ERR_IO;
    case ErrorCategory::InvalidArgument: return SH_ERR_INVALID_ARGUMENT;
  }
  return SH_ERR_INVALID_ARGUMENT;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
sh_status guarded(Fn&& fn) {
  g_last_error.clear();
  g_last_load_case = 0;
  try {
    fn();
    return SH_OK;
  } catch (const SolverError& e) {
    g_last_load_case = e.load_case() >= 0 ? e.load_case() + 1 : 0;
    return fail(SH_ERR_SOLVER, e.what());
  } catch (const Error& e) {
    return fail(status_of(e.category()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(SH_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SH_ERR_INVALID_ARGUMENT, "out of memory");
  } catch (const std::exception& e) {
    return fail(SH_ERR_INVALID_ARGUMENT, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

sh_status copy_text(const std::string& text, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf && cap > 0) {
    const size_t n = std::min(cap - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
  return SH_OK;
}

}  // namespace

extern "C" {

const char* sh_version(void) { return STOCHHOM_VERSION; }
const char* sh_last_error_message(void) { return g_last_error.c_str(); }
int sh_last_error_load_case(void) { return g_last_load_case; }

sh_status sh_config_load(const char* path, sh_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new sh_config{load_config(path)};
  });
}

sh_status sh_config_parse(const char* text, sh_config** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new sh_config{parse_config(text)};
  });
}

void sh_config_free(sh_config* cfg) { delete cfg; }

sh_status sh_config_hash(const sh_config* cfg, uint64_t* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = config_hash(cfg->cfg);
  });
}

sh_status sh_config_normalized(const sh_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(cfg, "null argument");
    copy_text(serialize_config(cfg->cfg), buf, cap, needed);
  });
}

sh_status sh_config_resolution(const sh_config* cfg, int* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = cfg->cfg.resolution;
  });
}

sh_status sh_config_grid_size(const sh_config* cfg, size_t* out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    *out = expand_grid(cfg->cfg).size();
  });
}

sh_status sh_generate(const sh_config* cfg, sh_microstructure** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    const auto& c = cfg->cfg;
    const GridPoint p = expand_grid(c).front();
    *out = new sh_microstructure{
        generate_microstructure(generation_spec(c, p, c.base_seed), c.md, c.rsa, imperfection_spec(c, p))};
  });
}

sh_status sh_microstructure_load(const char* path, sh_microstructure** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new sh_microstructure{load_microstructure(path)};
  });
}

sh_status sh_microstructure_save(const sh_microstructure* m, const char* path) {
  return guarded([&] {
    require(m && path, "null argument");
    save_microstructure(m->m, path);
  });
}

void sh_microstructure_free(sh_microstructure* m) { delete m; }

sh_status sh_microstructure_inclusion_count(const sh_microstructure* m, size_t* out) {
  return guarded([&] {
    require(m && out, "null argument");
    *out = m->m.inclusions.size();
  });
}

sh_status sh_microstructure_fractions(const sh_microstructure* m, double* spheres, double* cylinders,
                                      double* fragments) {
  return guarded([&] {
    require(m, "null argument");
    auto f = analytic_family_fractions(m->m);
    if (spheres) *spheres = f.spheres;
    if (cylinders) *cylinders = f.cylinders;
    if (fragments) *fragments = f.fragments;
  });
}

sh_status sh_voxelize(const sh_microstructure* m, int resolution, int supersample, sh_voxel_grid** out) {
  return guarded([&] {
    require(m && out, "null argument");
    VoxelizeOptions opts;
    opts.supersample = supersample != 0;
    *out = new sh_voxel_grid{voxelize(m->m, {resolution, resolution, resolution}, opts)};
  });
}

sh_status sh_voxel_load(const char* path, sh_voxel_grid** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new sh_voxel_grid{read_voxel_file(path)};
  });
}

sh_status sh_voxel_save(const sh_voxel_grid* g, const char* path) {
  return guarded([&] {
    require(g && path, "null argument");
    write_voxel_file(g->grid, path);
  });
}

void sh_voxel_free(sh_voxel_grid* g) { delete g; }

sh_status sh_voxel_dims(const sh_voxel_grid* g, int dims[3]) {
  return guarded([&] {
    require(g && dims, "null argument");
    for (int a = 0; a < 3; ++a) dims[a] = g->grid.dims()[a];
  });
}

sh_status sh_voxel_phase_count(const sh_voxel_grid* g, int* out) {
  return guarded([&] {
    require(g && out, "null argument");
    *out = g->grid.phase_count();
  });
}

sh_status sh_voxel_fraction(const sh_voxel_grid* g, int phase, double* out) {
  return guarded([&] {
    require(g && out, "null argument");
    require(phase >= 0 && phase < g->grid.phase_count(), "phase out of range");
    *out = discrete_volume_fraction(g->grid)[static_cast<size_t>(phase)];
  });
}

sh_status sh_voxel_labels(const sh_voxel_grid* g, uint8_t* out, size_t cap) {
  return guarded([&] {
    require(g && out, "null argument");
    auto labels = g->grid.labels();
    require(cap >= labels.size(), "buffer too small");
    std::memcpy(out, labels.data(), labels.size());
  });
}

sh_status sh_voxel_from_labels(const int dims[3], int phase_count, const uint8_t* labels, sh_voxel_grid** out) {
  return guarded([&] {
    require(dims && labels && out, "null argument");
    for (int a = 0; a < 3; ++a) require(dims[a] > 0, "dims must be positive");
    const size_t n = static_cast<size_t>(dims[0]) * dims[1] * dims[2];
    *out = new sh_voxel_grid{VoxelGrid({dims[0], dims[1], dims[2]}, std::vector<uint8_t>(labels, labels + n), phase_count)};
  });
}

void sh_homogenize_options_default(sh_homogenize_options* opts) {
  if (!opts) return;
  opts->matrix_young = 1.0;
  opts->matrix_poisson = 0.3;
  opts->contrast = 16.0;
  opts->acc = 1e-6;
  opts->max_iterations = 1000;
  opts->trace_path = nullptr;
}

sh_status sh_homogenize_options_from_config(const sh_config* cfg, sh_homogenize_options* opts) {
  return guarded([&] {
    require(cfg && opts, "null argument");
    sh_homogenize_options_default(opts);
    opts->matrix_young = cfg->cfg.matrix_young;
    opts->matrix_poisson = cfg->cfg.matrix_poisson;
    opts->contrast = cfg->cfg.axes.contrast.front();
    opts->acc = cfg->cfg.solver_acc;
    opts->max_iterations = cfg->cfg.solver_max_iterations;
  });
}

sh_status sh_homogenize(const sh_voxel_grid* g, const sh_homogenize_options* opts, sh_homogenization** out) {
  std::vector<TraceRow> trace;
  const sh_status st = guarded([&] {
    require(g && out, "null argument");
    sh_homogenize_options o;
    sh_homogenize_options_default(&o);
    if (opts) o = *opts;
    require(o.matrix_young > 0.0 && o.matrix_poisson > -1.0 && o.matrix_poisson < 0.5, "invalid matrix material");
    require(o.contrast > 0.0 && std::isfinite(o.contrast), "contrast must be positive");
    require(o.acc > 0.0 && o.max_iterations > 0, "invalid solver settings");
    const auto matrix = IsotropicMaterial::from_young_poisson(o.matrix_young, o.matrix_poisson);
    PhaseTable phases{matrix};
    for (int p = 1; p < g->grid.phase_count(); ++p) phases.push_back(matrix.scaled(o.contrast));
    SolverConfig scfg;
    scfg.acc = o.acc;
    scfg.max_iterations = o.max_iterations;
    if (o.trace_path) {
      int load_case = 0;
      scfg.trace = [&](int it, double ec, double ee) {
        if (it == 1) ++load_case;
        trace.push_back({load_case, it, ec, ee});
      };
    }
    auto h = homogenize(g->grid, phases, scfg);
    if (o.trace_path) write_file_atomically(o.trace_path, trace_csv(trace));
    *out = new sh_homogenization{h, phases};
  });
  if (st == SH_ERR_SOLVER && opts && opts->trace_path && !trace.empty()) {
    // Keep the partial trace for diagnosis; the error status wins.
    try {
      write_file_atomically(opts->trace_path, trace_csv(trace));
    } catch (...) {
    }
  }
  return st;
}

void sh_homogenization_free(sh_homogenization* h) { delete h; }

sh_status sh_homogenization_stiffness(const sh_homogenization* h, double out[36]) {
  return guarded([&] {
    require(h && out, "null argument");
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) out[6 * i + j] = h->h.c_hom(i, j);
  });
}

sh_status sh_homogenization_moduli(const sh_homogenization* h, double* bulk, double* shear,
                                   double* anisotropy_index) {
  return guarded([&] {
    require(h, "null argument");
    auto iso = isotropic_projection(h->h.c_hom);
    if (bulk) *bulk = iso.bulk;
    if (shear) *shear = iso.shear;
    if (anisotropy_index) *anisotropy_index = iso.anisotropy_index;
  });
}

sh_status sh_homogenization_load_case(const sh_homogenization* h, int load_case, int* iterations, double* eps_eq,
                                      double* eps_comp) {
  return guarded([&] {
    require(h, "null argument");
    require(load_case >= 1 && load_case <= 6, "load case must lie in [1, 6]");
    const auto& r = h->h.reports[static_cast<size_t>(load_case - 1)];
    if (iterations) *iterations = r.iterations;
    if (eps_eq) *eps_eq = r.eps_eq;
    if (eps_comp) *eps_comp = r.eps_comp;
  });
}

sh_status sh_homogenization_write_csv(const sh_homogenization* h, const char* path) {
  return guarded([&] {
    require(h && path, "null argument");
    write_file_atomically(path, homogenization_csv(h->h, h->phases));
  });
}

sh_status sh_campaign_run(const sh_config* cfg, const char* out_dir, sh_campaign** out) {
  return guarded([&] {
    require(cfg && out, "null argument");
    std::optional<std::filesystem::path> dir;
    if (out_dir) dir = out_dir;
    *out = new sh_campaign{cfg->cfg, sweep(cfg->cfg, dir)};
  });
}

sh_status sh_campaign_report(const char* out_dir, sh_campaign** out) {
  return guarded([&] {
    require(out_dir && out, "null argument");
    const std::filesystem::path dir(out_dir);
    *out = new sh_campaign{load_config(dir / "config.normalized"), report(dir)};
  });
}

void sh_campaign_free(sh_campaign* c) { delete c; }

sh_status sh_campaign_point_count(const sh_campaign* c, size_t* out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = c->table.points.size();
  });
}

sh_status sh_campaign_point(const sh_campaign* c, size_t i, sh_point_summary* out) {
  return guarded([&] {
    require(c && out, "null argument");
    require(i < c->table.points.size(), "point index out of range");
    const auto& s = c->table.points[i];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    *out = sh_point_summary{};
    out->index = s.point.index;
    out->f_sp = s.point.f_sp;
    out->f_cyl = s.point.f_cyl;
    out->aspect_ratio = s.point.aspect_ratio;
    out->n_sp = s.point.n_sp;
    out->n_cyl = s.point.n_cyl;
    out->contrast = s.point.contrast;
    out->wave_amplitude = s.point.wave_amplitude;
    out->defect_fraction = s.point.defect_fraction;
    out->status = static_cast<int>(s.status);
    out->samples = s.samples;
    out->failures = s.failures;
    out->has_bulk = s.bulk.has_value();
    out->has_shear = s.shear.has_value();
    out->bulk_mean = s.bulk ? s.bulk->mean : nan;
    out->bulk_std = s.bulk ? s.bulk->std_dev : nan;
    out->bulk_half_width = s.bulk && s.bulk->half_width ? *s.bulk->half_width : nan;
    out->shear_mean = s.shear ? s.shear->mean : nan;
    out->shear_std = s.shear ? s.shear->std_dev : nan;
    out->shear_half_width = s.shear && s.shear->half_width ? *s.shear->half_width : nan;
  });
}

sh_status sh_campaign_complete(const sh_campaign* c, int* out) {
  return guarded([&] {
    require(c && out, "null argument");
    *out = c->table.complete ? 1 : 0;
  });
}

sh_status sh_campaign_summary_csv(const sh_campaign* c, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(c, "null argument");
    copy_text(summary_csv(c->cfg, c->table), buf, cap, needed);
  });
}

}  // extern "C"
