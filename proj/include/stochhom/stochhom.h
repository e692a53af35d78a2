/* C interface of the stochhom library. All handles are opaque; every
 * function returning sh_status leaves a message retrievable through
 * sh_last_error_message() on failure (thread-local). */
#ifndef STOCHHOM_H
#define STOCHHOM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SH_API __declspec(dllexport)
#else
#define SH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Nonzero values match the CLI exit codes. */
typedef enum sh_status {
  SH_OK = 0,
  SH_ERR_CONFIG = 1,
  SH_ERR_GENERATION = 2,
  SH_ERR_SOLVER = 3,
  SH_ERR_IO = 4,
  SH_ERR_INVALID_ARGUMENT = 5
} sh_status;

typedef struct sh_config sh_config;
typedef struct sh_microstructure sh_microstructure;
typedef struct sh_voxel_grid sh_voxel_grid;
typedef struct sh_homogenization sh_homogenization;
typedef struct sh_campaign sh_campaign;

SH_API const char* sh_version(void);
SH_API const char* sh_last_error_message(void);
/* Failing load case (1..6) of the last solver error on this thread, or 0. */
SH_API int sh_last_error_load_case(void);

/* ---- configuration ---- */
SH_API sh_status sh_config_load(const char* path, sh_config** out);
SH_API sh_status sh_config_parse(const char* text, sh_config** out);
SH_API void sh_config_free(sh_config* cfg);
SH_API sh_status sh_config_hash(const sh_config* cfg, uint64_t* out);
/* Canonical text. Copies at most cap bytes including the terminator; *needed
 * receives the full size including the terminator. */
SH_API sh_status sh_config_normalized(const sh_config* cfg, char* buf, size_t cap, size_t* needed);
SH_API sh_status sh_config_resolution(const sh_config* cfg, int* out);
SH_API sh_status sh_config_grid_size(const sh_config* cfg, size_t* out);

/* ---- microstructures ---- */
/* Generates the first grid point of the config with seed base_seed. */
SH_API sh_status sh_generate(const sh_config* cfg, sh_microstructure** out);
SH_API sh_status sh_microstructure_load(const char* path, sh_microstructure** out);
SH_API sh_status sh_microstructure_save(const sh_microstructure* m, const char* path);
SH_API void sh_microstructure_free(sh_microstructure* m);
SH_API sh_status sh_microstructure_inclusion_count(const sh_microstructure* m, size_t* out);
/* Analytic inclusion fractions (spheres, cylinders, fragments). */
SH_API sh_status sh_microstructure_fractions(const sh_microstructure* m, double* spheres, double* cylinders,
                                             double* fragments);

/* ---- voxel grids ---- */
SH_API sh_status sh_voxelize(const sh_microstructure* m, int resolution, int supersample, sh_voxel_grid** out);
SH_API sh_status sh_voxel_load(const char* path, sh_voxel_grid** out);
SH_API sh_status sh_voxel_save(const sh_voxel_grid* g, const char* path);
SH_API void sh_voxel_free(sh_voxel_grid* g);
SH_API sh_status sh_voxel_dims(const sh_voxel_grid* g, int dims[3]);
SH_API sh_status sh_voxel_phase_count(const sh_voxel_grid* g, int* out);
SH_API sh_status sh_voxel_fraction(const sh_voxel_grid* g, int phase, double* out);
/* Copies nx*ny*nz labels, x fastest. */
SH_API sh_status sh_voxel_labels(const sh_voxel_grid* g, uint8_t* out, size_t cap);
SH_API sh_status sh_voxel_from_labels(const int dims[3], int phase_count, const uint8_t* labels, sh_voxel_grid** out);

/* ---- homogenization ---- */
typedef struct sh_homogenize_options {
  double matrix_young;   /* phase 0 */
  double matrix_poisson;
  double contrast;       /* every other phase: matrix moduli times contrast */
  double acc;
  int max_iterations;
  const char* trace_path; /* optional iteration-trace CSV, NULL for none */
} sh_homogenize_options;

SH_API void sh_homogenize_options_default(sh_homogenize_options* opts);
/* Copies the materials and solver settings of a config (first contrast value). */
SH_API sh_status sh_homogenize_options_from_config(const sh_config* cfg, sh_homogenize_options* opts);
SH_API sh_status sh_homogenize(const sh_voxel_grid* g, const sh_homogenize_options* opts, sh_homogenization** out);
SH_API void sh_homogenization_free(sh_homogenization* h);
/* 6x6 Mandel stiffness, row-major. */
SH_API sh_status sh_homogenization_stiffness(const sh_homogenization* h, double out[36]);
SH_API sh_status sh_homogenization_moduli(const sh_homogenization* h, double* bulk, double* shear,
                                          double* anisotropy_index);
SH_API sh_status sh_homogenization_load_case(const sh_homogenization* h, int load_case, int* iterations,
                                             double* eps_eq, double* eps_comp);
SH_API sh_status sh_homogenization_write_csv(const sh_homogenization* h, const char* path);

/* ---- campaigns ---- */
typedef struct sh_point_summary {
  int index;
  double f_sp, f_cyl, aspect_ratio;
  int n_sp, n_cyl;
  double contrast, wave_amplitude, defect_fraction;
  int status; /* 0 complete, 1 incomplete, 2 failed */
  int samples;
  int failures;
  int has_bulk, has_shear;
  double bulk_mean, bulk_std, bulk_half_width; /* NaN when undefined */
  double shear_mean, shear_std, shear_half_width;
} sh_point_summary;

/* out_dir may be NULL for an in-memory run. */
SH_API sh_status sh_campaign_run(const sh_config* cfg, const char* out_dir, sh_campaign** out);
SH_API sh_status sh_campaign_report(const char* out_dir, sh_campaign** out);
SH_API void sh_campaign_free(sh_campaign* c);
SH_API sh_status sh_campaign_point_count(const sh_campaign* c, size_t* out);
SH_API sh_status sh_campaign_point(const sh_campaign* c, size_t i, sh_point_summary* out);
SH_API sh_status sh_campaign_complete(const sh_campaign* c, int* out);
SH_API sh_status sh_campaign_summary_csv(const sh_campaign* c, char* buf, size_t cap, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
