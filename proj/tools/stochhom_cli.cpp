// Command-line front end. Uses only the C interface.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stochhom/stochhom.h"

namespace {

// Exit codes: 0 success, 1 config/usage, 2 generation, 3 solver, 4 io.
int exit_code(sh_status s) {
  switch (s) {
    case SH_OK: return 0;
    case SH_ERR_GENERATION: return 2;
    case SH_ERR_SOLVER: return 3;
    case SH_ERR_IO: return 4;
    case SH_ERR_CONFIG:
    case SH_ERR_INVALID_ARGUMENT:
    default: return 1;
  }
}

const char* category_name(sh_status s) {
  switch (s) {
    case SH_ERR_GENERATION: return "generation";
    case SH_ERR_SOLVER: return "solver";
    case SH_ERR_IO: return "io";
    default: return "config";
  }
}

struct Failure {
  sh_status status;
};

void check(sh_status s) {
  if (s != SH_OK) throw Failure{s};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<sh_config, Deleter<sh_config, sh_config_free>>;
using MicroPtr = std::unique_ptr<sh_microstructure, Deleter<sh_microstructure, sh_microstructure_free>>;
using GridPtr = std::unique_ptr<sh_voxel_grid, Deleter<sh_voxel_grid, sh_voxel_free>>;
using HomPtr = std::unique_ptr<sh_homogenization, Deleter<sh_homogenization, sh_homogenization_free>>;
using CampaignPtr = std::unique_ptr<sh_campaign, Deleter<sh_campaign, sh_campaign_free>>;

ConfigPtr load_config(const std::string& path) {
  sh_config* c = nullptr;
  check(sh_config_load(path.c_str(), &c));
  return ConfigPtr(c);
}

bool is_voxel_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  char magic[8] = {};
  is.read(magic, sizeof magic);
  return is && std::memcmp(magic, "SHVOXEL", 8) == 0;
}

void print_summary(const sh_campaign* c) {
  size_t needed = 0;
  check(sh_campaign_summary_csv(c, nullptr, 0, &needed));
  std::string text(needed, '\0');
  check(sh_campaign_summary_csv(c, text.data(), text.size(), &needed));
  std::fputs(text.c_str(), stdout);
}

int run_generate(const std::string& config, const std::string& out, const std::string& voxels, int resolution) {
  auto cfg = load_config(config);
  sh_microstructure* m = nullptr;
  check(sh_generate(cfg.get(), &m));
  MicroPtr micro(m);
  double sp = 0, cyl = 0, frag = 0;
  check(sh_microstructure_fractions(micro.get(), &sp, &cyl, &frag));
  GridPtr grid;
  if (!voxels.empty()) {
    if (resolution <= 0) check(sh_config_resolution(cfg.get(), &resolution));
    sh_voxel_grid* g = nullptr;
    check(sh_voxelize(micro.get(), resolution, 0, &g));
    grid.reset(g);
  }
  check(sh_microstructure_save(micro.get(), out.c_str()));
  std::fprintf(stderr, "volume fractions: spheres %.6f cylinders %.6f fragments %.6f total %.6f\n", sp, cyl, frag,
               sp + cyl + frag);
  if (grid) {
    check(sh_voxel_save(grid.get(), voxels.c_str()));
    double f = 0;
    check(sh_voxel_fraction(grid.get(), 1, &f));
    std::fprintf(stderr, "discrete inclusion fraction at %d^3: %.6f\n", resolution, f);
  }
  return 0;
}

int run_voxelize(const std::string& in, const std::string& out, int resolution, bool supersample) {
  sh_microstructure* m = nullptr;
  check(sh_microstructure_load(in.c_str(), &m));
  MicroPtr micro(m);
  sh_voxel_grid* g = nullptr;
  check(sh_voxelize(micro.get(), resolution, supersample ? 1 : 0, &g));
  GridPtr grid(g);
  check(sh_voxel_save(grid.get(), out.c_str()));
  double f = 0;
  check(sh_voxel_fraction(grid.get(), 1, &f));
  std::fprintf(stderr, "discrete inclusion fraction: %.6f\n", f);
  return 0;
}

struct HomogenizeArgs {
  std::string in, out, config, trace;
  int resolution = 0;
  double young = NAN, poisson = NAN, contrast = NAN, acc = NAN;
  int max_iterations = 0;
};

int run_homogenize(const HomogenizeArgs& a) {
  sh_homogenize_options opts;
  sh_homogenize_options_default(&opts);
  ConfigPtr cfg;
  if (!a.config.empty()) {
    cfg = load_config(a.config);
    check(sh_homogenize_options_from_config(cfg.get(), &opts));
  }
  if (!std::isnan(a.young)) opts.matrix_young = a.young;
  if (!std::isnan(a.poisson)) opts.matrix_poisson = a.poisson;
  if (!std::isnan(a.contrast)) opts.contrast = a.contrast;
  if (!std::isnan(a.acc)) opts.acc = a.acc;
  if (a.max_iterations > 0) opts.max_iterations = a.max_iterations;
  if (!a.trace.empty()) opts.trace_path = a.trace.c_str();

  GridPtr grid;
  sh_voxel_grid* g = nullptr;
  if (is_voxel_file(a.in)) {
    check(sh_voxel_load(a.in.c_str(), &g));
    grid.reset(g);
  } else {
    if (a.resolution <= 0) {
      std::fprintf(stderr, "error[config]: --resolution is required for vector-form input\n");
      return 1;
    }
    sh_microstructure* m = nullptr;
    check(sh_microstructure_load(a.in.c_str(), &m));
    MicroPtr micro(m);
    check(sh_voxelize(micro.get(), a.resolution, 0, &g));
    grid.reset(g);
  }
  sh_homogenization* h = nullptr;
  const sh_status st = sh_homogenize(grid.get(), &opts, &h);
  if (st == SH_ERR_SOLVER && sh_last_error_load_case() > 0)
    std::fprintf(stderr, "failing load case: %d\n", sh_last_error_load_case());
  check(st);
  HomPtr hom(h);
  check(sh_homogenization_write_csv(hom.get(), a.out.c_str()));
  double bulk = 0, shear = 0, aniso = 0;
  check(sh_homogenization_moduli(hom.get(), &bulk, &shear, &aniso));
  std::printf("bulk %.10g\nshear %.10g\nanisotropy_index %.6g\n", bulk, shear, aniso);
  return 0;
}

int run_campaign(const std::string& config, const std::string& out_dir) {
  auto cfg = load_config(config);
  sh_campaign* c = nullptr;
  check(sh_campaign_run(cfg.get(), out_dir.c_str(), &c));
  CampaignPtr camp(c);
  print_summary(camp.get());
  return 0;
}

int run_report(const std::string& out_dir) {
  sh_campaign* c = nullptr;
  check(sh_campaign_report(out_dir.c_str(), &c));
  CampaignPtr camp(c);
  print_summary(camp.get());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic homogenization toolkit"};
  app.set_version_flag("--version", std::string(sh_version()));
  app.require_subcommand(1);

  std::string config, out, in, voxels, out_dir;
  int resolution = 0;
  bool supersample = false;
  HomogenizeArgs ha;

  auto* gen = app.add_subcommand("generate", "generate a microstructure from a config");
  gen->add_option("-c,--config", config, "config file")->required();
  gen->add_option("-o,--out", out, "vector-form output")->required();
  gen->add_option("--voxels", voxels, "also write a voxel grid");
  gen->add_option("-r,--resolution", resolution, "voxel resolution (default: from config)");

  auto* vox = app.add_subcommand("voxelize", "rasterize a vector-form microstructure");
  vox->add_option("-i,--in", in, "vector-form input")->required();
  vox->add_option("-o,--out", out, "voxel output")->required();
  vox->add_option("-r,--resolution", resolution, "voxels per axis")->required();
  vox->add_flag("--supersample", supersample, "majority vote over 8 sub-samples");

  auto* hom = app.add_subcommand("homogenize", "compute the effective stiffness");
  hom->add_option("-i,--in", ha.in, "voxel or vector-form input")->required();
  hom->add_option("-o,--out", ha.out, "c_hom CSV output")->required();
  hom->add_option("-r,--resolution", ha.resolution, "voxels per axis for vector-form input");
  hom->add_option("-c,--config", ha.config, "take materials and solver settings from a config");
  hom->add_option("--young", ha.young, "matrix Young modulus");
  hom->add_option("--poisson", ha.poisson, "matrix Poisson ratio");
  hom->add_option("--contrast", ha.contrast, "inclusion/matrix stiffness ratio");
  hom->add_option("--acc", ha.acc, "convergence tolerance");
  hom->add_option("--max-iterations", ha.max_iterations, "iteration cap per load case");
  hom->add_option("--trace", ha.trace, "iteration-trace CSV output");

  auto* camp = app.add_subcommand("campaign", "run or resume a parameter sweep");
  camp->add_option("-c,--config", config, "config file")->required();
  camp->add_option("-d,--out-dir", out_dir, "campaign directory")->required();

  auto* rep = app.add_subcommand("report", "print the summary of a campaign directory");
  rep->add_option("-d,--out-dir", out_dir, "campaign directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return run_generate(config, out, voxels, resolution);
    if (*vox) return run_voxelize(in, out, resolution, supersample);
    if (*hom) return run_homogenize(ha);
    if (*camp) return run_campaign(config, out_dir);
    if (*rep) return run_report(out_dir);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error[%s]: %s\n", category_name(f.status), sh_last_error_message());
    return exit_code(f.status);
  }
  return 1;
}
