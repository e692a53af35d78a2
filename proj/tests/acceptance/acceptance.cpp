// Acceptance run: one PASS/FAIL line per criterion AC1..AC10.
// Usage: acceptance [n ...]   (criterion numbers; default all)
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fuzz_pairs.hpp"
#include "oracles.hpp"
#include "stochhom/campaign.hpp"
#include "stochhom/config.hpp"
#include "stochhom/fft_solver.hpp"
#include "stochhom/generation.hpp"
#include "stochhom/io.hpp"
#include "stochhom/statistics.hpp"
#include "stochhom/voxel.hpp"

using namespace stochhom;

namespace {

// Pinned tolerances and limits.
constexpr double kAc1Rel = 1e-8;
constexpr double kAc1Seconds = 10.0;
constexpr double kAc2Rel = 5e-3;
constexpr double kAc2ZeroRel = 1e-6;  // relative to max |C| for entries that vanish
constexpr double kAc3Residual = 1e-8;  // times ||E||
constexpr double kAc3Seconds = 60.0;
constexpr double kAc3SolverAcc = 1e-13;
constexpr double kAc4IntervalFraction = 1e-3;
constexpr double kAc5Rel = 1e-2;
constexpr double kAc6RsaSeconds = 5.0;
constexpr double kAc6MdSeconds = 60.0;
constexpr int kAc7Pairs = 10000;
constexpr int kAc7Points = 100000;
constexpr double kAc7Band = 1e-3;
constexpr int kAc8Resolution = 64;
constexpr int kAc8Samples = 10;
constexpr double kAc9QuantileTol = 1e-3;
constexpr int kAc9Trials = 2000;
constexpr double kAc9CoverageTol = 0.03;

const IsotropicMaterial kMatrix = IsotropicMaterial::from_young_poisson(1.0, 0.3);

PhaseTable two_phases(double contrast) { return {kMatrix, kMatrix.scaled(contrast)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void progress(const std::string& s) { std::fprintf(stderr, "  .. %s\n", s.c_str()); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

// Every homogenization performed by the run, checked against Voigt-Reuss
// bounds from the discrete phase fractions (AC4).
struct BoundsLedger {
  int checked = 0;
  int violations = 0;
  std::string first_violation;

  static bool inside(double v, double lo, double hi) {
    const double tol = kAc4IntervalFraction * (hi - lo) + 1e-12 * std::abs(hi);
    return v >= lo - tol && v <= hi + tol;
  }
  void record(const std::string& what, bool ok) {
    ++checked;
    if (!ok && violations++ == 0) first_violation = what;
  }
  void check_bulk(const std::string& what, const VoxelGrid& g, const PhaseTable& phases, double bulk) {
    auto f = discrete_volume_fraction(g);
    auto b = voigt_reuss_bounds(f, phases);
    record(what, inside(bulk, b.bulk_lower, b.bulk_upper));
  }
  void check_full(const std::string& what, const VoxelGrid& g, const PhaseTable& phases, const StiffnessTensor& c) {
    auto f = discrete_volume_fraction(g);
    auto b = voigt_reuss_bounds(f, phases);
    auto iso = isotropic_projection(c);
    record(what, inside(iso.bulk, b.bulk_lower, b.bulk_upper) && inside(iso.shear, b.shear_lower, b.shear_upper));
  }
};

BoundsLedger g_bounds;

VoxelGrid random_grid(int n, std::uint64_t seed) {
  Rng rng(seed);
  VoxelGrid g({n, n, n});
  for (auto& l : g.labels()) l = rng.uniform() < 0.5 ? 1 : 0;
  return g;
}

VoxelGrid laminate(int n, int axis) {
  VoxelGrid g({n, n, n});
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int coord[3] = {i, j, k};
        g.at(i, j, k) = coord[axis] < n / 2 ? 1 : 0;
      }
  return g;
}

Microstructure rsa_rve(double f_sp, int n_sp, double f_cyl, int n_cyl, std::uint64_t seed) {
  GenerationSpec s;
  s.f_sp = f_sp;
  s.n_sp = n_sp;
  s.f_cyl = f_cyl;
  s.n_cyl = n_cyl;
  s.rng_seed = seed;
  return generate_microstructure(s, {}, {}, {});
}

Verdict ac1() {
  auto m = rsa_rve(0.15, 20, 0.1, 10, 11);
  auto g = voxelize(m, {64, 64, 64});
  const PhaseTable same = two_phases(1.0);
  SolverConfig cfg;
  cfg.acc = 1e-10;
  const auto t0 = std::chrono::steady_clock::now();
  auto h = homogenize(g, same, cfg);
  const double t = seconds_since(t0);
  const StiffnessTensor c = stiffness_from_material(kMatrix);
  const double rel = (h.c_hom - c).cwiseAbs().maxCoeff() / c.cwiseAbs().maxCoeff();
  g_bounds.check_full("AC1", g, same, h.c_hom);
  return {rel < kAc1Rel && t < kAc1Seconds,
          fmt("max rel deviation %.2e (< %.0e), %.2f s (< %.0f s)", rel, kAc1Rel, t, kAc1Seconds)};
}

Verdict ac2() {
  const PhaseTable phases = two_phases(16.0);
  const auto c_mat = oracle::isotropic_mandel(phases[0].lambda, phases[0].mu);
  const auto c_inc = oracle::isotropic_mandel(phases[1].lambda, phases[1].mu);
  double worst = 0.0, worst_zero = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    auto g = laminate(64, axis);
    auto h = homogenize(g, phases);
    g_bounds.check_full(fmt("AC2 axis %d", axis), g, phases, h.c_hom);
    const auto expected = oracle::laminate_stiffness(c_inc, c_mat, 0.5, axis);
    const double scale = expected.cwiseAbs().maxCoeff();
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        if (std::abs(expected(i, j)) < 1e-12 * scale)
          worst_zero = std::max(worst_zero, std::abs(h.c_hom(i, j)) / scale);
        else
          worst = std::max(worst, std::abs(h.c_hom(i, j) / expected(i, j) - 1.0));
      }
    progress(fmt("laminate axis %d done", axis));
  }
  return {worst < kAc2Rel && worst_zero < kAc2ZeroRel,
          fmt("3 axes at 64^3: max rel error %.3e (< %.1e), vanishing entries %.1e (< %.0e)", worst, kAc2Rel,
              worst_zero, kAc2ZeroRel)};
}

Verdict ac3() {
  const std::array<int, 3> dims{8, 8, 8};
  SolverConfig cfg;
  cfg.acc = kAc3SolverAcc;
  cfg.max_iterations = 20000;
  double worst = 0.0, weakest_control = 1e300;
  int runs = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (double contrast : {0.0625, 16.0, 2048.0}) {
    const PhaseTable phases = two_phases(contrast);
    // Dense operator built around an unrelated positive reference medium.
    const IsotropicMaterial ref{0.5 * (phases[0].lambda + phases[1].lambda), 0.5 * (phases[0].mu + phases[1].mu)};
    const auto kernel = oracle::green_kernel(dims, ref.lambda, ref.mu);
    const oracle::Mat6 c0 = oracle::isotropic_mandel(ref.lambda, ref.mu);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto g = random_grid(8, 1000 * seed + static_cast<std::uint64_t>(contrast * 16));
      Rng rng(seed);
      SymTensor2 e;
      for (int c = 0; c < 6; ++c) e[c] = rng.uniform(-1, 1);
      auto res = solve_load_case(g, phases, e, cfg);
      std::vector<oracle::Mat6> dc(g.size());
      std::vector<oracle::Vec6> eps(g.size());
      for (std::size_t v = 0; v < g.size(); ++v) {
        const auto& p = phases[g.labels()[v]];
        dc[v] = oracle::isotropic_mandel(p.lambda, p.mu) - c0;
        eps[v] = res.strain.at(v);
      }
      worst = std::max(worst, oracle::lippmann_schwinger_residual(dims, kernel, dc, eps, e) / e.norm());
      std::vector<oracle::Vec6> uniform(g.size(), e);
      weakest_control =
          std::min(weakest_control, oracle::lippmann_schwinger_residual(dims, kernel, dc, uniform, e) / e.norm());
      ++runs;
    }
  }
  const double t = seconds_since(t0);
  // The uniform field must not pass the same check, or the oracle is blind.
  const bool control_ok = weakest_control > 1e3 * kAc3Residual;
  return {worst < kAc3Residual && t < kAc3Seconds && control_ok,
          fmt("%d solves, max residual %.2e*|E| (< %.0e), uniform-field control %.2e, %.1f s (< %.0f s)", runs, worst,
              kAc3Residual, weakest_control, t, kAc3Seconds)};
}

Verdict ac5() {
  auto m = rsa_rve(0.2, 20, 0.0, 0, 5);
  const PhaseTable phases = two_phases(16.0);
  double k[2];
  const int res[2] = {160, 200};
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 2; ++i) {
    auto g = voxelize(m, {res[i], res[i], res[i]});
    SolveReport rep;
    k[i] = hydrostatic_bulk_modulus(g, phases, {}, &rep);
    g_bounds.check_bulk(fmt("AC5 %d^3", res[i]), g, phases, k[i]);
    progress(fmt("bulk at %d^3: %.6f (%d iterations)", res[i], k[i] / kMatrix.bulk(), rep.iterations));
  }
  const double rel = std::abs(k[0] - k[1]) / k[1];
  return {rel < kAc5Rel, fmt("k/k_m %.5f at 160^3 vs %.5f at 200^3, rel diff %.3e (< %.0e), %.0f s",
                             k[0] / kMatrix.bulk(), k[1] / kMatrix.bulk(), rel, kAc5Rel, seconds_since(t0))};
}

Verdict ac6() {
  double rsa_max = 0.0, md_max = 0.0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GenerationSpec s;
    s.f_sp = 0.15;
    s.n_sp = 20;
    s.f_cyl = 0.15;
    s.n_cyl = 20;
    s.rng_seed = seed;
    auto t0 = std::chrono::steady_clock::now();
    auto a = generate_microstructure(s, {}, {}, {});
    rsa_max = std::max(rsa_max, seconds_since(t0));
    if (a.inclusions.size() != 40 || !is_non_overlapping(a)) return {false, "RSA produced an invalid packing"};

    s.f_sp = s.f_cyl = 0.25;
    s.method = GenerationMethod::MD;
    t0 = std::chrono::steady_clock::now();
    auto b = generate_microstructure(s, {}, {}, {});
    md_max = std::max(md_max, seconds_since(t0));
    if (b.inclusions.size() != 40 || !is_non_overlapping(b)) return {false, "MD produced an invalid packing"};
  }
  return {rsa_max < kAc6RsaSeconds && md_max < kAc6MdSeconds,
          fmt("worst of 3 seeds: RSA vf 0.3 %.3f s (< %.0f s), MD vf 0.5 %.2f s (< %.0f s)", rsa_max, kAc6RsaSeconds,
              md_max, kAc6MdSeconds)};
}

Verdict ac7() {
  bool ok = true;
  std::string detail;
  const char* names[] = {"sphere-sphere", "sphere-cylinder", "cylinder-cylinder"};
  for (int k = 0; k < 3; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    auto st = fuzz::check_pairs(static_cast<fuzz::PairKind>(k), kAc7Pairs, kAc7Points, kAc7Band, 7000 + k);
    ok = ok && st.pairs == kAc7Pairs && st.disagreements == 0 && st.false_disjoint == 0;
    detail += fmt("%s%s %d pairs: %d disagree, %d false-disjoint, %d in band", k ? "; " : "", names[k], st.pairs,
                  st.disagreements, st.false_disjoint, st.in_band);
    progress(fmt("%s fuzz done in %.0f s", names[k], seconds_since(t0)));
  }
  return {ok, detail};
}

struct Trend {
  std::vector<double> mean, hw;
};

CampaignConfig campaign(const std::string& axes) {
  return parse_config(axes + fmt("moduli = bulk\nresolution = %d\nsamples_per_point = %d\nmax_samples_per_point = "
                                 "%d\nbase_seed = 2024\n",
                                 kAc8Resolution, kAc8Samples, kAc8Samples));
}

// Runs the sweep; every sample enters the bounds ledger.
CampaignTable run_campaign(const std::string& label, const CampaignConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  auto grid = expand_grid(cfg);
  CampaignTable table;
  for (const auto& p : grid) {
    auto out = run_point(cfg, p);
    for (const auto& s : out.samples)
      if (s.ok) g_bounds.record(fmt("AC8 %s point %d sample %d", label.c_str(), p.index, s.sample_index),
                                s.within_bounds);
    table.points.push_back(out.summary);
  }
  progress(fmt("campaign %s: %zu points in %.0f s", label.c_str(), grid.size(), seconds_since(t0)));
  return table;
}

// Ordinal check: means strictly monotone. Adjacent pairs whose confidence
// intervals overlap are reported as unresolved.
bool monotone(const std::vector<const PointSummary*>& pts, bool increasing, std::string& detail, int& unresolved) {
  bool ok = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& b = *pts[i]->bulk;
    detail += fmt("%s%.4f+-%.4f", i ? " " : "", b.mean, b.half_width.value_or(NAN));
    if (i == 0) continue;
    const auto& a = *pts[i - 1]->bulk;
    const double d = increasing ? b.mean - a.mean : a.mean - b.mean;
    ok = ok && d > 0.0;
    if (std::abs(b.mean - a.mean) <= a.half_width.value_or(0) + b.half_width.value_or(0)) ++unresolved;
  }
  return ok;
}

Verdict ac8() {
  bool ok = true;
  std::string detail;
  int unresolved = 0;

  // (a) spheres only, vf sweep at both contrasts.
  auto ca = campaign("f_sp = [0.05, 0.1, 0.15, 0.2]\nn_sp = 20\ncontrast = [0.0625, 2048]\n");
  auto ta = run_campaign("a", ca);
  for (double contrast : {2048.0, 0.0625}) {
    std::vector<const PointSummary*> pts;
    for (const auto& s : ta.points)
      if (s.point.contrast == contrast) pts.push_back(&s);
    std::string d;
    const bool m = monotone(pts, contrast > 1.0, d, unresolved);
    ok = ok && m;
    detail += fmt("(a) c=%g %s [%s]; ", contrast, m ? "monotone" : "NOT monotone", d.c_str());
  }

  // (b) cylinders, aspect ratio sweep.
  auto cb = campaign("f_cyl = 0.1\nn_cyl = 20\naspect_ratio = [3, 6, 9]\ncontrast = 2048\n");
  auto tb = run_campaign("b", cb);
  {
    std::vector<const PointSummary*> pts;
    for (const auto& s : tb.points) pts.push_back(&s);
    std::string d;
    const bool m = monotone(pts, true, d, unresolved);
    ok = ok && m;
    detail += fmt("(b) %s [%s]; ", m ? "increasing" : "NOT increasing", d.c_str());
  }

  // (c) inclusion count stabilization.
  auto cc = campaign("f_sp = 0.2\nn_sp = [20, 30]\ncontrast = 16\n");
  auto tc = run_campaign("c", cc);
  {
    const auto& a = *tc.points[0].bulk;
    const auto& b = *tc.points[1].bulk;
    const double diff = std::abs(a.mean - b.mean);
    const double hw = a.half_width.value_or(0) + b.half_width.value_or(0);
    ok = ok && diff < hw;
    detail += fmt("(c) |%.4f-%.4f| = %.4f vs CI sum %.4f", a.mean, b.mean, diff, hw);
  }
  for (const auto* t : {&ta, &tb, &tc})
    for (const auto& s : t->points) ok = ok && s.status == PointStatus::Complete && s.samples == kAc8Samples;
  detail += fmt("; %d adjacent pairs with overlapping CIs", unresolved);
  return {ok, detail};
}

Verdict ac9() {
  const double q9 = student_t_quantile(0.975, 9), q1 = student_t_quantile(0.975, 1);
  Rng rng(99);
  int covered = 0;
  for (int t = 0; t < kAc9Trials; ++t) {
    std::vector<double> v(10);
    for (auto& x : v) x = 3.0 + 2.0 * rng.normal();
    auto ci = student_interval(v, 0.95);
    covered += std::abs(ci.mean - 3.0) <= ci.half_width;
  }
  const double cov = covered / double(kAc9Trials);
  const bool ok = std::abs(q9 - 2.2622) < kAc9QuantileTol && std::abs(q1 - 12.706) < kAc9QuantileTol &&
                  std::abs(cov - 0.95) <= kAc9CoverageTol;
  return {ok, fmt("t9=%.5f t1=%.4f (tol %.0e), coverage %.4f over %d trials (0.95+-%.2f)", q9, q1, kAc9QuantileTol,
                  cov, kAc9Trials, kAc9CoverageTol)};
}

struct PipelineOutput {
  std::string vector_text;
  VoxelGrid grid;
  StiffnessTensor c_hom;
};

PipelineOutput pipeline(const CampaignConfig& cfg) {
  const auto p = expand_grid(cfg).at(0);
  const auto seed = sample_seed(cfg.base_seed, 0, 0);
  auto m = generate_microstructure(generation_spec(cfg, p, seed), cfg.md, cfg.rsa, imperfection_spec(cfg, p));
  std::ostringstream os;
  write_microstructure(os, m);
  PipelineOutput out;
  out.vector_text = os.str();
  out.grid = voxelize(m, {cfg.resolution, cfg.resolution, cfg.resolution});
  const auto phases = phase_table(cfg, p.contrast);
  out.c_hom = homogenize(out.grid, phases, solver_config(cfg)).c_hom;
  g_bounds.check_full("AC10", out.grid, phases, out.c_hom);
  return out;
}

Verdict ac10() {
  const char* text =
      "f_sp = 0.1\nn_sp = 10\nf_cyl = 0.1\nn_cyl = 5\naspect_ratio = 6\nmethod = md\ncontrast = 16\n"
      "wave_amplitude = 0.05\nwave_count = 3\ndefect_fraction = 0.05\ndefect_zone_count = 2\nresolution = 48\n"
      "base_seed = 31337\n";
  auto a = pipeline(parse_config(text));
  auto b = pipeline(parse_config(text));
  const bool vec = a.vector_text == b.vector_text;
  const bool vox = a.grid == b.grid;
  const bool chom = std::memcmp(a.c_hom.data(), b.c_hom.data(), sizeof(double) * 36) == 0;
  return {vec && vox && chom, fmt("microstructure %s, voxel grid %s, c_hom %s", vec ? "identical" : "DIFFERS",
                                  vox ? "identical" : "DIFFERS", chom ? "bit-identical" : "DIFFERS")};
}

Verdict ac4() {
  return {g_bounds.checked > 0 && g_bounds.violations == 0,
          fmt("%d homogenizations checked, %d outside bounds (tol %.1f%% of interval)%s%s", g_bounds.checked,
              g_bounds.violations, 100 * kAc4IntervalFraction, g_bounds.violations ? ", first: " : "",
              g_bounds.first_violation.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto run_all = wanted.empty();
  // AC4 aggregates the others, so it runs last.
  const std::vector<std::pair<int, std::function<Verdict()>>> order = {
      {1, ac1}, {2, ac2}, {3, ac3}, {5, ac5}, {6, ac6}, {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}, {4, ac4}};
  std::map<int, Verdict> verdicts;
  for (const auto& [n, fn] : order) {
    if (!run_all && !wanted.count(n)) continue;
    std::fprintf(stderr, "running AC%d\n", n);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      verdicts[n] = fn();
    } catch (const std::exception& e) {
      verdicts[n] = {false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "  AC%d %s in %.1f s\n", n, verdicts[n].pass ? "passed" : "failed", seconds_since(t0));
  }
  int failed = 0;
  for (const auto& [n, v] : verdicts) {
    std::printf("AC%d %s: %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    failed += !v.pass;
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
