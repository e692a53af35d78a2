#pragma once

// Accelerated FFT scheme for the periodic Lippmann-Schwinger equation of
// linear elasticity on voxel grids, with an isotropic (negative) reference
// medium, and the six-load-case homogenized stiffness assembly.

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stochhom/elasticity.hpp"
#include "stochhom/error.hpp"
#include "stochhom/voxel.hpp"

namespace stochhom {

using cplx = std::complex<double>;
using SpectralSym = std::array<cplx, 6>;

// Per-voxel symmetric tensor, one array per Mandel component, x-fastest.
struct TensorField {
  Dims dims{0, 0, 0};
  std::array<std::vector<double>, 6> comp;

  TensorField() = default;
  explicit TensorField(Dims d);

  std::size_t voxel_count() const { return comp[0].size(); }
  SymTensor2 at(std::size_t v) const;
  SymTensor2 mean() const;
};

// Half-spectrum (real-to-complex) layout: kx in [0, nx/2], x-fastest.
struct SpectralTensorField {
  Dims dims{0, 0, 0};  // real-space dims
  std::array<std::vector<cplx>, 6> comp;

  SpectralTensorField() = default;
  explicit SpectralTensorField(Dims d);

  int half_x() const { return dims[0] / 2 + 1; }
  std::size_t mode_count() const { return comp[0].size(); }
  std::size_t index(int kx, int ky, int kz) const {
    return static_cast<std::size_t>(kx) +
           static_cast<std::size_t>(half_x()) * (static_cast<std::size_t>(ky) + static_cast<std::size_t>(dims[1]) * kz);
  }
};

// Signed integer frequency of index k on an n-point axis.
constexpr int signed_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }
// True for the unpaired Nyquist index of an even axis.
constexpr bool is_nyquist(int k, int n) { return n % 2 == 0 && k == n / 2; }

// 2*pi*s(k) per axis for a unit cell.
std::array<double, 3> frequency_vector(int kx, int ky, int kz, const Dims& dims);

// lambda0 = -sqrt(lambda1 lambda2), mu0 = -sqrt(mu1 mu2).
IsotropicMaterial reference_medium(const IsotropicMaterial& m1, const IsotropicMaterial& m2);

// Reference medium for a phase table: negative geometric mean of the extreme
// phases (the two phases for a two-phase grid).
IsotropicMaterial reference_for_phases(std::span<const IsotropicMaterial> phases);

// Gamma0(xi) : tau for one nonzero frequency.
// Throws Error(DegenerateReference) if mu0 or lambda0 + 2 mu0 vanishes.
SpectralSym green_apply_at(const std::array<double, 3>& xi, const SpectralSym& tau, const IsotropicMaterial& ref);

// Applies Gamma0 at every nonzero, non-Nyquist mode; Nyquist modes are set to
// zero and the zero mode is left untouched.
void green_apply(SpectralTensorField& field, const IsotropicMaterial& ref);

struct SolverConfig {
  double acc = 1e-6;
  int max_iterations = 1000;
  std::optional<IsotropicMaterial> reference_override;
  // Called after each iteration with (iteration, eps_comp, eps_eq); eps_eq is
  // negative when it was not evaluated that iteration.
  std::function<void(int, double, double)> trace;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double eps_eq = 0.0;
  double eps_comp = 0.0;
  SymTensor2 mean_stress = SymTensor2::Zero();
  SymTensor2 mean_strain = SymTensor2::Zero();
  SymTensor2 load = SymTensor2::Zero();
  // Largest |<eps_comp> - E| seen over all iterations.
  double max_zero_mode_error = 0.0;
};

class SolverError : public Error {
 public:
  SolverError(ErrorKind kind, const std::string& what, SolveReport report, int load_case = -1)
      : Error(kind, what), report_(std::move(report)), load_case_(load_case) {}

  const SolveReport& report() const { return report_; }
  int load_case() const { return load_case_; }

 private:
  SolveReport report_;
  int load_case_;
};

// Phase materials indexed by voxel label.
using PhaseTable = std::vector<IsotropicMaterial>;

struct LoadCaseResult {
  TensorField strain;
  SolveReport report;
};

// Reusable solver for one grid and phase table; owns transform buffers.
class FftSolver {
 public:
  FftSolver(const VoxelGrid& grid, PhaseTable phases, SolverConfig cfg = {});
  ~FftSolver();
  FftSolver(const FftSolver&) = delete;
  FftSolver& operator=(const FftSolver&) = delete;

  const IsotropicMaterial& reference() const { return ref_; }

  // Runs the scheme for macroscopic strain E. Throws SolverError on
  // non-convergence. The strain field is copied out only if requested.
  SolveReport solve(const SymTensor2& load, TensorField* strain_out = nullptr);

 private:
  struct Plans;
  const VoxelGrid& grid_;
  PhaseTable phases_;
  SolverConfig cfg_;
  IsotropicMaterial ref_;
  std::vector<double> update_hydro_;  // 2 k0 / (k_p - k0)
  std::vector<double> update_dev_;    // 2 mu0 / (mu_p - mu0)
  std::vector<double> eps_;
  std::vector<double> work_;
  std::vector<cplx> spectral_;
  Plans* plans_ = nullptr;
};

LoadCaseResult solve_load_case(const VoxelGrid& grid, const PhaseTable& phases, const SymTensor2& load,
                               const SolverConfig& cfg = {});

struct Homogenization {
  StiffnessTensor c_hom = StiffnessTensor::Zero();
  std::array<SolveReport, 6> reports;
  // max |c_ij - c_ji| / max |c_ij| before symmetrization.
  double max_asymmetry = 0.0;
};

// Six basis load cases; c_hom solves <sigma> = c_hom <eps> over them and is
// then symmetrized. Throws SolverError identifying the failing load case.
Homogenization homogenize(const VoxelGrid& grid, const PhaseTable& phases, const SolverConfig& cfg = {});

// Apparent bulk modulus from the single hydrostatic load case
// E = (1,1,1,0,0,0)/sqrt(3): k = E.<sigma> / (3 E.<eps>) with E.<eps> ~ 1.
double hydrostatic_bulk_modulus(const VoxelGrid& grid, const PhaseTable& phases, const SolverConfig& cfg = {},
                                SolveReport* report = nullptr);

}  // namespace stochhom
