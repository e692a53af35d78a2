#include "stochhom/fft_solver.hpp"

#include <fftw3.h>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>

namespace stochhom {

namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_reference(const IsotropicMaterial& ref) {
  const double scale = std::max(std::abs(ref.lambda), std::abs(ref.mu));
  if (ref.mu == 0.0 || std::abs(ref.lambda + 2.0 * ref.mu) <= 1e-14 * scale)
    throw Error(ErrorKind::DegenerateReference, "reference medium has mu0 = 0 or lambda0 + 2 mu0 = 0");
}

// Gamma0 applied with a unit direction n; coefficients precomputed.
inline void green_kernel(const double n[3], double inv_2mu, double coef, const cplx* tau, cplx* out) {
  constexpr double s = 1.0 / kSqrt2;
  // Symmetric 3x3 from Mandel components.
  const cplx t00 = tau[0], t11 = tau[1], t22 = tau[2];
  const cplx t12 = s * tau[3], t02 = s * tau[4], t01 = s * tau[5];
  const cplx a0 = t00 * n[0] + t01 * n[1] + t02 * n[2];
  const cplx a1 = t01 * n[0] + t11 * n[1] + t12 * n[2];
  const cplx a2 = t02 * n[0] + t12 * n[1] + t22 * n[2];
  const cplx ntn = a0 * n[0] + a1 * n[1] + a2 * n[2];
  const cplx c = coef * ntn;
  // (n (x) a + a (x) n) / (2 mu0) - coef (n.tau.n) n (x) n
  out[0] = inv_2mu * 2.0 * n[0] * a0 - c * (n[0] * n[0]);
  out[1] = inv_2mu * 2.0 * n[1] * a1 - c * (n[1] * n[1]);
  out[2] = inv_2mu * 2.0 * n[2] * a2 - c * (n[2] * n[2]);
  out[3] = kSqrt2 * (inv_2mu * (n[1] * a2 + n[2] * a1) - c * (n[1] * n[2]));
  out[4] = kSqrt2 * (inv_2mu * (n[0] * a2 + n[2] * a0) - c * (n[0] * n[2]));
  out[5] = kSqrt2 * (inv_2mu * (n[0] * a1 + n[1] * a0) - c * (n[0] * n[1]));
}

struct GreenCoefficients {
  double inv_2mu;
  double coef;
};

GreenCoefficients green_coefficients(const IsotropicMaterial& ref) {
  check_reference(ref);
  return {1.0 / (2.0 * ref.mu), (ref.lambda + ref.mu) / (ref.mu * (ref.lambda + 2.0 * ref.mu))};
}

double mandel_norm(const SymTensor2& v) { return v.norm(); }

}  // namespace

TensorField::TensorField(Dims d) : dims(d) {
  const std::size_t n = static_cast<std::size_t>(d[0]) * d[1] * d[2];
  for (auto& c : comp) c.assign(n, 0.0);
}

SymTensor2 TensorField::at(std::size_t v) const {
  SymTensor2 out;
  for (int c = 0; c < 6; ++c) out[c] = comp[c][v];
  return out;
}

SymTensor2 TensorField::mean() const {
  SymTensor2 out = SymTensor2::Zero();
  const std::size_t n = voxel_count();
  for (int c = 0; c < 6; ++c) {
    double acc = 0.0;
    for (double x : comp[c]) acc += x;
    out[c] = acc / static_cast<double>(n);
  }
  return out;
}

SpectralTensorField::SpectralTensorField(Dims d) : dims(d) {
  const std::size_t n = static_cast<std::size_t>(d[0] / 2 + 1) * d[1] * d[2];
  for (auto& c : comp) c.assign(n, cplx{});
}

std::array<double, 3> frequency_vector(int kx, int ky, int kz, const Dims& dims) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return {two_pi * signed_frequency(kx, dims[0]), two_pi * signed_frequency(ky, dims[1]),
          two_pi * signed_frequency(kz, dims[2])};
}

IsotropicMaterial reference_medium(const IsotropicMaterial& m1, const IsotropicMaterial& m2) {
  if (m1.lambda < 0.0 || m2.lambda < 0.0 || !(m1.mu > 0.0) || !(m2.mu > 0.0))
    throw Error(ErrorKind::InvalidArgument, "reference medium requires lambda >= 0 and mu > 0 for both phases");
  return {-std::sqrt(m1.lambda * m2.lambda), -std::sqrt(m1.mu * m2.mu)};
}

IsotropicMaterial reference_for_phases(std::span<const IsotropicMaterial> phases) {
  if (phases.empty()) throw Error(ErrorKind::InvalidArgument, "empty phase table");
  if (phases.size() == 2) return reference_medium(phases[0], phases[1]);
  IsotropicMaterial lo = phases[0], hi = phases[0];
  for (const auto& p : phases) {
    lo.lambda = std::min(lo.lambda, p.lambda);
    lo.mu = std::min(lo.mu, p.mu);
    hi.lambda = std::max(hi.lambda, p.lambda);
    hi.mu = std::max(hi.mu, p.mu);
  }
  return reference_medium(lo, hi);
}

SpectralSym green_apply_at(const std::array<double, 3>& xi, const SpectralSym& tau, const IsotropicMaterial& ref) {
  const GreenCoefficients g = green_coefficients(ref);
  const double len = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  if (len == 0.0) throw Error(ErrorKind::InvalidArgument, "green_apply_at is undefined at the zero frequency");
  const double n[3] = {xi[0] / len, xi[1] / len, xi[2] / len};
  SpectralSym out{};
  green_kernel(n, g.inv_2mu, g.coef, tau.data(), out.data());
  return out;
}

void green_apply(SpectralTensorField& field, const IsotropicMaterial& ref) {
  const GreenCoefficients g = green_coefficients(ref);
  const Dims& d = field.dims;
  const int hx = field.half_x();
  for (int kz = 0; kz < d[2]; ++kz)
    for (int ky = 0; ky < d[1]; ++ky)
      for (int kx = 0; kx < hx; ++kx) {
        const std::size_t m = field.index(kx, ky, kz);
        if (kx == 0 && ky == 0 && kz == 0) continue;
        if (is_nyquist(kx, d[0]) || is_nyquist(ky, d[1]) || is_nyquist(kz, d[2])) {
          for (auto& c : field.comp) c[m] = 0.0;
          continue;
        }
        auto xi = frequency_vector(kx, ky, kz, d);
        const double len = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        const double n[3] = {xi[0] / len, xi[1] / len, xi[2] / len};
        cplx tau[6], out[6];
        for (int c = 0; c < 6; ++c) tau[c] = field.comp[c][m];
        green_kernel(n, g.inv_2mu, g.coef, tau, out);
        for (int c = 0; c < 6; ++c) field.comp[c][m] = out[c];
      }
}

struct FftSolver::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

FftSolver::FftSolver(const VoxelGrid& grid, PhaseTable phases, SolverConfig cfg)
    : grid_(grid), phases_(std::move(phases)), cfg_(std::move(cfg)) {
  if (!(cfg_.acc > 0.0)) throw Error(ErrorKind::InvalidArgument, "acc must be positive");
  if (cfg_.max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
  if (static_cast<int>(phases_.size()) < grid.phase_count())
    throw Error(ErrorKind::InvalidArgument, "phase table smaller than the grid's phase count");
  for (const auto& p : phases_)
    if (!p.is_physical()) throw Error(ErrorKind::InvalidArgument, "phase materials need mu > 0 and bulk > 0");

  ref_ = cfg_.reference_override ? *cfg_.reference_override
                                 : reference_for_phases(std::span(phases_).first(static_cast<std::size_t>(grid.phase_count())));
  check_reference(ref_);
  for (const auto& p : phases_) {
    PhaseDifferenceInverse inv(p, ref_);
    // 2 (c - c0)^-1 : c0, per isotropic part.
    update_hydro_.push_back(2.0 * inv.hydrostatic_factor() * 3.0 * ref_.bulk());
    update_dev_.push_back(2.0 * inv.deviatoric_factor() * 2.0 * ref_.mu);
  }

  const Dims& d = grid.dims();
  const std::size_t n = grid.size();
  const std::size_t nc = static_cast<std::size_t>(d[0] / 2 + 1) * d[1] * d[2];
  eps_.assign(6 * n, 0.0);
  work_.assign(6 * n, 0.0);
  spectral_.assign(6 * nc, cplx{});

  // Row-major (z, y, x) so that x is the fastest index.
  int shape[3] = {d[2], d[1], d[0]};
  plans_ = new Plans;
  std::lock_guard lock(planner_mutex());
  // ESTIMATE keeps plans (and results) identical from run to run.
  plans_->forward = fftw_plan_many_dft_r2c(3, shape, 6, work_.data(), nullptr, 1, static_cast<int>(n),
                                           reinterpret_cast<fftw_complex*>(spectral_.data()), nullptr, 1,
                                           static_cast<int>(nc), FFTW_ESTIMATE);
  plans_->backward = fftw_plan_many_dft_c2r(3, shape, 6, reinterpret_cast<fftw_complex*>(spectral_.data()), nullptr,
                                            1, static_cast<int>(nc), work_.data(), nullptr, 1, static_cast<int>(n),
                                            FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) throw Error(ErrorKind::InvalidArgument, "FFTW planning failed");
}

FftSolver::~FftSolver() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
  delete plans_;
}

SolveReport FftSolver::solve(const SymTensor2& load, TensorField* strain_out) {
  const double load_norm = mandel_norm(load);
  if (!(load_norm > 0.0)) throw Error(ErrorKind::InvalidArgument, "load case must be nonzero");

  const Dims& d = grid_.dims();
  const std::size_t n = grid_.size();
  const int hx = d[0] / 2 + 1;
  const std::size_t nc = static_cast<std::size_t>(hx) * d[1] * d[2];
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto labels = grid_.labels();
  const GreenCoefficients green = green_coefficients(ref_);

  auto comp = [n](std::vector<double>& v, int c) { return v.data() + static_cast<std::size_t>(c) * n; };

  for (int c = 0; c < 6; ++c) std::fill_n(comp(eps_, c), n, load[c]);

  SolveReport report;
  report.load = load;
  double eps_comp = std::numeric_limits<double>::infinity();
  double eps_eq = -1.0;

  // sigma = c : eps into work_, then forward transform; returns eps_eq and
  // the mean stress.
  auto equilibrium_residual = [&](SymTensor2& mean_stress) {
    double e[6], s[6];
    for (std::size_t v = 0; v < n; ++v) {
      const auto& p = phases_[labels[v]];
      for (int c = 0; c < 6; ++c) e[c] = eps_[c * n + v];
      apply_isotropic(p.lambda, p.mu, e, s);
      for (int c = 0; c < 6; ++c) work_[c * n + v] = s[c];
    }
    fftw_execute(plans_->forward);
    for (int c = 0; c < 6; ++c) mean_stress[c] = spectral_[c * nc].real() * inv_n;
    double acc = 0.0;
    constexpr double r = 1.0 / kSqrt2;
    for (int kz = 0; kz < d[2]; ++kz)
      for (int ky = 0; ky < d[1]; ++ky)
        for (int kx = 0; kx < hx; ++kx) {
          if (kx == 0 && ky == 0 && kz == 0) continue;
          if (is_nyquist(kx, d[0]) || is_nyquist(ky, d[1]) || is_nyquist(kz, d[2])) continue;
          const std::size_t m = static_cast<std::size_t>(kx) + static_cast<std::size_t>(hx) * (ky + static_cast<std::size_t>(d[1]) * kz);
          const auto xi = frequency_vector(kx, ky, kz, d);
          cplx t[6];
          for (int c = 0; c < 6; ++c) t[c] = spectral_[c * nc + m];
          const cplx b0 = t[0] * xi[0] + r * t[5] * xi[1] + r * t[4] * xi[2];
          const cplx b1 = r * t[5] * xi[0] + t[1] * xi[1] + r * t[3] * xi[2];
          const cplx b2 = r * t[4] * xi[0] + r * t[3] * xi[1] + t[2] * xi[2];
          // Modes with 0 < kx < nx/2 stand for a conjugate pair.
          const double w = (kx == 0 || 2 * kx == d[0]) ? 1.0 : 2.0;
          acc += w * (std::norm(b0) + std::norm(b1) + std::norm(b2));
        }
    // Physical-space means: <|div sigma|^2> = sum |xi.sigma_hat|^2 / N^2.
    const double div_rms = std::sqrt(acc) * inv_n;
    const double mean_norm = mandel_norm(mean_stress);
    return mean_norm > 0.0 ? div_rms / mean_norm : div_rms;
  };

  int it = 0;
  for (;; ++it) {
    if (eps_comp < cfg_.acc) {
      SymTensor2 mean_stress;
      eps_eq = equilibrium_residual(mean_stress);
      report.mean_stress = mean_stress;
      if (eps_eq < cfg_.acc) {
        report.converged = true;
        break;
      }
    }
    if (it >= cfg_.max_iterations) break;

    // (2) tau = (c + c0) : eps
    {
      double e[6], s[6];
      for (std::size_t v = 0; v < n; ++v) {
        const auto& p = phases_[labels[v]];
        for (int c = 0; c < 6; ++c) e[c] = eps_[c * n + v];
        apply_isotropic(p.lambda + ref_.lambda, p.mu + ref_.mu, e, s);
        for (int c = 0; c < 6; ++c) work_[c * n + v] = s[c];
      }
    }
    // (3) forward transform
    fftw_execute(plans_->forward);
    // (4) eps_comp_hat = Gamma0 : tau_hat, zero mode = E
    for (int kz = 0; kz < d[2]; ++kz)
      for (int ky = 0; ky < d[1]; ++ky)
        for (int kx = 0; kx < hx; ++kx) {
          const std::size_t m = static_cast<std::size_t>(kx) + static_cast<std::size_t>(hx) * (ky + static_cast<std::size_t>(d[1]) * kz);
          if (kx == 0 && ky == 0 && kz == 0) {
            for (int c = 0; c < 6; ++c) spectral_[c * nc + m] = load[c] * static_cast<double>(n);
            continue;
          }
          if (is_nyquist(kx, d[0]) || is_nyquist(ky, d[1]) || is_nyquist(kz, d[2])) {
            for (int c = 0; c < 6; ++c) spectral_[c * nc + m] = 0.0;
            continue;
          }
          const auto xi = frequency_vector(kx, ky, kz, d);
          const double len = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
          const double nv[3] = {xi[0] / len, xi[1] / len, xi[2] / len};
          cplx t[6], out[6];
          for (int c = 0; c < 6; ++c) t[c] = spectral_[c * nc + m];
          green_kernel(nv, green.inv_2mu, green.coef, t, out);
          for (int c = 0; c < 6; ++c) spectral_[c * nc + m] = out[c];
        }
    // (5) inverse transform into work_ (unnormalized)
    fftw_execute(plans_->backward);

    // (6) compatibility residual and (7) update, fused.
    double diff2 = 0.0;
    SymTensor2 comp_sum = SymTensor2::Zero();
    for (int c = 0; c < 6; ++c) {
      double* w = comp(work_, c);
      double s = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        w[v] *= inv_n;
        s += w[v];
      }
      comp_sum[c] = s * inv_n;
    }
    for (std::size_t v = 0; v < n; ++v) {
      const std::uint8_t ph = labels[v];
      double dlt[6];
      double sq = 0.0;
      for (int c = 0; c < 6; ++c) {
        dlt[c] = work_[c * n + v] - eps_[c * n + v];
        sq += dlt[c] * dlt[c];
      }
      diff2 += sq;
      const double mean = (dlt[0] + dlt[1] + dlt[2]) / 3.0;
      const double ah = update_hydro_[ph];
      const double ad = update_dev_[ph];
      for (int c = 0; c < 6; ++c) eps_[c * n + v] -= ad * dlt[c];
      for (int c = 0; c < 3; ++c) eps_[c * n + v] -= (ah - ad) * mean;
    }
    eps_comp = std::sqrt(diff2 * inv_n) / load_norm;
    report.max_zero_mode_error = std::max(report.max_zero_mode_error, (comp_sum - load).norm());
    if (cfg_.trace) cfg_.trace(it + 1, eps_comp, eps_eq);
    eps_eq = -1.0;
  }

  report.iterations = it;
  report.eps_comp = eps_comp;
  report.eps_eq = eps_eq;
  SymTensor2 mean_strain;
  for (int c = 0; c < 6; ++c) {
    const double* e = comp(eps_, c);
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) s += e[v];
    mean_strain[c] = s * inv_n;
  }
  report.mean_strain = mean_strain;

  if (!report.converged) {
    std::ostringstream os;
    os << "FFT scheme did not converge in " << cfg_.max_iterations << " iterations (eps_comp " << eps_comp
       << ", eps_eq " << eps_eq << ")";
    throw SolverError(ErrorKind::MaxIterationsExceeded, os.str(), report);
  }
  if (strain_out) {
    *strain_out = TensorField(d);
    for (int c = 0; c < 6; ++c) std::copy_n(comp(eps_, c), n, strain_out->comp[c].begin());
  }
  return report;
}

LoadCaseResult solve_load_case(const VoxelGrid& grid, const PhaseTable& phases, const SymTensor2& load,
                               const SolverConfig& cfg) {
  FftSolver solver(grid, phases, cfg);
  LoadCaseResult r;
  r.report = solver.solve(load, &r.strain);
  return r;
}

Homogenization homogenize(const VoxelGrid& grid, const PhaseTable& phases, const SolverConfig& cfg) {
  FftSolver solver(grid, phases, cfg);
  Homogenization h;
  StiffnessTensor stresses, strains;
  for (int j = 0; j < 6; ++j) {
    try {
      h.reports[j] = solver.solve(mandel_basis(j));
    } catch (const SolverError& e) {
      std::ostringstream os;
      os << "load case " << j + 1 << " of 6: " << e.what();
      throw SolverError(e.kind(), os.str(), e.report(), j);
    }
    stresses.col(j) = h.reports[j].mean_stress;
    strains.col(j) = h.reports[j].mean_strain;
  }
  // <sigma> = c_hom <eps> for all six cases at once.
  StiffnessTensor c = stresses * strains.inverse();
  const double scale = c.cwiseAbs().maxCoeff();
  h.max_asymmetry = scale > 0.0 ? (c - c.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  h.c_hom = 0.5 * (c + c.transpose());
  return h;
}

double hydrostatic_bulk_modulus(const VoxelGrid& grid, const PhaseTable& phases, const SolverConfig& cfg,
                                SolveReport* report) {
  FftSolver solver(grid, phases, cfg);
  SymTensor2 e = SymTensor2::Zero();
  e.head<3>().setConstant(1.0 / std::sqrt(3.0));
  SolveReport r = solver.solve(e);
  if (report) *report = r;
  return e.dot(r.mean_stress) / (3.0 * e.dot(r.mean_strain));
}

}  // namespace stochhom
