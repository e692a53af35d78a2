#pragma once

// Isotropic linear elasticity in the orthonormal (Mandel) 6-vector basis:
// components (11, 22, 33, sqrt2*23, sqrt2*13, sqrt2*12). In this basis the
// 6x6 matrix product is the tensor double contraction.

#include <Eigen/Core>
#include <span>

namespace stochhom {

using SymTensor2 = Eigen::Matrix<double, 6, 1>;
using StiffnessTensor = Eigen::Matrix<double, 6, 6>;

inline constexpr double kSqrt2 = 1.41421356237309504880;

SymTensor2 mandel_from_matrix(const Eigen::Matrix3d& a);
Eigen::Matrix3d matrix_from_mandel(const SymTensor2& v);

// The six orthonormal basis tensors used as load cases.
SymTensor2 mandel_basis(int index);

struct IsotropicMaterial {
  double lambda = 0.0;
  double mu = 0.0;

  static IsotropicMaterial from_young_poisson(double young, double poisson);
  static IsotropicMaterial from_bulk_shear(double bulk, double shear);

  double bulk() const { return lambda + 2.0 * mu / 3.0; }
  double young() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
  double poisson() const { return lambda / (2.0 * (lambda + mu)); }

  // Both Lame coefficients multiplied by `ratio`; Poisson ratio unchanged.
  IsotropicMaterial scaled(double ratio) const { return {lambda * ratio, mu * ratio}; }
  bool is_physical() const { return mu > 0.0 && bulk() > 0.0; }
};

// Hydrostatic (J) and deviatoric (K) projectors; J + K = identity.
const StiffnessTensor& hydrostatic_projector();
const StiffnessTensor& deviatoric_projector();

StiffnessTensor stiffness_from_material(const IsotropicMaterial& m);

// sigma = lambda tr(eps) I + 2 mu eps, without forming the 6x6 matrix.
inline void apply_isotropic(double lambda, double mu, const double* eps, double* out) {
  const double lt = lambda * (eps[0] + eps[1] + eps[2]);
  out[0] = lt + 2.0 * mu * eps[0];
  out[1] = lt + 2.0 * mu * eps[1];
  out[2] = lt + 2.0 * mu * eps[2];
  out[3] = 2.0 * mu * eps[3];
  out[4] = 2.0 * mu * eps[4];
  out[5] = 2.0 * mu * eps[5];
}

SymTensor2 apply_stiffness(const IsotropicMaterial& m, const SymTensor2& eps);

struct IsotropicProjection {
  double bulk = 0.0;
  double shear = 0.0;
  // ||c - c_iso||_F / ||c||_F
  double anisotropy_index = 0.0;
};

IsotropicProjection isotropic_projection(const StiffnessTensor& c);

// Closed-form inverse of (c_phase - c_ref): 1/(3 dk) on the hydrostatic part
// and 1/(2 dmu) on the deviatoric part.
class PhaseDifferenceInverse {
 public:
  // Throws Error(SingularDifference) if the bulk or shear difference vanishes.
  PhaseDifferenceInverse(const IsotropicMaterial& phase, const IsotropicMaterial& ref);

  double hydrostatic_factor() const { return hydro_; }
  double deviatoric_factor() const { return dev_; }

  SymTensor2 apply(const SymTensor2& v) const;
  StiffnessTensor matrix() const;

 private:
  double hydro_ = 0.0;
  double dev_ = 0.0;
};

struct ModuliBounds {
  double bulk_lower = 0.0;
  double bulk_upper = 0.0;
  double shear_lower = 0.0;
  double shear_upper = 0.0;
};

// Reuss (harmonic) and Voigt (arithmetic) phase averages.
ModuliBounds voigt_reuss_bounds(std::span<const double> fractions, std::span<const IsotropicMaterial> phases);

}  // namespace stochhom
