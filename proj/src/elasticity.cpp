#include "stochhom/elasticity.hpp"

#include <cmath>
#include <stdexcept>

#include "stochhom/error.hpp"

namespace stochhom {

SymTensor2 mandel_from_matrix(const Eigen::Matrix3d& a) {
  SymTensor2 v;
  v << a(0, 0), a(1, 1), a(2, 2), kSqrt2 * a(1, 2), kSqrt2 * a(0, 2), kSqrt2 * a(0, 1);
  return v;
}

Eigen::Matrix3d matrix_from_mandel(const SymTensor2& v) {
  const double s = 1.0 / kSqrt2;
  Eigen::Matrix3d a;
  a << v[0], s * v[5], s * v[4],
       s * v[5], v[1], s * v[3],
       s * v[4], s * v[3], v[2];
  return a;
}

SymTensor2 mandel_basis(int index) {
  if (index < 0 || index > 5) throw Error(ErrorKind::InvalidArgument, "basis index must lie in [0, 5]");
  SymTensor2 e = SymTensor2::Zero();
  e[index] = 1.0;
  return e;
}

IsotropicMaterial IsotropicMaterial::from_young_poisson(double young, double poisson) {
  if (!(young > 0.0) || !(poisson > -1.0 && poisson < 0.5))
    throw Error(ErrorKind::InvalidArgument, "Young modulus must be positive and Poisson ratio in (-1, 0.5)");
  return {young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)), young / (2.0 * (1.0 + poisson))};
}

IsotropicMaterial IsotropicMaterial::from_bulk_shear(double bulk, double shear) {
  return {bulk - 2.0 * shear / 3.0, shear};
}

const StiffnessTensor& hydrostatic_projector() {
  static const StiffnessTensor j = [] {
    StiffnessTensor m = StiffnessTensor::Zero();
    m.topLeftCorner<3, 3>().setConstant(1.0 / 3.0);
    return m;
  }();
  return j;
}

const StiffnessTensor& deviatoric_projector() {
  static const StiffnessTensor k = StiffnessTensor::Identity() - hydrostatic_projector();
  return k;
}

StiffnessTensor stiffness_from_material(const IsotropicMaterial& m) {
  return 3.0 * m.bulk() * hydrostatic_projector() + 2.0 * m.mu * deviatoric_projector();
}

SymTensor2 apply_stiffness(const IsotropicMaterial& m, const SymTensor2& eps) {
  SymTensor2 out;
  apply_isotropic(m.lambda, m.mu, eps.data(), out.data());
  return out;
}

IsotropicProjection isotropic_projection(const StiffnessTensor& c) {
  const auto& J = hydrostatic_projector();
  const auto& K = deviatoric_projector();
  // <J,J> = 1 and <K,K> = 5 under the Frobenius product.
  IsotropicProjection p;
  p.bulk = (J.cwiseProduct(c)).sum() / (3.0 * J.squaredNorm());
  p.shear = (K.cwiseProduct(c)).sum() / (2.0 * K.squaredNorm());
  const StiffnessTensor iso = 3.0 * p.bulk * J + 2.0 * p.shear * K;
  const double cn = c.norm();
  p.anisotropy_index = cn > 0.0 ? (c - iso).norm() / cn : 0.0;
  return p;
}

PhaseDifferenceInverse::PhaseDifferenceInverse(const IsotropicMaterial& phase, const IsotropicMaterial& ref) {
  const double dk = phase.bulk() - ref.bulk();
  const double dmu = phase.mu - ref.mu;
  const double kscale = std::max(std::abs(phase.bulk()), std::abs(ref.bulk()));
  const double mscale = std::max(std::abs(phase.mu), std::abs(ref.mu));
  if (std::abs(dk) <= 1e-14 * kscale || std::abs(dmu) <= 1e-14 * mscale || dk == 0.0 || dmu == 0.0)
    throw Error(ErrorKind::SingularDifference, "phase and reference moduli coincide; (c - c0) is singular");
  hydro_ = 1.0 / (3.0 * dk);
  dev_ = 1.0 / (2.0 * dmu);
}

SymTensor2 PhaseDifferenceInverse::apply(const SymTensor2& v) const {
  const double mean = (v[0] + v[1] + v[2]) / 3.0;
  SymTensor2 out = dev_ * v;
  for (int i = 0; i < 3; ++i) out[i] += (hydro_ - dev_) * mean;
  return out;
}

StiffnessTensor PhaseDifferenceInverse::matrix() const {
  return hydro_ * hydrostatic_projector() + dev_ * deviatoric_projector();
}

ModuliBounds voigt_reuss_bounds(std::span<const double> fractions, std::span<const IsotropicMaterial> phases) {
  if (fractions.size() != phases.size()) throw Error(ErrorKind::InvalidArgument, "fraction/phase count mismatch");
  ModuliBounds b;
  double inv_k = 0.0, inv_mu = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (fractions[i] <= 0.0) continue;
    b.bulk_upper += fractions[i] * phases[i].bulk();
    b.shear_upper += fractions[i] * phases[i].mu;
    inv_k += fractions[i] / phases[i].bulk();
    inv_mu += fractions[i] / phases[i].mu;
  }
  b.bulk_lower = 1.0 / inv_k;
  b.shear_lower = 1.0 / inv_mu;
  return b;
}

}  // namespace stochhom
