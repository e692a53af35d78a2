#pragma once

// Independent reference implementations used only by tests: full 4th-order
// tensor algebra, dense Lippmann-Schwinger operator, laminate closed form,
// surface-sampling overlap oracle and a naive DFT.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Tensor4 = std::array<double, 81>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline double& at(Tensor4& t, int i, int j, int k, int l) { return t[((i * 3 + j) * 3 + k) * 3 + l]; }
inline double at(const Tensor4& t, int i, int j, int k, int l) { return t[((i * 3 + j) * 3 + k) * 3 + l]; }
inline double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

// Index pairs of the orthonormal 6-component basis.
inline constexpr int kPair[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
inline double weight(int I) { return I < 3 ? 1.0 : std::numbers::sqrt2; }

inline Mat6 to_mandel(const Tensor4& t) {
  Mat6 m;
  for (int I = 0; I < 6; ++I)
    for (int J = 0; J < 6; ++J)
      m(I, J) = weight(I) * weight(J) * at(t, kPair[I][0], kPair[I][1], kPair[J][0], kPair[J][1]);
  return m;
}

inline Vec6 to_mandel(const Eigen::Matrix3d& a) {
  Vec6 v;
  for (int I = 0; I < 6; ++I) v[I] = weight(I) * a(kPair[I][0], kPair[I][1]);
  return v;
}

inline Tensor4 isotropic_tensor(double lambda, double mu) {
  Tensor4 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          at(t, i, j, k, l) =
              lambda * delta(i, j) * delta(k, l) + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
  return t;
}

inline Mat6 isotropic_mandel(double lambda, double mu) { return to_mandel(isotropic_tensor(lambda, mu)); }

// Green operator of an isotropic medium at wave vector xi != 0, from the
// component formula with symmetrized Kronecker products.
inline Mat6 green_mandel(const std::array<double, 3>& xi, double lambda0, double mu0) {
  const double len = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  const double n[3] = {xi[0] / len, xi[1] / len, xi[2] / len};
  const double b = (lambda0 + mu0) / (mu0 * (lambda0 + 2.0 * mu0));
  Tensor4 g{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
          at(g, i, j, k, l) = (delta(k, i) * n[l] * n[j] + delta(l, i) * n[k] * n[j] + delta(k, j) * n[l] * n[i] +
                               delta(l, j) * n[k] * n[i]) /
                                  (4.0 * mu0) -
                              b * n[i] * n[j] * n[k] * n[l];
  return to_mandel(g);
}

inline int signed_freq(int k, int n) { return k <= n / 2 ? k : k - n; }
inline bool nyquist(int k, int n) { return n % 2 == 0 && k == n / 2; }

// Real-space kernel G(z) = (1/N) sum_xi Gamma(xi) exp(2 pi i xi.z), zero mode
// and Nyquist modes excluded, for all offsets z (x fastest).
inline std::vector<Mat6> green_kernel(const std::array<int, 3>& dims, double lambda0, double mu0) {
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  const std::size_t n = static_cast<std::size_t>(nx) * ny * nz;
  std::vector<Mat6> modes(n, Mat6::Zero());
  for (int kz = 0; kz < nz; ++kz)
    for (int ky = 0; ky < ny; ++ky)
      for (int kx = 0; kx < nx; ++kx) {
        if ((kx | ky | kz) == 0 || nyquist(kx, nx) || nyquist(ky, ny) || nyquist(kz, nz)) continue;
        const double tp = 2.0 * std::numbers::pi;
        modes[kx + nx * (ky + ny * kz)] = green_mandel(
            {tp * signed_freq(kx, nx), tp * signed_freq(ky, ny), tp * signed_freq(kz, nz)}, lambda0, mu0);
      }
  std::vector<Mat6> kernel(n, Mat6::Zero());
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        Mat6 acc = Mat6::Zero();
        for (int kz = 0; kz < nz; ++kz)
          for (int ky = 0; ky < ny; ++ky)
            for (int kx = 0; kx < nx; ++kx) {
              const Mat6& g = modes[kx + nx * (ky + ny * kz)];
              if (g.isZero(0.0)) continue;
              const double phase = 2.0 * std::numbers::pi *
                                   (double(kx) * x / nx + double(ky) * y / ny + double(kz) * z / nz);
              acc += std::cos(phase) * g;  // Gamma is even in xi
            }
        kernel[x + nx * (y + ny * z)] = acc / static_cast<double>(n);
      }
  return kernel;
}

// r = eps + G * ((c - c0) : eps) - E, evaluated as a dense convolution.
// Returns the root-mean-square of |r| over voxels.
inline double lippmann_schwinger_residual(const std::array<int, 3>& dims, const std::vector<Mat6>& kernel,
                                          const std::vector<Mat6>& dc, const std::vector<Vec6>& eps, const Vec6& E) {
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  const std::size_t n = eps.size();
  std::vector<Vec6> tau(n);
  for (std::size_t v = 0; v < n; ++v) tau[v] = dc[v] * eps[v];
  double sum = 0.0;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        Vec6 r = eps[x + nx * (y + ny * z)] - E;
        for (int zz = 0; zz < nz; ++zz)
          for (int yy = 0; yy < ny; ++yy)
            for (int xx = 0; xx < nx; ++xx) {
              const int dx = (x - xx + nx) % nx, dy = (y - yy + ny) % ny, dz = (z - zz + nz) % nz;
              r += kernel[dx + nx * (dy + ny * dz)] * tau[xx + nx * (yy + ny * zz)];
            }
        sum += r.squaredNorm();
      }
  return std::sqrt(sum / static_cast<double>(n));
}

// Effective stiffness of a two-layer laminate with layer normal along
// `axis`, from continuity of in-plane strain and traction.
inline Mat6 laminate_stiffness(const Mat6& c1, const Mat6& c2, double f1, int axis) {
  // Mandel indices whose tensor pair involves the normal direction.
  std::vector<int> nrm, inp;
  for (int I = 0; I < 6; ++I) (kPair[I][0] == axis || kPair[I][1] == axis ? nrm : inp).push_back(I);
  auto block = [](const Mat6& c, const std::vector<int>& r, const std::vector<int>& s) {
    Eigen::MatrixXd b(r.size(), s.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) b(i, j) = c(r[i], s[j]);
    return b;
  };
  const double f2 = 1.0 - f1;
  Eigen::MatrixXd inv_nn = f1 * block(c1, nrm, nrm).inverse() + f2 * block(c2, nrm, nrm).inverse();
  Eigen::MatrixXd c_nn = inv_nn.inverse();
  Eigen::MatrixXd a1 = block(c1, nrm, nrm).inverse() * block(c1, nrm, inp);
  Eigen::MatrixXd a2 = block(c2, nrm, nrm).inverse() * block(c2, nrm, inp);
  Eigen::MatrixXd avg_a = f1 * a1 + f2 * a2;
  Eigen::MatrixXd c_ni = c_nn * avg_a;
  Eigen::MatrixXd schur = f1 * (block(c1, inp, inp) - block(c1, inp, nrm) * a1) +
                          f2 * (block(c2, inp, inp) - block(c2, inp, nrm) * a2);
  Eigen::MatrixXd c_ii = schur + avg_a.transpose() * c_nn * avg_a;
  Mat6 out = Mat6::Zero();
  for (std::size_t i = 0; i < nrm.size(); ++i)
    for (std::size_t j = 0; j < nrm.size(); ++j) out(nrm[i], nrm[j]) = c_nn(i, j);
  for (std::size_t i = 0; i < nrm.size(); ++i)
    for (std::size_t j = 0; j < inp.size(); ++j) out(nrm[i], inp[j]) = out(inp[j], nrm[i]) = c_ni(i, j);
  for (std::size_t i = 0; i < inp.size(); ++i)
    for (std::size_t j = 0; j < inp.size(); ++j) out(inp[i], inp[j]) = c_ii(i, j);
  return out;
}

// ---- shapes for the sampling oracle ----

struct P3 {
  double x, y, z;
};
inline P3 operator+(P3 a, P3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline P3 operator-(P3 a, P3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline P3 operator*(double s, P3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dotp(P3 a, P3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double lenp(P3 a) { return std::sqrt(dotp(a, a)); }
inline P3 crossp(P3 a, P3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }

struct SolidSpec {
  bool cylinder = false;
  P3 c{};
  P3 axis{0, 0, 1};
  double r = 0.0;
  double h = 0.0;  // half length
};

// Signed distance of point p to the solid (negative inside).
inline double signed_distance(const SolidSpec& s, P3 p) {
  P3 d = p - s.c;
  if (!s.cylinder) return lenp(d) - s.r;
  const double t = dotp(d, s.axis);
  const double rho = lenp(d - t * s.axis);
  const double dr = rho - s.r, dh = std::abs(t) - s.h;
  if (dr <= 0.0 && dh <= 0.0) return std::max(dr, dh);
  return std::hypot(std::max(dr, 0.0), std::max(dh, 0.0));
}

// Surface point for parameters (u, v) in [0,1)^2 with area-uniform density.
inline P3 surface_point(const SolidSpec& s, double u, double v) {
  const double tp = 2.0 * std::numbers::pi;
  if (!s.cylinder) {
    const double z = 1.0 - 2.0 * u, rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return s.c + s.r * P3{rho * std::cos(tp * v), rho * std::sin(tp * v), z};
  }
  P3 a = s.axis;
  P3 tmp = std::abs(a.x) < 0.9 ? P3{1, 0, 0} : P3{0, 1, 0};
  P3 e1 = crossp(a, tmp);
  e1 = (1.0 / lenp(e1)) * e1;
  P3 e2 = crossp(a, e1);
  const double lateral = 2.0 * std::numbers::pi * s.r * 2.0 * s.h;
  const double cap = std::numbers::pi * s.r * s.r;
  const double total = lateral + 2.0 * cap;
  const double w = u * total;
  const double phi = tp * v;
  P3 radial = std::cos(phi) * e1 + std::sin(phi) * e2;
  if (w < lateral) {
    const double t = -s.h + 2.0 * s.h * (w / lateral);
    return s.c + t * a + s.r * radial;
  }
  const double wc = w - lateral;
  const double side = wc < cap ? -1.0 : 1.0;
  const double frac = std::fmod(wc, cap) / cap;
  return s.c + (side * s.h) * a + (s.r * std::sqrt(frac)) * radial;
}

// Minimum over sampled boundary points of each solid of the signed distance
// to the other (both directions), refined locally around the best sample.
// Negative values are witnessed overlaps; for disjoint solids the value
// converges to the separation distance. `images` are lattice shifts applied
// to b.
inline double sampled_separation(const SolidSpec& a, const SolidSpec& b, int points_per_shape,
                                 const std::vector<P3>& images) {
  const double golden = 0.6180339887498949;
  double best = INFINITY;
  auto probe = [&](const SolidSpec& from, const SolidSpec& to) {
    double best_u = 0, best_v = 0, local = INFINITY;
    for (int i = 0; i < points_per_shape; ++i) {
      const double u = (i + 0.5) / points_per_shape;
      const double v = std::fmod(i * golden, 1.0);
      const P3 p = surface_point(from, u, v);
      const double d = signed_distance(to, p);
      if (d < local) {
        local = d;
        best_u = u;
        best_v = v;
      }
    }
    // Pattern search refinement on the surface parameters.
    double step_u = 2.0 / points_per_shape + 1e-3, step_v = 0.05;
    for (int it = 0; it < 200 && (step_u > 1e-12 || step_v > 1e-12); ++it) {
      bool moved = false;
      for (auto [du, dv] : {std::pair{step_u, 0.0}, {-step_u, 0.0}, {0.0, step_v}, {0.0, -step_v}}) {
        double u = std::clamp(best_u + du, 0.0, 1.0 - 1e-15);
        double v = best_v + dv;
        v -= std::floor(v);
        double d = signed_distance(to, surface_point(from, u, v));
        if (d < local) {
          local = d;
          best_u = u;
          best_v = v;
          moved = true;
        }
      }
      if (!moved) {
        step_u *= 0.5;
        step_v *= 0.5;
      }
    }
    best = std::min(best, local);
  };
  for (const P3& shift : images) {
    SolidSpec bb = b;
    bb.c = b.c + shift;
    probe(a, bb);
    probe(bb, a);
  }
  return best;
}

// Naive 3D DFT of a real field (x fastest), forward, unnormalized.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& f, const std::array<int, 3>& dims) {
  const int nx = dims[0], ny = dims[1], nz = dims[2];
  std::vector<std::complex<double>> out(f.size());
  for (int kz = 0; kz < nz; ++kz)
    for (int ky = 0; ky < ny; ++ky)
      for (int kx = 0; kx < nx; ++kx) {
        std::complex<double> acc = 0.0;
        for (int z = 0; z < nz; ++z)
          for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
              const double ph = -2.0 * std::numbers::pi * (double(kx) * x / nx + double(ky) * y / ny + double(kz) * z / nz);
              acc += f[x + nx * (y + ny * z)] * std::polar(1.0, ph);
            }
        out[kx + nx * (ky + ny * kz)] = acc;
      }
  return out;
}

}  // namespace oracle
