#include "helmsweep/oracles.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "helmsweep/discretize.hpp"
#include "helmsweep/mesh.hpp"
#include "helmsweep/sparselin.hpp"

namespace helmsweep {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

// Trapezoid rule for int e^{lambda |x - s|} f(s) ds over the sample grid,
// split at x so the kink falls on a quadrature point.
cplx convolve_samples(cplx lambda, const CVector& f, double L, double x) {
  const std::size_t n = f.size();
  if (n < 2) return 0.0;
  const double h = L / static_cast<double>(n - 1);
  const double t = x / h;
  const std::size_t m = std::min(static_cast<std::size_t>(std::floor(t)), n - 2);
  const double frac = t - static_cast<double>(m);
  const cplx fx = (1.0 - frac) * f[m] + frac * f[m + 1];
  auto g = [&](double s, cplx fs) { return std::exp(lambda * std::abs(x - s)) * fs; };
  cplx sum = 0.0;
  for (std::size_t i = 0; i + 1 <= m; ++i) {
    sum += 0.5 * h * (g(i * h, f[i]) + g((i + 1) * h, f[i + 1]));
  }
  const double xm = m * h, xp = (m + 1) * h;
  sum += 0.5 * (x - xm) * (g(xm, f[m]) + fx);
  sum += 0.5 * (xp - x) * (fx + g(xp, f[m + 1]));
  for (std::size_t i = m + 1; i + 1 < n; ++i) {
    sum += 0.5 * h * (g(i * h, f[i]) + g((i + 1) * h, f[i + 1]));
  }
  return sum;
}

// Root of z + 1/z = b with |z| < 1, or Im z > 0 on the unit circle.
cplx decaying_root(cplx b) {
  const cplx d = std::sqrt(b * b - 4.0);
  cplx z = 0.5 * (b - d);
  const cplx w = 0.5 * (b + d);
  const double az = std::abs(z), aw = std::abs(w);
  if (std::abs(az - aw) > 1e-12) return az < aw ? z : w;
  return z.imag() > 0.0 ? z : w;
}

}  // namespace

cplx solve_mode_analytic(cplx lambda, const RobinProblem1D& p, double x) {
  require(p.L > 0.0, "1-D problem needs L > 0");
  require(x >= 0.0 && x <= p.L, "evaluation point outside [0, L]");
  require(lambda != cplx(0.0), "mode problem needs lambda != 0");
  const cplx g = -1.0 / (2.0 * lambda);
  cplx u = g * convolve_samples(lambda, p.f, p.L, x);
  for (const PointSource& s : p.sources) u += g * std::exp(lambda * std::abs(x - s.x)) * s.mass;
  u += std::exp(lambda * x) / (2.0 * lambda) * p.h1;
  u += std::exp(lambda * (p.L - x)) / (2.0 * lambda) * p.h2;
  return u;
}

cplx solve_1d_analytic(const RobinProblem1D& p, double x) {
  require(p.k > 0.0, "1-D problem needs k > 0");
  return solve_mode_analytic(kI * p.k, p, x);
}

ReflectionPair reflection_coeffs(const CVector& u, double h, double k, std::size_t index) {
  require(index >= 1 && index + 1 < u.size(), "reflection_coeffs needs both neighbours");
  const cplx du = (u[index + 1] - u[index - 1]) / (2.0 * h);
  const cplx s = 2.0 * kI * k;
  return {(du + kI * k * u[index]) / s, (-du + kI * k * u[index]) / s};
}

cplx strip_lambda(double k, double eta) {
  if (std::abs(eta) < k) return kI * std::sqrt(k * k - eta * eta);
  return -std::sqrt(eta * eta - k * k);
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  require(n >= 1, "Gauss-Legendre needs at least one point");
  if (n == 1) {
    x = {0.5 * (a + b)};
    w = {b - a};
    return;
  }
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    x[n - 1 - i] = 0.5 * (a + b) + 0.5 * (b - a) * z;
    w[i] = w[n - 1 - i] = 0.5 * (b - a) * wi;
  }
}

CVector solve_strip_fourier(const StripProblem& p, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  require(p.k > 0.0 && p.L > 0.0 && p.width > 0.0, "strip problem needs positive k, L, width");
  require(p.modes >= 1 && static_cast<bool>(p.f), "strip problem needs modes and a source");
  std::vector<double> eta(p.modes + 1);
  std::vector<cplx> lambda(p.modes + 1);
  for (int l = 1; l <= p.modes; ++l) {
    eta[l] = kPi * l / p.width;
    if (std::abs(eta[l] - p.k) < 1e-9 * p.k) {
      throw InvalidArgument("strip problem: mode " + std::to_string(l) + " is resonant");
    }
    lambda[l] = strip_lambda(p.k, eta[l]);
  }
  std::vector<double> gy, wy;
  gauss_legendre(p.quadrature, 0.0, p.width, gy, wy);
  // Sine coefficients (2/width) int f(s, y) sin(eta y) dy for all modes.
  auto coeffs = [&](double s) {
    CVector c(p.modes + 1, cplx(0.0));
    for (std::size_t q = 0; q < gy.size(); ++q) {
      const cplx fv = p.f(s, gy[q]) * wy[q] * (2.0 / p.width);
      if (fv == cplx(0.0)) continue;
      for (int l = 1; l <= p.modes; ++l) c[l] += fv * std::sin(eta[l] * gy[q]);
    }
    return c;
  };
  CVector out(xs.size() * ys.size(), cplx(0.0));
  std::vector<double> gs, ws;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    CVector uhat(p.modes + 1, cplx(0.0));
    for (int side = 0; side < 2; ++side) {
      const double a = side == 0 ? 0.0 : x, b = side == 0 ? x : p.L;
      if (b <= a) continue;
      gauss_legendre(p.quadrature, a, b, gs, ws);
      for (std::size_t q = 0; q < gs.size(); ++q) {
        const CVector c = coeffs(gs[q]);
        for (int l = 1; l <= p.modes; ++l) {
          uhat[l] += -1.0 / (2.0 * lambda[l]) * std::exp(lambda[l] * std::abs(x - gs[q])) * c[l] * ws[q];
        }
      }
    }
    for (std::size_t j = 0; j < ys.size(); ++j) {
      cplx u = 0.0;
      for (int l = 1; l <= p.modes; ++l) u += uhat[l] * std::sin(eta[l] * ys[j]);
      out[i + xs.size() * j] = u;
    }
  }
  return out;
}

CVector solve_strip_discrete(const StripProblem& p, double h) {
  const int nxc = static_cast<int>(std::lround(p.L / h));
  const int nyc = static_cast<int>(std::lround(p.width / h));
  require(std::abs(nxc * h - p.L) < 1e-9 && std::abs(nyc * h - p.width) < 1e-9,
          "strip grid must divide the strip");
  const int nx = nxc - 1, ny = nyc - 1;
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  require(n <= kDenseSolveCap, "strip grid too large for the dense oracle");
  const double ih2 = 1.0 / (h * h);
  CVector a(n * n, cplx(0.0));
  auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t r = idx(i, j);
      a[r * n + r] = 4.0 * ih2 - p.k * p.k;
      if (i > 0) a[r * n + idx(i - 1, j)] = -ih2;
      if (i + 1 < nx) a[r * n + idx(i + 1, j)] = -ih2;
      if (j > 0) a[r * n + idx(i, j - 1)] = -ih2;
      if (j + 1 < ny) a[r * n + idx(i, j + 1)] = -ih2;
    }
  }
  // Ghost column u_0 = sum_l z_l phi_l phi_l^T u_1 (and likewise at x = L).
  const double norm = std::sqrt(2.0 / nyc);
  for (int l = 1; l <= ny; ++l) {
    const double mu = (2.0 - 2.0 * std::cos(kPi * l / nyc)) * ih2;
    const cplx z = decaying_root(2.0 - (p.k * p.k - mu) * h * h);
    for (int j = 0; j < ny; ++j) {
      for (int jj = 0; jj < ny; ++jj) {
        const double phi = norm * norm * std::sin(kPi * l * (j + 1) / nyc) * std::sin(kPi * l * (jj + 1) / nyc);
        const cplx v = -ih2 * z * phi;
        a[idx(0, j) * n + idx(0, jj)] += v;
        a[idx(nx - 1, j) * n + idx(nx - 1, jj)] += v;
      }
    }
  }
  CVector rhs(n);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) rhs[idx(i, j)] = p.f((i + 1) * h, (j + 1) * h);
  }
  return DenseLu(n, std::move(a)).solve(rhs);
}

namespace {

std::array<double, 27> stencil_row(StencilFamily family, int dim, double kh,
                                   std::optional<std::array<double, 5>> coeffs) {
  const Mesh mesh = build_mesh(dim, 4, 1.0, AbsorbingLayerSpec::none());
  const WaveModel model = WaveModel::constant(mesh, kh, 1.0);
  Discretization d =
      describe(family == StencilFamily::StandardFd ? Scheme::StandardFd : Scheme::OptimizedFd, mesh, model);
  d.fixed_coeffs = coeffs;
  const StencilOperator op = assemble(d);
  const std::size_t centre = linear_index(mesh.shape(), 1, dim >= 2 ? 1 : 0, dim >= 3 ? 1 : 0);
  std::array<double, 27> row{};
  for (int o = 0; o < 27; ++o) row[o] = op.coeff(centre, o).real();
  return row;
}

double symbol(const std::array<double, 27>& row, double t, const std::array<double, 3>& dir) {
  double s = 0.0;
  for (int o = 0; o < 27; ++o) {
    if (row[o] == 0.0) continue;
    const Offset d = StencilOperator::offset_of(o);
    s += row[o] * std::cos(t * (dir[0] * d.dx + dir[1] * d.dy + dir[2] * d.dz));
  }
  return s;
}

std::vector<std::array<double, 3>> directions(int dim) {
  std::vector<std::array<double, 3>> dirs;
  if (dim == 1) {
    dirs.push_back({1.0, 0.0, 0.0});
  } else if (dim == 2) {
    for (int i = 0; i < 64; ++i) {
      const double th = 0.5 * kPi * i / 63.0;
      dirs.push_back({std::cos(th), std::sin(th), 0.0});
    }
  } else {
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const double th = 0.5 * kPi * i / 7.0, ph = 0.5 * kPi * j / 7.0;
        dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
      }
    }
  }
  return dirs;
}

double root_along(const std::array<double, 27>& row, const std::array<double, 3>& dir) {
  // The symbol is negative at t = 0 and increases through the root.
  double lo = 0.0, hi = 0.0;
  const double step = 0.01;
  double t = step;
  while (symbol(row, t, dir) < 0.0) {
    lo = t;
    t += step;
    if (t > kPi) throw Error("dispersion: no propagating root below the Nyquist limit");
  }
  hi = t;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (symbol(row, mid, dir) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double numerical_kh(StencilFamily family, int dim, double kh, const std::array<double, 3>& dir,
                    std::optional<std::array<double, 5>> coeffs) {
  require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  require(kh > 0.0, "kh must be positive");
  return root_along(stencil_row(family, dim, kh, coeffs), dir);
}

std::vector<DispersionPoint> dispersion_error(StencilFamily coarse, int dim, const std::vector<double>& inv_g,
                                              std::optional<std::array<double, 5>> coeffs) {
  const auto dirs = directions(dim);
  std::vector<DispersionPoint> out;
  for (double g : inv_g) {
    require(g > 0.0, "1/G must be positive");
    const double khc = 2.0 * kPi * g, khf = 0.5 * khc;
    const auto fine_row = stencil_row(StencilFamily::StandardFd, dim, khf, {});
    const auto coarse_row = stencil_row(coarse, dim, khc, coeffs);
    double worst = 0.0;
    for (const auto& d : dirs) {
      const double cf = khf / root_along(fine_row, d);
      const double cc = khc / root_along(coarse_row, d);
      worst = std::max(worst, std::abs(cf - cc) / cf);
    }
    out.push_back({g, worst});
  }
  return out;
}

double phase_error(StencilFamily family, int dim, double kh, std::optional<std::array<double, 5>> coeffs) {
  const auto row = stencil_row(family, dim, kh, coeffs);
  double worst = 0.0;
  for (const auto& d : directions(dim)) worst = std::max(worst, std::abs(kh / root_along(row, d) - 1.0));
  return worst;
}

void write_dispersion_csv(std::ostream& os, const std::vector<DispersionPoint>& pts) {
  os << "invG,max_error\n";
  os.precision(17);
  for (const auto& p : pts) os << p.inv_g << ',' << p.max_error << '\n';
}

double sponge_reflection_1d(double points_per_wavelength, int width, double gamma_max) {
  require(points_per_wavelength > 2.0, "need more than 2 points per wavelength");
  const double k = 2.0 * kPi / points_per_wavelength;
  const int interior = static_cast<int>(std::ceil(4.0 * points_per_wavelength)) + 8;
  AxisLayers layers{AbsorbingLayerSpec::robin(), AbsorbingLayerSpec::sponge(width, gamma_max)};
  const Mesh mesh = build_mesh(1, {interior}, 1.0, {layers});
  const WaveModel model = WaveModel::constant(mesh, k, 1.0);
  const StencilOperator op = assemble(describe(Scheme::StandardFd, mesh, model));
  CVector f(op.size(), cplx(0.0));
  f[1] = 1.0;
  const CVector u = factorize(to_csr(op))->solve(f);
  // Fit u_j = A z^j + B z^-j between the source and the layer.
  const cplx z = decaying_root(cplx(2.0 - k * k));
  const std::size_t j = static_cast<std::size_t>(interior / 2);
  const cplx zj = std::pow(z, static_cast<double>(j)), zj1 = zj * z;
  // [zj, 1/zj; zj1, 1/zj1] [A; B] = [u_j; u_j+1]
  const cplx m00 = zj, m01 = 1.0 / zj, m10 = zj1, m11 = 1.0 / zj1;
  const cplx dd = m00 * m11 - m01 * m10;
  const cplx A = (u[j] * m11 - m01 * u[j + 1]) / dd;
  const cplx B = (m00 * u[j + 1] - m10 * u[j]) / dd;
  return std::abs(B) / std::abs(A);
}

}  // namespace helmsweep
