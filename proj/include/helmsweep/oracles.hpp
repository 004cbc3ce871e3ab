#pragma once

// Independent reference solutions: the 1-D Robin problem solution formula,
// outgoing/incoming wave extraction, the Fourier-mode solution on a strip
// with non-reflecting ends and its discrete counterpart, and dispersion
// (phase speed) analysis of the fine and coarse stencils.

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

struct PointSource {
  double x = 0.0;
  cplx mass = 1.0;
};

// -u'' - k^2 u = f on (0, L), u'(0) + i k u(0) = h1, -u'(L) + i k u(L) = h2.
// f is sampled on a uniform grid of f.size() points covering [0, L] (may be
// empty); point sources are added analytically.
struct RobinProblem1D {
  double k = 1.0;
  double L = 1.0;
  CVector f;
  std::vector<PointSource> sources;
  cplx h1 = 0.0, h2 = 0.0;
};

cplx solve_1d_analytic(const RobinProblem1D& p, double x);

// Same formula for a general mode: -u'' + lambda^2 u = f with
// u'(0) + lambda u(0) = h1, -u'(L) + lambda u(L) = h2 (1-D: lambda = ik).
cplx solve_mode_analytic(cplx lambda, const RobinProblem1D& p, double x);

struct ReflectionPair {
  cplx plus, minus;
};

// (u' + iku)/(2ik) and (-u' + iku)/(2ik) at sample `index` of u sampled with
// spacing h, derivative by centred differences.
ReflectionPair reflection_coeffs(const CVector& u, double h, double k, std::size_t index);

// lambda = i sqrt(k^2 - eta^2) for |eta| < k, -sqrt(eta^2 - k^2) otherwise.
cplx strip_lambda(double k, double eta);

// Strip (0, L) x (0, width) with zero Dirichlet data at y = 0, width and
// non-reflecting conditions at x = 0, L. Modes sin(eta_l y), eta_l = pi l / width.
struct StripProblem {
  double k = 10.0;
  double L = 1.0;
  double width = 0.5;
  int modes = 32;
  std::function<cplx(double, double)> f;
  int quadrature = 64;  // Gauss-Legendre points per integral
};

// Field at the points (xs[i], ys[j]), returned x fastest.
CVector solve_strip_fourier(const StripProblem& p, const std::vector<double>& xs,
                            const std::vector<double>& ys);

// Standard five-point discretization of the strip problem with spacing h and
// an exact per-mode outgoing closure at both x ends (dense in y), solved by
// dense LU. Returns interior node values, x fastest.
CVector solve_strip_discrete(const StripProblem& p, double h);

// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w);

enum class StencilFamily { StandardFd, OptimizedFd };

// Numerical wavenumber times h of a constant-coefficient stencil along `dir`
// (unit vector) for the given k h. Coefficients default to the table row at
// 1/G = kh / (2 pi).
double numerical_kh(StencilFamily family, int dim, double kh, const std::array<double, 3>& dir,
                    std::optional<std::array<double, 5>> coeffs = {});

struct DispersionPoint {
  double inv_g = 0.0;
  double max_error = 0.0;
};

// Max over directions of |c_fine - c_coarse| / c_fine, fine = standard FD at
// spacing h, coarse = `coarse` family at 2h; inv_g is the coarse 1/G.
std::vector<DispersionPoint> dispersion_error(StencilFamily coarse, int dim,
                                              const std::vector<double>& inv_g,
                                              std::optional<std::array<double, 5>> coeffs = {});

// Max over directions of |c_numeric - 1| for one stencil at spacing h.
double phase_error(StencilFamily family, int dim, double kh,
                   std::optional<std::array<double, 5>> coeffs = {});

void write_dispersion_csv(std::ostream& os, const std::vector<DispersionPoint>& pts);

// Reflection amplitude of a plane wave (at the given points per wavelength)
// off a sponge layer of `width` cells in 1-D.
double sponge_reflection_1d(double points_per_wavelength, int width, double gamma_max);

}  // namespace helmsweep
