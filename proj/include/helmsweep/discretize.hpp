#pragma once

// Discrete Helmholtz operators: standard compact finite differences with PML
// or sponge layers (fine level), dispersion-optimized finite differences
// (coarse level without PML) and the matching finite-element operator for
// PML-coarsened meshes. Sign convention: all operators discretize
// -div(grad u) - k^2 u.

#include <array>
#include <optional>
#include <vector>

#include "helmsweep/mesh.hpp"
#include "helmsweep/stencil.hpp"

namespace helmsweep {

struct WaveModel {
  double omega = 0.0;
  std::vector<double> k;       // per unknown (x fastest)
  std::vector<double> k_cell;  // optional, per cell; filled from k when empty

  static WaveModel constant(const Mesh& mesh, double omega, double speed = 1.0);
  static WaveModel from_velocity(const Mesh& mesh, double omega, const std::vector<double>& speed);
};

void validate(const WaveModel& model, const Mesh& mesh);

// C * depth^2 with C = strength * ref_speed / thickness^3, where the layer
// thickness is width * cell_width.
double sigma_profile(const AbsorbingLayerSpec& layer, double depth, double cell_width);
// Quadratic sponge ramp gamma_max * (depth / thickness)^2.
double sponge_profile(const AbsorbingLayerSpec& layer, double depth, double cell_width);

inline cplx pml_alpha(double sigma, double omega) { return 1.0 / cplx(1.0, sigma / omega); }

struct AxisProfile {
  std::vector<cplx> alpha_node;     // per node, cells + 1 entries
  std::vector<cplx> alpha_mid;      // per cell
  std::vector<double> damping_node;  // sponge gamma per node
  std::vector<double> damping_mid;   // sponge gamma per cell
};

AxisProfile axis_profile(const MeshAxis& axis, double omega);

struct OptCoeffTable {
  int dim = 2;
  std::vector<double> inv_g;
  std::vector<std::array<double, 5>> rows;  // 2-D rows use the first three entries
};

const OptCoeffTable& opt_table(int dim);
// Piecewise-linear in 1/G; clamps to the last row beyond the table.
std::array<double, 5> opt_coeffs(const OptCoeffTable& table, double inv_g);

enum class Scheme { StandardFd, OptimizedFd, FiniteElement };

struct DiscreteAxis {
  std::vector<double> width;      // per cell
  std::vector<cplx> alpha_node;   // per node, cells + 1 entries
  std::vector<cplx> alpha_mid;    // per cell
  bool robin_lo = false, robin_hi = false;

  int cells() const { return static_cast<int>(width.size()); }
  int unknowns() const { return cells() - 1; }
};

// Everything an assembler needs, detached from Mesh so that subdomain
// operators can be described by editing a copy.
struct Discretization {
  Scheme scheme = Scheme::StandardFd;
  int dim = 2;
  double omega = 0.0;
  std::array<DiscreteAxis, 3> axes;
  std::vector<double> k_node;   // real wavenumber per unknown (coefficient lookup)
  std::vector<cplx> k2_node;    // per unknown, sponge damping included
  std::vector<cplx> k2_cell;    // per cell, sponge damping included
  const OptCoeffTable* table = nullptr;
  std::optional<std::array<double, 5>> fixed_coeffs;  // overrides the table lookup
  double scale = 1.0;

  std::array<int, 3> shape() const;
  std::array<int, 3> cell_shape() const;
  std::size_t unknowns() const;
};

Discretization describe(Scheme scheme, const Mesh& mesh, const WaveModel& model, double scale = 1.0);
StencilOperator assemble(const Discretization& disc);
// Right-hand-side weights of the finite-difference scheme: scale / prod(alpha).
CVector fd_rhs_weights(const Discretization& disc);

// Outgoing root of z + 1/z = 2 - k^2 h^2 (|z| < 1, or Im z > 0 on the unit circle).
cplx outgoing_root(cplx k2h2);

StencilOperator assemble_fine(const Mesh& mesh, const WaveModel& model, double scale = 1.0);
StencilOperator assemble_sponge(const Mesh& mesh, const WaveModel& model, double scale = 1.0);
StencilOperator assemble_opt_fd_coarse(const Mesh& mesh, const WaveModel& model, double scale = 1.0,
                                       std::optional<std::array<double, 5>> coeffs = {});
StencilOperator assemble_fe_pml_coarse(const Mesh& mesh, const CoarseningMap& map,
                                       const WaveModel& model,
                                       std::optional<std::array<double, 5>> coeffs = {});

// Full weighting of nodal k onto coarse nodes; cell values use (1/2, 1/2)
// across unrefined cells and (1/4, 1/2, 1/4) across refined ones.
WaveModel coarsen_wavenumber(const Mesh& fine, const WaveModel& fine_model, const CoarseMesh& coarse);

}  // namespace helmsweep
