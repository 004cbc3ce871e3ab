#include "helmsweep/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace helmsweep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neighbouring unknown index with clamping, used where Dirichlet nodes need
// a wavenumber (boundary cells, coarse averaging).
int clamp_unknown(int node, int unknowns) { return std::clamp(node - 1, 0, unknowns - 1); }

double layer_thickness(const AbsorbingLayerSpec& layer, double cell_width) {
  return layer.width * cell_width;
}

}  // namespace

WaveModel WaveModel::constant(const Mesh& mesh, double omega, double speed) {
  require(omega > 0.0, "angular frequency must be positive");
  require(speed > 0.0, "wave speed must be positive");
  WaveModel m;
  m.omega = omega;
  m.k.assign(mesh.unknowns(), omega / speed);
  return m;
}

WaveModel WaveModel::from_velocity(const Mesh& mesh, double omega, const std::vector<double>& speed) {
  require(omega > 0.0, "angular frequency must be positive");
  require(speed.size() == mesh.unknowns(), "velocity field does not match the mesh");
  WaveModel m;
  m.omega = omega;
  m.k.resize(speed.size());
  for (std::size_t n = 0; n < speed.size(); ++n) {
    if (!(speed[n] > 0.0)) {
      throw InvalidArgument("nonpositive velocity at flat index " + std::to_string(n));
    }
    m.k[n] = omega / speed[n];
  }
  return m;
}

void validate(const WaveModel& model, const Mesh& mesh) {
  require(model.omega > 0.0, "angular frequency must be positive");
  require(model.k.size() == mesh.unknowns(), "wavenumber field does not match the mesh");
  require(model.k_cell.empty() || model.k_cell.size() == mesh.cell_count(),
          "cell wavenumber field does not match the mesh");
  for (double v : model.k) require(v > 0.0 && std::isfinite(v), "wavenumber must be positive");
}

double sigma_profile(const AbsorbingLayerSpec& layer, double depth, double cell_width) {
  require(layer.kind == LayerKind::Pml, "sigma profile requested for a non-PML layer");
  require(depth >= 0.0, "PML depth must be nonnegative");
  const double d = layer_thickness(layer, cell_width);
  const double c = layer.strength * layer.ref_speed / (d * d * d);
  return c * depth * depth;
}

double sponge_profile(const AbsorbingLayerSpec& layer, double depth, double cell_width) {
  require(layer.kind == LayerKind::Sponge, "sponge profile requested for a non-sponge layer");
  const double d = layer_thickness(layer, cell_width);
  const double r = depth / d;
  return layer.strength * r * r;
}

AxisProfile axis_profile(const MeshAxis& axis, double omega) {
  const int n = axis.cells();
  AxisProfile p;
  p.alpha_node.assign(n + 1, cplx(1.0));
  p.alpha_mid.assign(n, cplx(1.0));
  p.damping_node.assign(n + 1, 0.0);
  p.damping_mid.assign(n, 0.0);
  // Layer cells keep the fine width, so the first cell width is the layer's.
  auto sample = [&](double x, cplx& alpha, double& damping) {
    const double dlo = axis.depth_lo(x), dhi = axis.depth_hi(x);
    if (dlo > 0.0) {
      const double h = axis.width.front();
      if (axis.lo.kind == LayerKind::Pml) alpha = pml_alpha(sigma_profile(axis.lo, dlo, h), omega);
      if (axis.lo.kind == LayerKind::Sponge) damping = sponge_profile(axis.lo, dlo, axis.lo_thickness() / axis.lo.width);
    }
    if (dhi > 0.0) {
      const double h = axis.width.back();
      if (axis.hi.kind == LayerKind::Pml) alpha = pml_alpha(sigma_profile(axis.hi, dhi, h), omega);
      if (axis.hi.kind == LayerKind::Sponge) damping = sponge_profile(axis.hi, dhi, axis.hi_thickness() / axis.hi.width);
    }
  };
  double x = -axis.lo_thickness();
  for (int i = 0; i <= n; ++i) {
    sample(x, p.alpha_node[i], p.damping_node[i]);
    if (i < n) {
      sample(x + 0.5 * axis.width[i], p.alpha_mid[i], p.damping_mid[i]);
      x += axis.width[i];
    }
  }
  return p;
}

const OptCoeffTable& opt_table(int dim) {
  static const OptCoeffTable two_d{
      2,
      {0.00, 0.04, 0.08, 0.12, 0.16, 0.20, 0.24, 0.28, 0.32, 0.36, 0.40},
      {{0.61953, 0.45295, 0.77363, 0.0, 0.0},
       {0.63691, 0.47535, 0.87242, 0.0, 0.0},
       {0.62988, 0.48633, 0.86400, 0.0, 0.0},
       {0.62610, 0.48880, 0.84984, 0.0, 0.0},
       {0.62289, 0.48759, 0.83017, 0.0, 0.0},
       {0.62596, 0.47106, 0.80852, 0.0, 0.0},
       {0.62213, 0.46478, 0.78215, 0.0, 0.0},
       {0.61036, 0.47016, 0.74857, 0.0, 0.0},
       {0.59107, 0.48468, 0.70553, 0.0, 0.0},
       {0.56369, 0.50746, 0.65062, 0.0, 0.0},
       {0.52412, 0.54163, 0.57676, 0.0, 0.0}}};
  static const OptCoeffTable three_d{
      3,
      {0.00, 0.04, 0.08, 0.12, 0.16, 0.20, 0.24, 0.28, 0.32, 0.36, 0.40},
      {{0.56428, 0.35970, 0.20490, 0.77998, 0.17505},
       {0.56571, 0.36071, 0.20541, 0.78635, 0.17442},
       {0.56298, 0.36150, 0.20719, 0.78273, 0.16881},
       {0.56540, 0.35620, 0.20287, 0.76438, 0.18678},
       {0.56370, 0.35299, 0.20299, 0.74684, 0.19603},
       {0.55813, 0.35277, 0.20452, 0.72755, 0.20131},
       {0.54673, 0.35830, 0.20693, 0.70298, 0.20847},
       {0.52423, 0.38368, 0.19633, 0.66863, 0.22424},
       {0.49946, 0.39740, 0.20725, 0.62734, 0.23845},
       {0.47567, 0.40216, 0.22132, 0.58198, 0.25329},
       {0.45011, 0.36784, 0.29962, 0.53417, 0.23589}}};
  require(dim == 2 || dim == 3, "optimized coefficients exist for 2-D and 3-D only");
  return dim == 2 ? two_d : three_d;
}

std::array<double, 5> opt_coeffs(const OptCoeffTable& table, double inv_g) {
  require(inv_g >= 0.0, "1/G must be nonnegative");
  const auto& g = table.inv_g;
  if (inv_g >= g.back()) return table.rows.back();
  const auto it = std::upper_bound(g.begin(), g.end(), inv_g);
  const std::size_t hi = static_cast<std::size_t>(it - g.begin());
  const std::size_t lo = hi - 1;
  const double t = (inv_g - g[lo]) / (g[hi] - g[lo]);
  std::array<double, 5> out{};
  for (int c = 0; c < 5; ++c) out[c] = (1.0 - t) * table.rows[lo][c] + t * table.rows[hi][c];
  return out;
}

std::array<int, 3> Discretization::shape() const {
  std::array<int, 3> s{1, 1, 1};
  for (int a = 0; a < dim; ++a) s[a] = axes[a].unknowns();
  return s;
}

std::array<int, 3> Discretization::cell_shape() const {
  std::array<int, 3> s{1, 1, 1};
  for (int a = 0; a < dim; ++a) s[a] = axes[a].cells();
  return s;
}

std::size_t Discretization::unknowns() const {
  const auto s = shape();
  return static_cast<std::size_t>(s[0]) * s[1] * s[2];
}

Discretization describe(Scheme scheme, const Mesh& mesh, const WaveModel& model, double scale) {
  validate(model, mesh);
  Discretization d;
  d.scheme = scheme;
  d.dim = mesh.dim;
  d.omega = model.omega;
  d.scale = scale;
  std::array<AxisProfile, 3> prof;
  for (int a = 0; a < mesh.dim; ++a) {
    const MeshAxis& ax = mesh.axes[a];
    prof[a] = axis_profile(ax, model.omega);
    DiscreteAxis& da = d.axes[a];
    da.width = ax.width;
    da.alpha_node = prof[a].alpha_node;
    da.alpha_mid = prof[a].alpha_mid;
    da.robin_lo = ax.lo.kind == LayerKind::Robin;
    da.robin_hi = ax.hi.kind == LayerKind::Robin;
  }
  if (scheme != Scheme::StandardFd) d.table = &opt_table(mesh.dim);

  const auto us = mesh.shape();
  const auto cs = mesh.cell_shape();
  d.k_node = model.k;
  d.k2_node.resize(model.k.size());
  for (int k = 0; k < us[2]; ++k) {
    for (int j = 0; j < us[1]; ++j) {
      for (int i = 0; i < us[0]; ++i) {
        const std::size_t n = linear_index(us, i, j, k);
        double gamma = prof[0].damping_node[i + 1];
        if (mesh.dim >= 2) gamma += prof[1].damping_node[j + 1];
        if (mesh.dim >= 3) gamma += prof[2].damping_node[k + 1];
        d.k2_node[n] = model.k[n] * model.k[n] * cplx(1.0, gamma);
      }
    }
  }
  d.k2_cell.resize(mesh.cell_count());
  for (int k = 0; k < cs[2]; ++k) {
    for (int j = 0; j < cs[1]; ++j) {
      for (int i = 0; i < cs[0]; ++i) {
        const std::size_t c = linear_index(cs, i, j, k);
        double kc;
        if (!model.k_cell.empty()) {
          kc = model.k_cell[c];
        } else {
          // Average of the cell's corner nodes, Dirichlet corners clamped inward.
          double sum = 0.0;
          int count = 0;
          for (int dz = 0; dz <= (mesh.dim >= 3 ? 1 : 0); ++dz) {
            for (int dy = 0; dy <= (mesh.dim >= 2 ? 1 : 0); ++dy) {
              for (int dx = 0; dx <= 1; ++dx) {
                const int ii = clamp_unknown(i + dx, us[0]);
                const int jj = mesh.dim >= 2 ? clamp_unknown(j + dy, us[1]) : 0;
                const int kk = mesh.dim >= 3 ? clamp_unknown(k + dz, us[2]) : 0;
                sum += model.k[linear_index(us, ii, jj, kk)];
                ++count;
              }
            }
          }
          kc = sum / count;
        }
        double gamma = prof[0].damping_mid[i];
        if (mesh.dim >= 2) gamma += prof[1].damping_mid[j];
        if (mesh.dim >= 3) gamma += prof[2].damping_mid[k];
        d.k2_cell[c] = kc * kc * cplx(1.0, gamma);
      }
    }
  }
  return d;
}

cplx outgoing_root(cplx k2h2) {
  // z^2 - b z + 1 = 0 with b = 2 - k^2 h^2; the two roots multiply to 1.
  const cplx b = 2.0 - k2h2;
  const cplx disc = std::sqrt(b * b - 4.0);
  cplx z1 = 0.5 * (b + disc), z2 = 0.5 * (b - disc);
  const double m1 = std::abs(z1), m2 = std::abs(z2);
  if (std::abs(m1 - m2) > 1e-12 * (m1 + m2)) return m1 < m2 ? z1 : z2;
  return z1.imag() > 0.0 ? z1 : z2;
}

namespace {

void check_discretization(const Discretization& d) {
  require(d.dim >= 1 && d.dim <= 3, "discretization dimension must be 1, 2 or 3");
  const std::size_t n = d.unknowns();
  require(d.k2_node.size() == n, "k^2 field does not match the unknown box");
  for (int a = 0; a < d.dim; ++a) {
    const auto& ax = d.axes[a];
    require(ax.cells() >= 2, "discretization axis needs at least two cells");
    require(static_cast<int>(ax.alpha_node.size()) == ax.cells() + 1 &&
                static_cast<int>(ax.alpha_mid.size()) == ax.cells(),
            "PML coefficients do not match the axis");
    for (double w : ax.width) require(w > 0.0, "cell widths must be positive");
  }
}

void assemble_standard_fd(const Discretization& d, StencilOperator& op) {
  const auto s = d.shape();
  for (int k = 0; k < s[2]; ++k) {
    for (int j = 0; j < s[1]; ++j) {
      for (int i = 0; i < s[0]; ++i) {
        const std::size_t n = linear_index(s, i, j, k);
        const std::array<int, 3> m{i + 1, j + 1, k + 1};
        cplx alpha_prod(1.0);
        for (int a = 0; a < d.dim; ++a) alpha_prod *= d.axes[a].alpha_node[m[a]];
        cplx diag = -d.k2_node[n] / alpha_prod;
        for (int l = 0; l < d.dim; ++l) {
          const DiscreteAxis& ax = d.axes[l];
          const int ml = m[l];
          const double hl = ax.width[ml - 1], hr = ax.width[ml];
          const double hn = 0.5 * (hl + hr);
          const cplx others = alpha_prod / ax.alpha_node[ml];
          const cplx cl = ax.alpha_mid[ml - 1] / (hl * hn * others);
          const cplx cr = ax.alpha_mid[ml] / (hr * hn * others);
          Offset lo, hi;
          (l == 0 ? lo.dx : l == 1 ? lo.dy : lo.dz) = -1;
          (l == 0 ? hi.dx : l == 1 ? hi.dy : hi.dz) = 1;
          op.add(n, StencilOperator::offset_index(lo), -cl);
          op.add(n, StencilOperator::offset_index(hi), -cr);
          diag += cl + cr;
          // One-way closure: the missing neighbour is z times this node.
          const int idx = l == 0 ? i : l == 1 ? j : k;
          if (ax.robin_lo && idx == 0) diag -= cl * outgoing_root(d.k2_node[n] * hl * hl);
          if (ax.robin_hi && idx == s[l] - 1) diag -= cr * outgoing_root(d.k2_node[n] * hr * hr);
        }
        op.add(n, StencilOperator::offset_index({0, 0, 0}), diag);
      }
    }
  }
}

std::array<double, 5> row_coeffs(const Discretization& d, std::size_t n, double h) {
  if (d.fixed_coeffs) return *d.fixed_coeffs;
  return opt_coeffs(*d.table, h * d.k_node[n] / kTwoPi);
}

// Weights of the identity discretizations by |offset|: mass (tilde M) and
// the (dim-1)-dimensional cross average (tilde N).
struct OptWeights {
  std::array<double, 4> mass{};
  std::array<double, 3> cross{};
};

OptWeights opt_weights(int dim, const std::array<double, 5>& c) {
  OptWeights w;
  if (dim == 3) {
    w.mass = {c[0], c[1] / 6.0, c[2] / 12.0, (1.0 - c[0] - c[1] - c[2]) / 8.0};
    w.cross = {c[3], c[4] / 4.0, (1.0 - c[3] - c[4]) / 4.0};
  } else {
    w.mass = {c[0], c[1] / 4.0, (1.0 - c[0] - c[1]) / 4.0, 0.0};
    w.cross = {c[2], (1.0 - c[2]) / 2.0, 0.0};
  }
  return w;
}

void assemble_optimized_fd(const Discretization& d, StencilOperator& op) {
  require(d.dim >= 2, "optimized finite differences need dimension 2 or 3");
  double h = d.axes[0].width.front();
  for (int a = 0; a < d.dim; ++a) {
    for (std::size_t c = 0; c < d.axes[a].width.size(); ++c) {
      require(std::abs(d.axes[a].width[c] - h) <= 1e-12 * h,
              "optimized finite differences need a uniform mesh");
      require(d.axes[a].alpha_mid[c] == cplx(1.0),
              "optimized finite differences do not support PML; use the finite-element coarse operator");
    }
    require(!d.axes[a].robin_lo && !d.axes[a].robin_hi,
            "optimized finite differences do not support one-way closures");
  }
  const double inv_h2 = 1.0 / (h * h);
  const auto s = d.shape();
  const int nz = d.dim >= 3 ? 1 : 0;
  for (int k = 0; k < s[2]; ++k) {
    for (int j = 0; j < s[1]; ++j) {
      for (int i = 0; i < s[0]; ++i) {
        const std::size_t n = linear_index(s, i, j, k);
        const OptWeights w = opt_weights(d.dim, row_coeffs(d, n, h));
        for (int dz = -nz; dz <= nz; ++dz) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const std::array<int, 3> off{dx, dy, dz};
              const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
              cplx v = -d.k2_node[n] * w.mass[order];
              for (int l = 0; l < d.dim; ++l) {
                const double d2 = (off[l] == 0 ? -2.0 : 1.0) * inv_h2;
                v -= d2 * w.cross[order - std::abs(off[l])];
              }
              op.add(n, StencilOperator::offset_index({dx, dy, dz}), v);
            }
          }
        }
      }
    }
  }
}

// Finite-element assembly with cellwise constant k^2 and alpha.
void assemble_finite_element(const Discretization& d, StencilOperator& op) {
  require(d.dim >= 2, "finite-element coarse operator needs dimension 2 or 3");
  require(d.k2_cell.size() ==
              static_cast<std::size_t>(d.cell_shape()[0]) * d.cell_shape()[1] * d.cell_shape()[2],
          "cell k^2 field does not match the discretization");
  const auto s = d.shape();
  const auto cs = d.cell_shape();
  const int nz = d.dim >= 3 ? 1 : 0;
  for (int k = 0; k < s[2]; ++k) {
    for (int j = 0; j < s[1]; ++j) {
      for (int i = 0; i < s[0]; ++i) {
        const std::size_t n = linear_index(s, i, j, k);
        const std::array<int, 3> m{i + 1, j + 1, k + 1};
        double h_node = 0.0;
        for (int a = 0; a < d.dim; ++a) {
          h_node = std::max({h_node, d.axes[a].width[m[a] - 1], d.axes[a].width[m[a]]});
        }
        const auto c = row_coeffs(d, n, h_node);
        std::array<double, 4> I{};
        std::array<double, 3> J{};
        if (d.dim == 3) {
          I = {c[0] / 8.0, c[1] / 24.0, c[2] / 24.0, (1.0 - c[0] - c[1] - c[2]) / 8.0};
          J = {c[3] / 4.0, c[4] / 8.0, (1.0 - c[3] - c[4]) / 4.0};
        } else {
          I = {c[0] / 4.0, c[1] / 8.0, (1.0 - c[0] - c[1]) / 4.0, 0.0};
          J = {c[2] / 2.0, (1.0 - c[2]) / 2.0, 0.0};
        }
        for (int dz = -nz; dz <= nz; ++dz) {
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const std::array<int, 3> off{dx, dy, dz};
              // Cells adjacent to both the row node and the column node, per axis.
              std::array<std::array<int, 2>, 3> cells{};
              std::array<int, 3> ncell{1, 1, 1};
              for (int a = 0; a < 3; ++a) {
                if (a >= d.dim) {
                  cells[a] = {0, 0};
                  continue;
                }
                if (off[a] == -1) {
                  cells[a] = {m[a] - 1, 0};
                } else if (off[a] == 1) {
                  cells[a] = {m[a], 0};
                } else {
                  cells[a] = {m[a] - 1, m[a]};
                  ncell[a] = 2;
                }
              }
              const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
              cplx mass(0.0);
              for (int cz = 0; cz < ncell[2]; ++cz) {
                for (int cy = 0; cy < ncell[1]; ++cy) {
                  for (int cx = 0; cx < ncell[0]; ++cx) {
                    const std::array<int, 3> cc{cells[0][cx], cells[1][cy], cells[2][cz]};
                    cplx w = d.k2_cell[linear_index(cs, cc[0], cc[1], cc[2])];
                    for (int a = 0; a < d.dim; ++a) {
                      w *= d.axes[a].width[cc[a]] / d.axes[a].alpha_mid[cc[a]];
                    }
                    mass += w;
                  }
                }
              }
              cplx v = -I[order] * mass;
              for (int l = 0; l < d.dim; ++l) {
                const DiscreteAxis& ax = d.axes[l];
                const cplx left = ax.alpha_mid[m[l] - 1] / ax.width[m[l] - 1];
                const cplx right = ax.alpha_mid[m[l]] / ax.width[m[l]];
                const cplx d2 = off[l] == -1 ? left : off[l] == 1 ? right : -(left + right);
                // Cross mass over the remaining axes.
                cplx cross(0.0);
                const int o1 = (l + 1) % 3, o2 = (l + 2) % 3;
                for (int c2 = 0; c2 < ncell[o2]; ++c2) {
                  for (int c1 = 0; c1 < ncell[o1]; ++c1) {
                    cplx w(1.0);
                    if (o1 < d.dim) {
                      const int ci = cells[o1][c1];
                      w *= d.axes[o1].width[ci] / d.axes[o1].alpha_mid[ci];
                    }
                    if (o2 < d.dim) {
                      const int ci = cells[o2][c2];
                      w *= d.axes[o2].width[ci] / d.axes[o2].alpha_mid[ci];
                    }
                    cross += w;
                  }
                }
                v -= d2 * J[order - std::abs(off[l])] * cross;
              }
              op.add(n, StencilOperator::offset_index({dx, dy, dz}), v);
            }
          }
        }
      }
    }
  }
}

}  // namespace

StencilOperator assemble(const Discretization& d) {
  check_discretization(d);
  StencilOperator op(d.dim, d.shape());
  switch (d.scheme) {
    case Scheme::StandardFd:
      assemble_standard_fd(d, op);
      break;
    case Scheme::OptimizedFd:
      require(d.table || d.fixed_coeffs, "optimized scheme needs a coefficient table");
      assemble_optimized_fd(d, op);
      break;
    case Scheme::FiniteElement:
      require(d.table || d.fixed_coeffs, "finite-element scheme needs a coefficient table");
      assemble_finite_element(d, op);
      break;
  }
  op.clip_to_box();
  if (d.scale != 1.0) op.scale(d.scale);
  op.compact();
  return op;
}

CVector fd_rhs_weights(const Discretization& d) {
  const auto s = d.shape();
  CVector w(d.unknowns());
  for (int k = 0; k < s[2]; ++k) {
    for (int j = 0; j < s[1]; ++j) {
      for (int i = 0; i < s[0]; ++i) {
        const std::array<int, 3> m{i + 1, j + 1, k + 1};
        cplx prod(1.0);
        for (int a = 0; a < d.dim; ++a) prod *= d.axes[a].alpha_node[m[a]];
        w[linear_index(s, i, j, k)] = d.scale / prod;
      }
    }
  }
  return w;
}

StencilOperator assemble_fine(const Mesh& mesh, const WaveModel& model, double scale) {
  return assemble(describe(Scheme::StandardFd, mesh, model, scale));
}

StencilOperator assemble_sponge(const Mesh& mesh, const WaveModel& model, double scale) {
  bool any = false;
  for (int a = 0; a < mesh.dim; ++a) {
    any = any || mesh.axes[a].lo.kind == LayerKind::Sponge || mesh.axes[a].hi.kind == LayerKind::Sponge;
  }
  require(any, "assemble_sponge called on a mesh without sponge layers");
  return assemble(describe(Scheme::StandardFd, mesh, model, scale));
}

StencilOperator assemble_opt_fd_coarse(const Mesh& mesh, const WaveModel& model, double scale,
                                       std::optional<std::array<double, 5>> coeffs) {
  for (int a = 0; a < mesh.dim; ++a) {
    require(mesh.axes[a].lo.kind != LayerKind::Pml && mesh.axes[a].hi.kind != LayerKind::Pml,
            "optimized finite differences do not support PML; use assemble_fe_pml_coarse");
  }
  Discretization d = describe(Scheme::OptimizedFd, mesh, model, scale);
  d.fixed_coeffs = coeffs;
  return assemble(d);
}

StencilOperator assemble_fe_pml_coarse(const Mesh& mesh, const CoarseningMap& map,
                                       const WaveModel& model,
                                       std::optional<std::array<double, 5>> coeffs) {
  require(map.dim == mesh.dim, "coarsening map does not match the mesh");
  for (int a = 0; a < mesh.dim; ++a) {
    require(static_cast<int>(map.axes[a].refined.size()) == mesh.axes[a].cells(),
            "coarsening map does not match the mesh");
  }
  Discretization d = describe(Scheme::FiniteElement, mesh, model, 1.0);
  d.fixed_coeffs = coeffs;
  return assemble(d);
}

WaveModel coarsen_wavenumber(const Mesh& fine, const WaveModel& fm, const CoarseMesh& coarse) {
  validate(fm, fine);
  const Mesh& cm = coarse.mesh;
  const auto fs = fine.shape();
  const auto cs = cm.shape();
  const auto ccs = cm.cell_shape();
  const int dim = fine.dim;

  // 1-D weight lists (fine unknown index, weight) per coarse node / cell.
  using Weights = std::vector<std::pair<int, double>>;
  std::array<std::vector<Weights>, 3> node_w, cell_w;
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      node_w[a] = {Weights{{0, 1.0}}};
      cell_w[a] = {Weights{{0, 1.0}}};
      continue;
    }
    const auto& map = coarse.map.axes[a];
    const int nf = fs[a];
    for (int ic = 1; ic < cm.axes[a].cells(); ++ic) {
      const int f = map.fine_point[ic];
      node_w[a].push_back({{clamp_unknown(f - 1, nf), 0.25},
                           {clamp_unknown(f, nf), 0.5},
                           {clamp_unknown(f + 1, nf), 0.25}});
    }
    for (int c = 0; c < cm.axes[a].cells(); ++c) {
      const int f = map.fine_point[c];
      if (map.refined[c]) {
        cell_w[a].push_back({{clamp_unknown(f, nf), 0.25},
                             {clamp_unknown(f + 1, nf), 0.5},
                             {clamp_unknown(f + 2, nf), 0.25}});
      } else {
        cell_w[a].push_back({{clamp_unknown(f, nf), 0.5}, {clamp_unknown(f + 1, nf), 0.5}});
      }
    }
  }
  auto average = [&](const Weights& wx, const Weights& wy, const Weights& wz) {
    double s = 0.0;
    for (auto [kz, az] : wz) {
      for (auto [ky, ay] : wy) {
        for (auto [kx, ax] : wx) s += ax * ay * az * fm.k[linear_index(fs, kx, ky, kz)];
      }
    }
    return s;
  };
  WaveModel out;
  out.omega = fm.omega;
  out.k.resize(cm.unknowns());
  for (int k = 0; k < cs[2]; ++k) {
    for (int j = 0; j < cs[1]; ++j) {
      for (int i = 0; i < cs[0]; ++i) {
        out.k[linear_index(cs, i, j, k)] = average(node_w[0][i], node_w[1][j], node_w[2][k]);
      }
    }
  }
  out.k_cell.resize(cm.cell_count());
  for (int k = 0; k < ccs[2]; ++k) {
    for (int j = 0; j < ccs[1]; ++j) {
      for (int i = 0; i < ccs[0]; ++i) {
        out.k_cell[linear_index(ccs, i, j, k)] = average(cell_w[0][i], cell_w[1][j], cell_w[2][k]);
      }
    }
  }
  return out;
}

}  // namespace helmsweep
