#include "helmsweep/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace helmsweep {

namespace {

const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }

}  // namespace

double default_pml_strength(int width) { return 5.0 * width; }

AbsorbingLayerSpec AbsorbingLayerSpec::pml(int width, double strength, double ref_speed) {
  return {LayerKind::Pml, width, strength, ref_speed};
}

AbsorbingLayerSpec AbsorbingLayerSpec::pml(int width) {
  return pml(width, default_pml_strength(width));
}

AbsorbingLayerSpec AbsorbingLayerSpec::sponge(int width, double gamma_max) {
  return {LayerKind::Sponge, width, gamma_max, 1.0};
}

AbsorbingLayerSpec AbsorbingLayerSpec::robin() { return {LayerKind::Robin, 0, 0.0, 1.0}; }

void validate(const AbsorbingLayerSpec& spec) {
  if (spec.kind == LayerKind::Pml || spec.kind == LayerKind::Sponge) {
    require(spec.width >= 1, "absorbing layer width must be at least one cell");
    require(spec.strength > 0.0, "absorbing layer strength must be positive");
    require(spec.ref_speed > 0.0, "absorbing layer reference speed must be positive");
  }
}

double MeshAxis::length() const { return std::accumulate(width.begin(), width.end(), 0.0); }

double MeshAxis::lo_thickness() const {
  return std::accumulate(width.begin(), width.begin() + lo.cells(), 0.0);
}

double MeshAxis::hi_thickness() const {
  return std::accumulate(width.end() - hi.cells(), width.end(), 0.0);
}

double MeshAxis::node_x(int i) const {
  double x = -lo_thickness();
  for (int c = 0; c < i; ++c) x += width[c];
  return x;
}

double MeshAxis::depth_lo(double x) const { return std::max(0.0, -x); }

double MeshAxis::depth_hi(double x) const {
  const double box = length() - lo_thickness() - hi_thickness();
  return std::max(0.0, x - box);
}

std::array<int, 3> Mesh::shape() const {
  std::array<int, 3> s{1, 1, 1};
  for (int a = 0; a < dim; ++a) s[a] = axes[a].unknowns();
  return s;
}

std::size_t Mesh::unknowns() const {
  const auto s = shape();
  return static_cast<std::size_t>(s[0]) * s[1] * s[2];
}

std::array<int, 3> Mesh::cell_shape() const {
  std::array<int, 3> s{1, 1, 1};
  for (int a = 0; a < dim; ++a) s[a] = axes[a].cells();
  return s;
}

std::size_t Mesh::cell_count() const {
  const auto s = cell_shape();
  return static_cast<std::size_t>(s[0]) * s[1] * s[2];
}

bool Mesh::uniform(double* h) const {
  const double h0 = axes[0].width.front();
  for (int a = 0; a < dim; ++a) {
    for (double w : axes[a].width) {
      if (std::abs(w - h0) > 1e-12 * h0) return false;
    }
  }
  if (h) *h = h0;
  return true;
}

Mesh build_mesh(int dim, const std::vector<int>& interior_cells, double h,
                const std::vector<AxisLayers>& layers) {
  require(dim >= 1 && dim <= 3, "mesh dimension must be 1, 2 or 3");
  require(h > 0.0 && std::isfinite(h), "mesh spacing must be positive");
  require(static_cast<int>(interior_cells.size()) == dim, "one interior cell count per axis");
  require(static_cast<int>(layers.size()) == dim, "one layer pair per axis");
  Mesh mesh;
  mesh.dim = dim;
  for (int a = 0; a < dim; ++a) {
    require(interior_cells[a] >= 2,
            std::string("axis ") + axis_name(a) + " needs at least 2 interior cells");
    validate(layers[a].lo);
    validate(layers[a].hi);
    MeshAxis& ax = mesh.axes[a];
    ax.lo = layers[a].lo;
    ax.hi = layers[a].hi;
    const int n = interior_cells[a] + ax.lo.cells() + ax.hi.cells();
    ax.width.assign(n, h);
  }
  return mesh;
}

Mesh build_mesh(int dim, int interior_cells, double h, const AbsorbingLayerSpec& layer) {
  return build_mesh(dim, std::vector<int>(dim, interior_cells), h,
                    std::vector<AxisLayers>(dim, AxisLayers{layer, layer}));
}

namespace {

AbsorbingLayerSpec coarse_layer(const AbsorbingLayerSpec& s) {
  AbsorbingLayerSpec c = s;
  if (s.kind == LayerKind::Sponge) c.width = s.width / 2;
  return c;
}

void coarsen_axis(const MeshAxis& fine, int axis, MeshAxis& coarse, AxisCoarsening& map) {
  const int n = fine.cells();
  const int lo_keep = fine.lo.kind == LayerKind::Pml ? fine.lo.width : 0;
  const int hi_keep = fine.hi.kind == LayerKind::Pml ? fine.hi.width : 0;
  const int lo_sponge = fine.lo.kind == LayerKind::Sponge ? fine.lo.width : 0;
  const int hi_sponge = fine.hi.kind == LayerKind::Sponge ? fine.hi.width : 0;
  const int interior = n - fine.lo.cells() - fine.hi.cells();
  auto even = [&](int count, const char* what) {
    if (count % 2 != 0) {
      throw InvalidArgument(std::string("cannot coarsen axis ") + axis_name(axis) + ": " + what +
                            " has an odd number of cells (" + std::to_string(count) + ")");
    }
  };
  even(interior, "interior");
  even(lo_sponge, "low-side sponge layer");
  even(hi_sponge, "high-side sponge layer");

  coarse.lo = coarse_layer(fine.lo);
  coarse.hi = coarse_layer(fine.hi);
  coarse.width.clear();
  map.fine_point.assign(1, 0);
  map.refined.clear();
  int f = 0;
  while (f < n) {
    const bool keep = f < lo_keep || f >= n - hi_keep;
    if (keep) {
      coarse.width.push_back(fine.width[f]);
      map.refined.push_back(false);
      f += 1;
    } else {
      coarse.width.push_back(fine.width[f] + fine.width[f + 1]);
      map.refined.push_back(true);
      f += 2;
    }
    map.fine_point.push_back(f);
  }
}

}  // namespace

CoarseMesh coarsen_mesh(const Mesh& fine) {
  CoarseMesh out;
  out.mesh.dim = fine.dim;
  out.mesh.level = fine.level + 1;
  out.map.dim = fine.dim;
  for (int a = 0; a < fine.dim; ++a) {
    coarsen_axis(fine.axes[a], a, out.mesh.axes[a], out.map.axes[a]);
    require(out.mesh.axes[a].cells() >= 2, "coarse mesh axis too small");
  }
  return out;
}

}  // namespace helmsweep
