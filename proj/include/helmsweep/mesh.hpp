#pragma once

// Rectilinear meshes with absorbing layers added outside the physical box,
// and the coarsening used by the two-grid method (no coarsening inside PML).
//
// Node i of an axis sits at the left end of cell i + 1/2. Nodes 0 and
// cells() are Dirichlet boundary nodes, so an axis carries cells() - 1
// unknowns. The physical box starts at the first node after the low-side
// layer; coordinates are measured from there.

#include <array>
#include <cstddef>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

enum class LayerKind { None, Pml, Sponge, Robin };

// Robin is a discrete one-way closure applied at the outermost unknown; it
// adds no cells and is meant for one-dimensional reference problems.
struct AbsorbingLayerSpec {
  LayerKind kind = LayerKind::None;
  int width = 0;          // cells
  double strength = 0.0;  // S_pml for PML, gamma_max for sponge
  double ref_speed = 1.0;

  static AbsorbingLayerSpec none() { return {}; }
  static AbsorbingLayerSpec pml(int width, double strength, double ref_speed = 1.0);
  // Strength 15, 20, 25 for widths 3, 4, 5 (5 per cell).
  static AbsorbingLayerSpec pml(int width);
  static AbsorbingLayerSpec sponge(int width = 36, double gamma_max = 1.0);
  static AbsorbingLayerSpec robin();

  int cells() const { return kind == LayerKind::Pml || kind == LayerKind::Sponge ? width : 0; }
};

double default_pml_strength(int width);
void validate(const AbsorbingLayerSpec& spec);

struct AxisLayers {
  AbsorbingLayerSpec lo, hi;
};

struct MeshAxis {
  std::vector<double> width;  // per cell
  AbsorbingLayerSpec lo, hi;

  int cells() const { return static_cast<int>(width.size()); }
  int unknowns() const { return cells() - 1; }
  double length() const;
  // Length of the low-side layer; node coordinates are offset by it.
  double lo_thickness() const;
  double hi_thickness() const;
  // Coordinate of node i relative to the start of the physical box.
  double node_x(int i) const;
  double mid_x(int cell) const { return node_x(cell) + 0.5 * width[cell]; }
  // Depth into the low/high layer (0 in the physical box).
  double depth_lo(double x) const;
  double depth_hi(double x) const;
};

struct Mesh {
  int dim = 2;
  std::array<MeshAxis, 3> axes;
  int level = 0;

  // Unknown counts per axis; unused axes report 1.
  std::array<int, 3> shape() const;
  std::size_t unknowns() const;
  // Cell counts per axis; unused axes report 1.
  std::array<int, 3> cell_shape() const;
  std::size_t cell_count() const;
  bool uniform(double* h = nullptr) const;
};

Mesh build_mesh(int dim, const std::vector<int>& interior_cells, double h,
                const std::vector<AxisLayers>& layers);
// Same interior size and layer on every side of every axis.
Mesh build_mesh(int dim, int interior_cells, double h, const AbsorbingLayerSpec& layer);

struct AxisCoarsening {
  std::vector<int> fine_point;  // per coarse node
  std::vector<bool> refined;    // per coarse cell
};

struct CoarseningMap {
  int dim = 2;
  std::array<AxisCoarsening, 3> axes;
};

struct CoarseMesh {
  Mesh mesh;
  CoarseningMap map;
};

// PML cells keep their width; every other cell (physical box and sponge)
// is merged pairwise. Throws when an axis has an odd coarsenable run.
CoarseMesh coarsen_mesh(const Mesh& fine);

// Linear index of an unknown, x fastest.
inline std::size_t linear_index(const std::array<int, 3>& shape, int i, int j, int k) {
  return static_cast<std::size_t>(i) +
         static_cast<std::size_t>(shape[0]) *
             (static_cast<std::size_t>(j) + static_cast<std::size_t>(shape[1]) * k);
}

}  // namespace helmsweep
