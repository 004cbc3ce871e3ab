#pragma once

// Compact-stencil operator on a box of unknowns (x fastest). Coefficients
// are stored as one plane per stencil offset, so apply() streams each plane
// along x-lines with the SIMD multiply-accumulate kernel.

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "helmsweep/types.hpp"

namespace helmsweep {

struct Offset {
  int dx = 0, dy = 0, dz = 0;
};

class StencilOperator {
 public:
  StencilOperator() = default;
  StencilOperator(int dim, const std::array<int, 3>& shape);

  int dim() const { return dim_; }
  const std::array<int, 3>& shape() const { return shape_; }
  std::size_t size() const { return size_; }
  static constexpr int offset_count(int dim) { return dim == 1 ? 3 : dim == 2 ? 9 : 27; }
  int offset_count() const { return offset_count(dim_); }
  static int offset_index(const Offset& o) { return (o.dx + 1) + 3 * (o.dy + 1) + 9 * (o.dz + 1); }
  static Offset offset_of(int index) { return {index % 3 - 1, (index / 3) % 3 - 1, index / 9 - 1}; }

  // Coefficient plane for an offset; allocated (zero) on first mutable access.
  cplx* plane(int offset);
  const cplx* plane_or_null(int offset) const;
  bool active(int offset) const { return !planes_[offset].empty(); }

  cplx coeff(std::size_t node, int offset) const;
  void set(std::size_t node, int offset, cplx v) { plane(offset)[node] = v; }
  void add(std::size_t node, int offset, cplx v) { plane(offset)[node] += v; }

  // Row `node` as (column, value) pairs, columns ascending, skipping zeros.
  std::vector<std::pair<std::size_t, cplx>> row(std::size_t node) const;

  void apply(const cplx* x, cplx* y) const;
  CVector apply(const CVector& x) const;
  // y -= A x, the usual residual update.
  void residual(const cplx* f, const cplx* x, cplx* r) const;

  // Zeroes every coefficient that points outside the box.
  void clip_to_box();
  // Drops planes whose entries are all zero.
  void compact();
  void scale(cplx s);
  // Diagonal entries as a vector.
  CVector diagonal() const;

  // Accumulates out[c] += s * sum_{dy,dz} A(row=(x_row, c), offset (dx,dy,dz)) in[c+(dy,dz)]
  // over the cross-section c of an x-layer. Used by interface transmission.
  void apply_x_coupling(int x_row, int dx, const cplx* in, cplx* out, cplx s) const;

 private:
  int dim_ = 0;
  std::array<int, 3> shape_{1, 1, 1};
  std::size_t size_ = 0;
  std::vector<CVector> planes_;
};

}  // namespace helmsweep
