#include "helmsweep/stencil.hpp"

#include <algorithm>

#include "helmsweep/simd/kernels.hpp"

namespace helmsweep {

StencilOperator::StencilOperator(int dim, const std::array<int, 3>& shape)
    : dim_(dim), shape_(shape) {
  require(dim >= 1 && dim <= 3, "stencil dimension must be 1, 2 or 3");
  for (int a = dim; a < 3; ++a) shape_[a] = 1;
  for (int a = 0; a < 3; ++a) require(shape_[a] >= 1, "stencil shape must be positive");
  size_ = static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2];
  planes_.resize(27);
}

cplx* StencilOperator::plane(int offset) {
  require(offset >= 0 && offset < 27, "stencil offset out of range");
  const Offset o = offset_of(offset);
  require((dim_ >= 2 || o.dy == 0) && (dim_ >= 3 || o.dz == 0),
          "stencil offset exceeds operator dimension");
  if (planes_[offset].empty()) planes_[offset].assign(size_, cplx(0.0));
  return planes_[offset].data();
}

const cplx* StencilOperator::plane_or_null(int offset) const {
  return planes_[offset].empty() ? nullptr : planes_[offset].data();
}

cplx StencilOperator::coeff(std::size_t node, int offset) const {
  const cplx* p = plane_or_null(offset);
  return p ? p[node] : cplx(0.0);
}

std::vector<std::pair<std::size_t, cplx>> StencilOperator::row(std::size_t node) const {
  const int nx = shape_[0], ny = shape_[1], nz = shape_[2];
  const int i = static_cast<int>(node % nx);
  const int j = static_cast<int>((node / nx) % ny);
  const int k = static_cast<int>(node / (static_cast<std::size_t>(nx) * ny));
  std::vector<std::pair<std::size_t, cplx>> out;
  // Offsets enumerate dz, dy, dx lexicographically, which is column order.
  for (int o = 0; o < 27; ++o) {
    const cplx* p = plane_or_null(o);
    if (!p || p[node] == cplx(0.0)) continue;
    const Offset d = offset_of(o);
    const int ii = i + d.dx, jj = j + d.dy, kk = k + d.dz;
    if (ii < 0 || ii >= nx || jj < 0 || jj >= ny || kk < 0 || kk >= nz) continue;
    out.emplace_back(static_cast<std::size_t>(ii) +
                         static_cast<std::size_t>(nx) * (jj + static_cast<std::size_t>(ny) * kk),
                     p[node]);
  }
  return out;
}

void StencilOperator::apply(const cplx* x, cplx* y) const {
  std::fill(y, y + size_, cplx(0.0));
  const auto& K = simd::kernels();
  const int nx = shape_[0], ny = shape_[1], nz = shape_[2];
  for (int o = 0; o < 27; ++o) {
    const cplx* p = plane_or_null(o);
    if (!p) continue;
    const Offset d = offset_of(o);
    const int i0 = std::max(0, -d.dx);
    const int i1 = std::min(nx, nx - d.dx);
    if (i1 <= i0) continue;
    const std::size_t len = static_cast<std::size_t>(i1 - i0);
    const int j0 = std::max(0, -d.dy), j1 = std::min(ny, ny - d.dy);
    const int k0 = std::max(0, -d.dz), k1 = std::min(nz, nz - d.dz);
    for (int k = k0; k < k1; ++k) {
      for (int j = j0; j < j1; ++j) {
        const std::size_t line = static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k);
        const std::size_t src = static_cast<std::size_t>(nx) *
                                (j + d.dy + static_cast<std::size_t>(ny) * (k + d.dz));
        K.mul_acc(y + line + i0, p + line + i0, x + src + i0 + d.dx, len);
      }
    }
  }
}

CVector StencilOperator::apply(const CVector& x) const {
  require(x.size() == size_, "stencil apply: vector size mismatch");
  CVector y(size_);
  apply(x.data(), y.data());
  return y;
}

void StencilOperator::residual(const cplx* f, const cplx* x, cplx* r) const {
  apply(x, r);
  for (std::size_t n = 0; n < size_; ++n) r[n] = f[n] - r[n];
}

void StencilOperator::clip_to_box() {
  const int nx = shape_[0], ny = shape_[1], nz = shape_[2];
  for (int o = 0; o < 27; ++o) {
    if (planes_[o].empty()) continue;
    cplx* p = planes_[o].data();
    const Offset d = offset_of(o);
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < ny; ++j) {
        const bool line_out = j + d.dy < 0 || j + d.dy >= ny || k + d.dz < 0 || k + d.dz >= nz;
        cplx* row = p + static_cast<std::size_t>(nx) * (j + static_cast<std::size_t>(ny) * k);
        if (line_out) {
          std::fill(row, row + nx, cplx(0.0));
        } else if (d.dx == -1) {
          row[0] = 0.0;
        } else if (d.dx == 1) {
          row[nx - 1] = 0.0;
        }
      }
    }
  }
}

void StencilOperator::compact() {
  for (auto& p : planes_) {
    if (!p.empty() && std::all_of(p.begin(), p.end(), [](cplx v) { return v == cplx(0.0); })) {
      CVector().swap(p);
    }
  }
}

void StencilOperator::scale(cplx s) {
  for (auto& p : planes_) {
    for (auto& v : p) v *= s;
  }
}

CVector StencilOperator::diagonal() const {
  const cplx* p = plane_or_null(offset_index({0, 0, 0}));
  return p ? CVector(p, p + size_) : CVector(size_, cplx(0.0));
}

void StencilOperator::apply_x_coupling(int x_row, int dx, const cplx* in, cplx* out, cplx s) const {
  const int nx = shape_[0], ny = shape_[1], nz = shape_[2];
  require(x_row >= 0 && x_row < nx, "coupling row outside the operator");
  for (int dz = (dim_ >= 3 ? -1 : 0); dz <= (dim_ >= 3 ? 1 : 0); ++dz) {
    for (int dy = (dim_ >= 2 ? -1 : 0); dy <= (dim_ >= 2 ? 1 : 0); ++dy) {
      const cplx* p = plane_or_null(offset_index({dx, dy, dz}));
      if (!p) continue;
      for (int k = std::max(0, -dz); k < std::min(nz, nz - dz); ++k) {
        for (int j = std::max(0, -dy); j < std::min(ny, ny - dy); ++j) {
          const std::size_t c = static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * k;
          const std::size_t cs = static_cast<std::size_t>(j + dy) + static_cast<std::size_t>(ny) * (k + dz);
          const std::size_t node = static_cast<std::size_t>(x_row) + static_cast<std::size_t>(nx) * c;
          out[c] += s * p[node] * in[cs];
        }
      }
    }
  }
}

}  // namespace helmsweep
