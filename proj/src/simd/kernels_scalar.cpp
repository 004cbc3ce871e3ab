#include "helmsweep/simd/kernels.hpp"

// Reference kernels. Complex products are written out in real arithmetic so
// the compiler does not emit the Annex G NaN-recovery path of operator*.

namespace helmsweep::simd {
namespace {

void mul_acc_scalar(cplx* y, const cplx* c, const cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double cr = c[i].real(), ci = c[i].imag();
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + cr * xr - ci * xi, y[i].imag() + cr * xi + ci * xr};
  }
}

void axpy_scalar(cplx* y, cplx a, const cplx* x, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
  }
}

cplx dotc_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

cplx dotu_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr - xi * yi;
    im += xr * yi + xi * yr;
  }
  return {re, im};
}

double norm_sq_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  }
  return s;
}

}  // namespace

namespace detail {
const KernelTable kScalarKernels{Isa::Scalar, mul_acc_scalar, axpy_scalar,
                                 dotc_scalar, dotu_scalar,    norm_sq_scalar};
}  // namespace detail

}  // namespace helmsweep::simd
