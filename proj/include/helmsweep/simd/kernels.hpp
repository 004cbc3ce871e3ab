#pragma once

// Complex double-precision inner-loop kernels with a scalar reference
// implementation and an AVX2/FMA variant selected at runtime.
//
// All pointers address interleaved (re, im) pairs, i.e. std::complex<double>.
// Kernels never allocate and never throw.

#include <cstddef>
#include <string_view>

#include "helmsweep/types.hpp"

namespace helmsweep::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  // y[i] += c[i] * x[i]
  void (*mul_acc)(cplx* y, const cplx* c, const cplx* x, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(cplx* y, cplx a, const cplx* x, std::size_t n);
  // sum conj(x[i]) * y[i]
  cplx (*dotc)(const cplx* x, const cplx* y, std::size_t n);
  // sum x[i] * y[i]  (no conjugation)
  cplx (*dotu)(const cplx* x, const cplx* y, std::size_t n);
  // sum |x[i]|^2
  double (*norm_sq)(const cplx* x, std::size_t n);
};

/// Kernels of the currently active instruction set.
const KernelTable& kernels();

/// Kernels of a specific instruction set. Throws InvalidArgument when the
/// CPU (or the build) does not support it.
const KernelTable& kernels(Isa isa);

bool isa_supported(Isa isa);
Isa active_isa();

/// Overrides the runtime choice. The initial choice is the best supported
/// ISA, unless HELMSWEEP_SIMD=scalar|avx2 is set in the environment.
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(HELMSWEEP_HAVE_AVX2)
extern const KernelTable kAvx2Kernels;
#endif
}  // namespace detail

}  // namespace helmsweep::simd
