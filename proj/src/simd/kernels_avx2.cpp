// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include <immintrin.h>

#include "helmsweep/simd/kernels.hpp"

namespace helmsweep::simd {
namespace {

// Two complex values per register: [r0 i0 r1 i1].
inline __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
inline void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}

// a * b for packed complex pairs.
inline __m256d cmul(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_permute_pd(b, 0xF);
  const __m256d a_swap = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_swap, b_im));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void mul_acc_avx2(cplx* y, const cplx* c, const cplx* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p0 = cmul(load2(c + i), load2(x + i));
    const __m256d p1 = cmul(load2(c + i + 2), load2(x + i + 2));
    store2(y + i, _mm256_add_pd(load2(y + i), p0));
    store2(y + i + 2, _mm256_add_pd(load2(y + i + 2), p1));
  }
  for (; i + 2 <= n; i += 2) {
    store2(y + i, _mm256_add_pd(load2(y + i), cmul(load2(c + i), load2(x + i))));
  }
  for (; i < n; ++i) {
    const double cr = c[i].real(), ci = c[i].imag();
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + cr * xr - ci * xi, y[i].imag() + cr * xi + ci * xr};
  }
}

void axpy_avx2(cplx* y, cplx a, const cplx* x, std::size_t n) {
  const __m256d a_re = _mm256_set1_pd(a.real());
  const __m256d a_im = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  // y + a*x = y + x*a_re +- swap(x)*a_im
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = load2(x + i);
    const __m256d t = _mm256_mul_pd(_mm256_permute_pd(xv, 0x5), a_im);
    const __m256d p = _mm256_fmaddsub_pd(xv, a_re, t);
    store2(y + i, _mm256_add_pd(load2(y + i), p));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + a.real() * xr - a.imag() * xi,
            y[i].imag() + a.real() * xi + a.imag() * xr};
  }
}

// acc_d collects [xr*yr, xi*yi], acc_x collects [xr*yi, xi*yr].
inline void dot_accumulate(const cplx* x, const cplx* y, std::size_t n,
                           __m256d& acc_d, __m256d& acc_x, std::size_t& i) {
  __m256d d0 = _mm256_setzero_pd(), d1 = _mm256_setzero_pd();
  __m256d x0 = _mm256_setzero_pd(), x1 = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(x + i), b0 = load2(y + i);
    const __m256d a1 = load2(x + i + 2), b1 = load2(y + i + 2);
    d0 = _mm256_fmadd_pd(a0, b0, d0);
    d1 = _mm256_fmadd_pd(a1, b1, d1);
    x0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0x5), x0);
    x1 = _mm256_fmadd_pd(a1, _mm256_permute_pd(b1, 0x5), x1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(x + i), b0 = load2(y + i);
    d0 = _mm256_fmadd_pd(a0, b0, d0);
    x0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0x5), x0);
  }
  acc_d = _mm256_add_pd(d0, d1);
  acc_x = _mm256_add_pd(x0, x1);
}

// Lane sums split by parity: (even lanes, odd lanes).
inline void parity_sums(__m256d v, double& even, double& odd) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  even = t[0] + t[2];
  odd = t[1] + t[3];
}

cplx dotc_avx2(const cplx* x, const cplx* y, std::size_t n) {
  __m256d acc_d, acc_x;
  std::size_t i = 0;
  dot_accumulate(x, y, n, acc_d, acc_x, i);
  double re = hsum(acc_d);
  double xe, xo;
  parity_sums(acc_x, xe, xo);
  double im = xe - xo;
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

cplx dotu_avx2(const cplx* x, const cplx* y, std::size_t n) {
  __m256d acc_d, acc_x;
  std::size_t i = 0;
  dot_accumulate(x, y, n, acc_d, acc_x, i);
  double de, dd, xe, xo;
  parity_sums(acc_d, de, dd);
  parity_sums(acc_x, xe, xo);
  double re = de - dd;
  double im = xe + xo;
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
  }
  return {re, im};
}

double norm_sq_avx2(const cplx* x, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(x + i), a1 = load2(x + i + 2);
    s0 = _mm256_fmadd_pd(a0, a0, s0);
    s1 = _mm256_fmadd_pd(a1, a1, s1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(x + i);
    s0 = _mm256_fmadd_pd(a0, a0, s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

}  // namespace

namespace detail {
const KernelTable kAvx2Kernels{Isa::Avx2, mul_acc_avx2, axpy_avx2,
                               dotc_avx2, dotu_avx2,    norm_sq_avx2};
}  // namespace detail

}  // namespace helmsweep::simd
