#include "helmsweep/sparselin.hpp"

#include <suitesparse/umfpack.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "helmsweep/simd/kernels.hpp"

namespace helmsweep {

void CsrMatrix::multiply(const cplx* x, cplx* y) const {
  for (std::size_t r = 0; r < n; ++r) {
    cplx s(0.0);
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) s += val[p] * x[col[p]];
    y[r] = s;
  }
}

CVector CsrMatrix::multiply(const CVector& x) const {
  require(x.size() == n, "CSR multiply: vector size mismatch");
  CVector y(n);
  multiply(x.data(), y.data());
  return y;
}

std::pair<std::size_t, std::size_t> CsrMatrix::bandwidth() const {
  std::size_t lo = 0, hi = 0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      if (col[p] < r) lo = std::max(lo, r - col[p]);
      if (col[p] > r) hi = std::max(hi, col[p] - r);
    }
  }
  return {lo, hi};
}

CsrMatrix to_csr(const StencilOperator& op) {
  CsrMatrix a;
  a.n = op.size();
  a.row_ptr.assign(a.n + 1, 0);
  for (std::size_t r = 0; r < a.n; ++r) {
    for (const auto& [c, v] : op.row(r)) {
      a.col.push_back(c);
      a.val.push_back(v);
    }
    a.row_ptr[r + 1] = a.col.size();
  }
  return a;
}

CsrMatrix csr_from_triplets(std::size_t n, std::vector<std::size_t> rows,
                            std::vector<std::size_t> cols, CVector vals) {
  require(rows.size() == cols.size() && cols.size() == vals.size(), "triplet arrays differ in length");
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
  });
  CsrMatrix a;
  a.n = n;
  a.row_ptr.assign(n + 1, 0);
  std::size_t prev_row = n;
  for (std::size_t t : order) {
    require(rows[t] < n && cols[t] < n, "triplet index out of range");
    if (rows[t] == prev_row && a.col.back() == cols[t]) {
      a.val.back() += vals[t];
      continue;
    }
    a.col.push_back(cols[t]);
    a.val.push_back(vals[t]);
    ++a.row_ptr[rows[t] + 1];
    prev_row = rows[t];
  }
  for (std::size_t r = 0; r < n; ++r) a.row_ptr[r + 1] += a.row_ptr[r];
  return a;
}

void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  os.precision(17);
  for (std::size_t r = 0; r < a.n; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      os << r + 1 << ' ' << a.col[p] + 1 << ' ' << a.val[p].real() << ' ' << a.val[p].imag() << '\n';
    }
  }
}

CVector Factorization::solve(const CVector& b) const {
  require(b.size() == n_, "solve: right-hand side size mismatch");
  CVector x = b;
  solve(x.data(), 1);
  return x;
}

namespace {

constexpr double kBandedWorkLimit = 4e8;
constexpr double kBandedMemoryLimit = 512.0 * 1024 * 1024;

}  // namespace

std::unique_ptr<Factorization> factorize(const CsrMatrix& a, FactorMethod method) {
  require(a.n > 0, "cannot factorize an empty matrix");
  if (method == FactorMethod::Auto) {
    const auto [p, q] = a.bandwidth();
    const double n = static_cast<double>(a.n);
    const double work = n * (p + 1.0) * (p + q + 1.0);
    const double memory = n * (2.0 * p + q + 1.0) * sizeof(cplx);
    method = work <= kBandedWorkLimit && memory <= kBandedMemoryLimit ? FactorMethod::Banded
                                                                      : FactorMethod::Sparse;
  }
  if (method == FactorMethod::Banded) return std::make_unique<BandedLu>(a);
  return std::make_unique<SparseLu>(a);
}

BandedLu::BandedLu(const CsrMatrix& a) : Factorization(a.n) {
  std::tie(p_, q_) = a.bandwidth();
  w_ = 2 * p_ + q_ + 1;
  a_.assign(n_ * w_, cplx(0.0));
  pivot_.resize(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
      row(r)[a.col[k] + p_ - r] = a.val[k];
    }
  }
  const auto& K = simd::kernels();
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t last_row = std::min(n_ - 1, k + p_);
    const std::size_t last_col = std::min(n_ - 1, k + p_ + q_);
    std::size_t piv = k;
    double best = -1.0;
    for (std::size_t r = k; r <= last_row; ++r) {
      const double m = std::abs(row(r)[k + p_ - r]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) {
      throw SingularMatrix("banded LU: zero pivot at row " + std::to_string(k), k);
    }
    pivot_[k] = piv;
    if (piv != k) {
      for (std::size_t c = k; c <= last_col; ++c) std::swap(row(k)[c + p_ - k], row(piv)[c + p_ - piv]);
    }
    const cplx* pr = row(k);
    const cplx inv = 1.0 / pr[p_];
    const std::size_t len = last_col - k;
    for (std::size_t r = k + 1; r <= last_row; ++r) {
      cplx* rr = row(r);
      cplx& lk = rr[k + p_ - r];
      if (lk == cplx(0.0)) continue;
      const cplx m = lk * inv;
      lk = m;
      if (len > 0) K.axpy(rr + (k + 1 + p_ - r), -m, pr + p_ + 1, len);
    }
  }
}

void BandedLu::solve(cplx* b, std::size_t nrhs) const {
  const auto& K = simd::kernels();
  for (std::size_t c = 0; c < nrhs; ++c) {
    cplx* x = b + c * n_;
    for (std::size_t k = 0; k < n_; ++k) {
      if (pivot_[k] != k) std::swap(x[k], x[pivot_[k]]);
      const cplx xk = x[k];
      if (xk == cplx(0.0)) continue;
      const std::size_t last_row = std::min(n_ - 1, k + p_);
      for (std::size_t r = k + 1; r <= last_row; ++r) x[r] -= row(r)[k + p_ - r] * xk;
    }
    for (std::size_t kk = n_; kk-- > 0;) {
      const std::size_t last_col = std::min(n_ - 1, kk + p_ + q_);
      const cplx* rr = row(kk);
      const cplx s = last_col > kk ? K.dotu(rr + p_ + 1, x + kk + 1, last_col - kk) : cplx(0.0);
      x[kk] = (x[kk] - s) / rr[p_];
    }
  }
}

SparseLu::SparseLu(const CsrMatrix& a) : Factorization(a.n) {
  // Column-compressed copy (transpose of the row layout).
  const std::size_t nnz = a.nnz();
  col_ptr_.assign(n_ + 1, 0);
  for (std::size_t p = 0; p < nnz; ++p) ++col_ptr_[a.col[p] + 1];
  for (std::size_t c = 0; c < n_; ++c) col_ptr_[c + 1] += col_ptr_[c];
  row_idx_.resize(nnz);
  val_.resize(2 * nnz);
  std::vector<long> next(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      const long dst = next[a.col[p]]++;
      row_idx_[dst] = static_cast<long>(r);
      val_[2 * dst] = a.val[p].real();
      val_[2 * dst + 1] = a.val[p].imag();
    }
  }
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_zl_defaults(control);
  void* symbolic = nullptr;
  const long n = static_cast<long>(n_);
  long status = umfpack_zl_symbolic(n, n, col_ptr_.data(), row_idx_.data(), val_.data(), nullptr,
                                    &symbolic, control, info);
  if (status != UMFPACK_OK) {
    throw Error("sparse LU: symbolic analysis failed with status " + std::to_string(status));
  }
  status = umfpack_zl_numeric(col_ptr_.data(), row_idx_.data(), val_.data(), nullptr, symbolic,
                              &numeric_, control, info);
  umfpack_zl_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix) {
    // Report the original row of the first zero pivot.
    std::vector<long> perm_row(n_), perm_col(n_);
    std::vector<double> dx(n_), dz(n_);
    long do_recip = 0;
    std::size_t row = 0;
    if (umfpack_zl_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                               perm_row.data(), perm_col.data(), dx.data(), dz.data(),
                               &do_recip, nullptr, numeric_) == UMFPACK_OK) {
      for (std::size_t k = 0; k < n_; ++k) {
        if (dx[k] == 0.0 && dz[k] == 0.0) {
          row = static_cast<std::size_t>(perm_row[k]);
          break;
        }
      }
    }
    umfpack_zl_free_numeric(&numeric_);
    throw SingularMatrix("sparse LU: zero pivot at row " + std::to_string(row), row);
  }
  if (status != UMFPACK_OK) {
    throw Error("sparse LU: numeric factorization failed with status " + std::to_string(status));
  }
}

SparseLu::~SparseLu() {
  if (numeric_) umfpack_zl_free_numeric(&numeric_);
}

void SparseLu::solve(cplx* b, std::size_t nrhs) const {
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  umfpack_zl_defaults(control);
  control[UMFPACK_IRSTEP] = 0;
  CVector x(n_);
  for (std::size_t c = 0; c < nrhs; ++c) {
    cplx* bc = b + c * n_;
    const long status = umfpack_zl_solve(
        UMFPACK_A, col_ptr_.data(), row_idx_.data(), val_.data(), nullptr,
        reinterpret_cast<double*>(x.data()), nullptr, reinterpret_cast<const double*>(bc), nullptr,
        numeric_, control, info);
    if (status != UMFPACK_OK) {
      throw Error("sparse LU: solve failed with status " + std::to_string(status));
    }
    std::copy(x.begin(), x.end(), bc);
  }
}

DenseLu::DenseLu(std::size_t n, CVector a) : n_(n), lu_(std::move(a)), pivot_(n) {
  require(lu_.size() == n * n, "dense LU: matrix size mismatch");
  const auto& K = simd::kernels();
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t piv = k;
    double best = -1.0;
    for (std::size_t r = k; r < n_; ++r) {
      const double m = std::abs(lu_[r * n_ + k]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (!(best > 0.0)) throw SingularMatrix("dense LU: zero pivot at row " + std::to_string(k), k);
    pivot_[k] = piv;
    if (piv != k) std::swap_ranges(lu_.begin() + k * n_, lu_.begin() + (k + 1) * n_, lu_.begin() + piv * n_);
    const cplx inv = 1.0 / lu_[k * n_ + k];
    for (std::size_t r = k + 1; r < n_; ++r) {
      cplx& l = lu_[r * n_ + k];
      if (l == cplx(0.0)) continue;
      l *= inv;
      K.axpy(&lu_[r * n_ + k + 1], -l, &lu_[k * n_ + k + 1], n_ - k - 1);
    }
  }
}

void DenseLu::solve(cplx* b) const {
  const auto& K = simd::kernels();
  for (std::size_t k = 0; k < n_; ++k) {
    if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
  }
  for (std::size_t r = 1; r < n_; ++r) b[r] -= K.dotu(&lu_[r * n_], b, r);
  for (std::size_t r = n_; r-- > 0;) {
    const cplx s = r + 1 < n_ ? K.dotu(&lu_[r * n_ + r + 1], b + r + 1, n_ - r - 1) : cplx(0.0);
    b[r] = (b[r] - s) / lu_[r * n_ + r];
  }
}

CVector DenseLu::solve(const CVector& b) const {
  require(b.size() == n_, "dense solve: right-hand side size mismatch");
  CVector x = b;
  solve(x.data());
  return x;
}

CVector dense_matrix(const StencilOperator& op) {
  const std::size_t n = op.size();
  require(n <= kDenseSolveCap, "dense solve limited to " + std::to_string(kDenseSolveCap) + " unknowns");
  CVector a(n * n, cplx(0.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (const auto& [c, v] : op.row(r)) a[r * n + c] += v;
  }
  return a;
}

CVector dense_solve(const StencilOperator& op, const CVector& rhs) {
  require(rhs.size() == op.size(), "dense solve: right-hand side size mismatch");
  DenseLu lu(op.size(), dense_matrix(op));
  return lu.solve(rhs);
}

}  // namespace helmsweep
