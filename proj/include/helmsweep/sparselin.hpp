#pragma once

// Sparse storage and direct solvers: CSR export of stencil operators, a
// banded LU with partial pivoting for narrow slab matrices, a fill-reducing
// sparse LU (UMFPACK) for wide-band matrices, and a dense LU oracle.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "helmsweep/stencil.hpp"
#include "helmsweep/types.hpp"

namespace helmsweep {

struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  CVector val;

  std::size_t nnz() const { return val.size(); }
  void multiply(const cplx* x, cplx* y) const;
  CVector multiply(const CVector& x) const;
  // Lower and upper bandwidth.
  std::pair<std::size_t, std::size_t> bandwidth() const;
};

CsrMatrix to_csr(const StencilOperator& op);
// Builds a CSR matrix from unsorted (row, col, value) triplets, summing duplicates.
CsrMatrix csr_from_triplets(std::size_t n, std::vector<std::size_t> rows,
                            std::vector<std::size_t> cols, CVector vals);

// Matrix Market coordinate, complex general, 1-based.
void write_matrix_market(std::ostream& os, const CsrMatrix& a);

class Factorization {
 public:
  virtual ~Factorization() = default;
  std::size_t size() const { return n_; }
  // Solves in place for `nrhs` right-hand sides stored column after column.
  // Safe to call concurrently on one factorization.
  virtual void solve(cplx* b, std::size_t nrhs = 1) const = 0;
  CVector solve(const CVector& b) const;
  virtual std::string method() const = 0;

 protected:
  explicit Factorization(std::size_t n) : n_(n) {}
  std::size_t n_;
};

enum class FactorMethod { Auto, Banded, Sparse };

// Auto picks the banded LU when its estimated work and memory are modest,
// otherwise the fill-reducing sparse LU.
std::unique_ptr<Factorization> factorize(const CsrMatrix& a, FactorMethod method = FactorMethod::Auto);

class BandedLu final : public Factorization {
 public:
  explicit BandedLu(const CsrMatrix& a);
  using Factorization::solve;
  void solve(cplx* b, std::size_t nrhs = 1) const override;
  std::string method() const override { return "banded"; }
  std::size_t lower() const { return p_; }
  std::size_t upper() const { return q_; }

 private:
  std::size_t p_, q_, w_;
  // Row r covers columns [r - p, r + p + q]; eliminated entries hold multipliers.
  CVector a_;
  std::vector<std::size_t> pivot_;
  cplx* row(std::size_t r) { return a_.data() + r * w_; }
  const cplx* row(std::size_t r) const { return a_.data() + r * w_; }
};

class SparseLu final : public Factorization {
 public:
  explicit SparseLu(const CsrMatrix& a);
  ~SparseLu() override;
  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;
  using Factorization::solve;
  void solve(cplx* b, std::size_t nrhs = 1) const override;
  std::string method() const override { return "sparse"; }

 private:
  std::vector<long> col_ptr_, row_idx_;
  std::vector<double> val_;  // packed complex, column compressed
  void* numeric_ = nullptr;
};

class DenseLu {
 public:
  // Row-major n x n matrix.
  DenseLu(std::size_t n, CVector a);
  std::size_t size() const { return n_; }
  void solve(cplx* b) const;
  CVector solve(const CVector& b) const;

 private:
  std::size_t n_;
  CVector lu_;
  std::vector<std::size_t> pivot_;
};

inline constexpr std::size_t kDenseSolveCap = 10000;

CVector dense_matrix(const StencilOperator& op);
CVector dense_solve(const StencilOperator& op, const CVector& rhs);

}  // namespace helmsweep
