#pragma once

// Two-grid cycle used as a preconditioner: omega-Jacobi smoothing on the
// fine operator, tent-function transfers between the fine mesh and the
// PML-preserving coarse mesh, and a coarse solve that is either an exact
// factorization or one application of the sweeping preconditioner.

#include <memory>
#include <optional>

#include "helmsweep/discretize.hpp"
#include "helmsweep/mesh.hpp"
#include "helmsweep/sparselin.hpp"
#include "helmsweep/stencil.hpp"
#include "helmsweep/sweepdd.hpp"

namespace helmsweep {

struct SmootherConfig {
  double omega_jac = 0.8;
  int nu = 3;

  // 0.8 in two dimensions, 0.6 in three; three steps in both.
  static SmootherConfig defaults(int dim);
};

void validate(const SmootherConfig& s);

// u <- u + omega D^-1 (f - A u), `steps` times. Throws naming the first node
// with a zero diagonal.
void jacobi_smooth(const StencilOperator& A, CVector& u, const CVector& f, double omega, int steps);

// Real rectangular sparse matrix (CSR) for the grid transfers.
struct TransferMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> row_ptr, col;
  std::vector<double> val;

  void apply(const cplx* x, cplx* y) const;
  CVector apply(const CVector& x) const;
  TransferMatrix transpose() const;
};

// Tensor product of 1-D tent prolongations: copies at coarse points,
// averages across refined cells, identity across unrefined (PML) cells.
TransferMatrix prolongation_matrix(const Mesh& fine, const CoarseMesh& coarse);

enum class CoarseSolverKind { Exact, Sweep };

class TwoGridCycle {
 public:
  TwoGridCycle(StencilOperator fine, StencilOperator coarse, TransferMatrix prolongation,
               const SmootherConfig& smoother);
  ~TwoGridCycle();
  TwoGridCycle(TwoGridCycle&&) noexcept;
  TwoGridCycle& operator=(TwoGridCycle&&) noexcept;

  void use_exact_coarse(FactorMethod method = FactorMethod::Auto);
  // The coarse discretization must describe the coarse operator.
  void use_sweep_coarse(const Discretization& coarse_disc, const PartitionOptions& options,
                        const SweepVariant& variant);

  // One V-cycle from u = 0; a fixed linear map of f.
  CVector apply(const CVector& f) const;

  const StencilOperator& fine_operator() const { return *fine_; }
  const StencilOperator& coarse_operator() const { return *coarse_; }
  const TransferMatrix& prolongation() const { return P_; }
  const TransferMatrix& restriction() const { return R_; }
  const SmootherConfig& smoother() const { return smoother_; }
  CoarseSolverKind coarse_solver() const { return kind_; }
  const Partition* partition() const { return partition_.get(); }

 private:
  std::unique_ptr<StencilOperator> fine_, coarse_;
  TransferMatrix P_, R_;
  SmootherConfig smoother_;
  CVector inv_diag_;  // omega / diag(A)
  CoarseSolverKind kind_ = CoarseSolverKind::Exact;
  std::unique_ptr<Factorization> exact_;
  std::unique_ptr<Partition> partition_;
  SweepVariant variant_;

  void smooth(CVector& u, const CVector& f, int steps) const;
  CVector coarse_solve(const CVector& r) const;
};

struct TgspOptions {
  std::optional<SmootherConfig> smoother;  // dimension defaults when empty
  CoarseSolverKind coarse = CoarseSolverKind::Sweep;
  PartitionOptions partition;
  SweepVariant variant;
  FactorMethod exact_method = FactorMethod::Auto;
};

// Fine operator h^d times standard FD; coarse operator is the finite-element
// form when the mesh has PML and h_c^d times optimized FD otherwise.
struct TwoGridSetup {
  Discretization fine_disc, coarse_disc;
  CoarseMesh coarse;
  std::unique_ptr<TwoGridCycle> cycle;
};

TwoGridSetup build_two_grid(const Mesh& fine, const WaveModel& model, const TgspOptions& options);

bool has_pml(const Mesh& mesh);

}  // namespace helmsweep
