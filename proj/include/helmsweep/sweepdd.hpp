#pragma once

// Sweeping domain-decomposition preconditioner over slabs along x.
//
// Interfaces sit at half grid points: subdomain j owns the x-nodes
// beta[j-1]+1 .. beta[j] (forward sweeps) or beta_tilde[j-1]+1 ..
// beta_tilde[j] (backward sweeps), with beta_tilde[j] = beta[j] - 1 for
// internal interfaces. Node indices here are mesh node indices along x, so
// x-unknown u refers to node u + 1. Each subdomain is extended by added
// absorbing layers on its internal sides, its rows on the owned layers are
// copied from the global operator, and it is factorized at construction.
//
// Transmission moves two layers of a subdomain solution to the next
// subdomain as an equivalent interface source built from the global
// operator's couplings across the interface.

#include <functional>
#include <memory>
#include <vector>

#include "helmsweep/discretize.hpp"
#include "helmsweep/sparselin.hpp"
#include "helmsweep/stencil.hpp"

namespace helmsweep {

enum class SweepKind { UD, X, NX };

struct SweepVariant {
  SweepKind kind = SweepKind::UD;
  // NX only: cell boundaries j_cell[0..N] (j_cell[0] and j_cell[N] are the
  // sentinels below 1 and above J) and intersection subdomains j_mid[1..N].
  std::vector<int> cell;
  std::vector<int> mid;

  static SweepVariant ud() { return {}; }
  static SweepVariant x() { return {SweepKind::X, {}, {}}; }
  // Splits J subdomains into n_cell groups separated by single cell subdomains.
  static SweepVariant nx(int subdomains, int n_cell);
  int cell_count() const { return static_cast<int>(cell.size()) - 1; }
};

enum class InterfaceClosure { Auto, Pml, Robin };

struct PartitionOptions {
  int layer_width = 4;          // added layer width in cells
  double layer_strength = 0.0;  // 0 selects 5 * layer_width
  double ref_speed = 1.0;
  // Number of subdomains; 0 selects floor(N1 / (2 * layer_width + 1)).
  int subdomains = 0;
  // Place beta_tilde[j] = beta[j] + 1 instead of beta[j] - 1.
  bool alternate_interleave = false;
  // Auto uses Robin when the global x-axis has one-way closures, PML otherwise.
  InterfaceClosure closure = InterfaceClosure::Auto;
  FactorMethod factor_method = FactorMethod::Auto;
  // Run independent half-sweeps of X/NX on two threads.
  bool concurrent = false;
};

enum class Direction { Forward, Backward };

class Partition {
 public:
  Partition(const Discretization& global, const StencilOperator& global_op,
            const PartitionOptions& options = {});
  ~Partition();
  Partition(const Partition&) = delete;
  Partition& operator=(const Partition&) = delete;

  int subdomains() const { return J_; }
  const std::vector<int>& beta() const { return beta_; }
  const std::vector<int>& beta_tilde() const { return beta_tilde_; }
  const StencilOperator& global_operator() const { return *A_; }
  const StencilOperator& subdomain_operator(int j) const;
  // Global x-node range [first, last] of subdomain j's unknowns, added layers
  // included (added nodes extend past the global node range).
  std::pair<int, int> subdomain_nodes(int j) const;
  std::size_t cross_section() const { return cross_; }

  // Transmission T^(j) (forward, 1 < j <= J) or T~^(j) (backward, 1 <= j < J)
  // as a 2C x 2C matrix acting on [layer s=0; layer s=1].
  CsrMatrix extract_transmission(int j, Direction dir) const;

  CVector prec_ud(const CVector& f) const;
  CVector prec_x(const CVector& f) const;
  CVector prec_nx(const CVector& f, const SweepVariant& variant) const;
  CVector apply(const CVector& f, const SweepVariant& variant) const;

  // Building blocks, exposed for tests. Buffers hold two x-layers.
  struct State {
    CVector u;
    std::vector<CVector> buffers;
    std::vector<char> filled;
  };
  State make_state(int buffers) const;
  void subdom_solve(State& s, const CVector& f, int j, int a, int b, int a_out, int b_out,
                    int in_fwd, int out_fwd, int in_bwd, int out_bwd) const;
  void forward_sweep(State& s, const CVector& f, int j0, int j1, int buffer) const;
  void backward_sweep(State& s, const CVector& f, int j0, int j1, int buffer) const;
  void mid_solve_in(State& s, const CVector& f, int j, int b_fwd, int b_bwd) const;
  void mid_solve_out(State& s, const CVector& f, int j, int b_fwd, int b_bwd) const;

 private:
  struct Subdomain;
  const StencilOperator* A_;
  int dim_;
  int n1_;
  std::size_t cross_;
  int J_;
  std::vector<int> beta_, beta_tilde_;
  std::vector<std::unique_ptr<Subdomain>> sub_;
  bool concurrent_;

  void add_interface_source(const Subdomain& sd, CVector& fd, int layer, const CVector& buf,
                            Direction dir) const;
  void extract_layers(const Subdomain& sd, const CVector& ud, int layer, CVector& buf) const;
  void run_pair(const std::function<void()>& a, const std::function<void()>& b) const;
};

std::unique_ptr<Partition> build_partition(const Discretization& global, const StencilOperator& op,
                                           const PartitionOptions& options = {});

}  // namespace helmsweep
