#include "helmsweep/twogrid.hpp"

#include <cmath>
#include <string>

#include "helmsweep/simd/kernels.hpp"

namespace helmsweep {

SmootherConfig SmootherConfig::defaults(int dim) {
  SmootherConfig s;
  s.nu = 3;
  s.omega_jac = dim >= 3 ? 0.6 : 0.8;
  return s;
}

void validate(const SmootherConfig& s) {
  require(s.omega_jac > 0.0 && s.omega_jac <= 1.0, "Jacobi weight must lie in (0, 1]");
  require(s.nu >= 0, "smoothing step count must be nonnegative");
}

namespace {

CVector weighted_inverse_diagonal(const StencilOperator& A, double omega) {
  CVector d = A.diagonal();
  for (std::size_t n = 0; n < d.size(); ++n) {
    if (d[n] == cplx(0.0)) throw InvalidArgument("Jacobi: zero diagonal at node " + std::to_string(n));
    d[n] = omega / d[n];
  }
  return d;
}

void jacobi_steps(const StencilOperator& A, const CVector& inv_diag, CVector& u, const CVector& f,
                  int steps) {
  const auto& k = simd::kernels();
  CVector r(u.size());
  for (int s = 0; s < steps; ++s) {
    A.residual(f.data(), u.data(), r.data());
    k.mul_acc(u.data(), inv_diag.data(), r.data(), u.size());
  }
}

}  // namespace

void jacobi_smooth(const StencilOperator& A, CVector& u, const CVector& f, double omega, int steps) {
  require(u.size() == A.size() && f.size() == A.size(), "Jacobi: vector size mismatch");
  jacobi_steps(A, weighted_inverse_diagonal(A, omega), u, f, steps);
}

void TransferMatrix::apply(const cplx* x, cplx* y) const {
  for (std::size_t r = 0; r < rows; ++r) {
    cplx s(0.0);
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) s += val[p] * x[col[p]];
    y[r] = s;
  }
}

CVector TransferMatrix::apply(const CVector& x) const {
  require(x.size() == cols, "transfer: vector size mismatch");
  CVector y(rows);
  apply(x.data(), y.data());
  return y;
}

TransferMatrix TransferMatrix::transpose() const {
  TransferMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (std::size_t c : col) ++t.row_ptr[c + 1];
  for (std::size_t r = 0; r < cols; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
  t.col.resize(col.size());
  t.val.resize(val.size());
  std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
      const std::size_t q = next[col[p]]++;
      t.col[q] = r;
      t.val[q] = val[p];
    }
  }
  return t;
}

TransferMatrix prolongation_matrix(const Mesh& fine, const CoarseMesh& coarse) {
  const Mesh& cm = coarse.mesh;
  require(fine.dim == cm.dim && coarse.map.dim == fine.dim, "prolongation: dimension mismatch");
  using Entries = std::vector<std::pair<int, double>>;
  std::array<std::vector<Entries>, 3> p1;
  for (int a = 0; a < 3; ++a) {
    if (a >= fine.dim) {
      p1[a] = {Entries{{0, 1.0}}};
      continue;
    }
    const AxisCoarsening& map = coarse.map.axes[a];
    const int fc = fine.axes[a].cells(), cc = cm.axes[a].cells();
    require(static_cast<int>(map.fine_point.size()) == cc + 1 && map.fine_point.back() == fc,
            "prolongation: coarsening map does not match the meshes");
    std::vector<Entries> rows(fc + 1);  // per fine node, coarse nodes
    for (int I = 0; I <= cc; ++I) rows[map.fine_point[I]].push_back({I, 1.0});
    for (int c = 0; c < cc; ++c) {
      if (!map.refined[c]) continue;
      const int f = map.fine_point[c] + 1;
      require(map.fine_point[c + 1] == f + 1, "prolongation: refined cell must span two fine cells");
      rows[f] = {{c, 0.5}, {c + 1, 0.5}};
    }
    for (int f = 1; f < fc; ++f) {
      Entries e;
      for (const auto& [I, w] : rows[f]) {
        if (I >= 1 && I < cc) e.push_back({I - 1, w});  // boundary nodes carry zero
      }
      p1[a].push_back(std::move(e));
    }
  }
  const auto fs = fine.shape();
  const auto cs = cm.shape();
  TransferMatrix P;
  P.rows = fine.unknowns();
  P.cols = cm.unknowns();
  P.row_ptr.reserve(P.rows + 1);
  P.row_ptr.push_back(0);
  for (int k = 0; k < fs[2]; ++k) {
    for (int j = 0; j < fs[1]; ++j) {
      for (int i = 0; i < fs[0]; ++i) {
        for (const auto& [ck, wk] : p1[2][k]) {
          for (const auto& [cj, wj] : p1[1][j]) {
            for (const auto& [ci, wi] : p1[0][i]) {
              P.col.push_back(linear_index(cs, ci, cj, ck));
              P.val.push_back(wi * wj * wk);
            }
          }
        }
        P.row_ptr.push_back(P.col.size());
      }
    }
  }
  return P;
}

TwoGridCycle::TwoGridCycle(StencilOperator fine, StencilOperator coarse, TransferMatrix prolongation,
                           const SmootherConfig& smoother)
    : fine_(std::make_unique<StencilOperator>(std::move(fine))),
      coarse_(std::make_unique<StencilOperator>(std::move(coarse))),
      P_(std::move(prolongation)),
      smoother_(smoother) {
  validate(smoother_);
  require(P_.rows == fine_->size() && P_.cols == coarse_->size(),
          "two-grid: prolongation does not match the operators");
  R_ = P_.transpose();
  inv_diag_ = weighted_inverse_diagonal(*fine_, smoother_.omega_jac);
}

TwoGridCycle::~TwoGridCycle() = default;
TwoGridCycle::TwoGridCycle(TwoGridCycle&&) noexcept = default;
TwoGridCycle& TwoGridCycle::operator=(TwoGridCycle&&) noexcept = default;

void TwoGridCycle::use_exact_coarse(FactorMethod method) {
  partition_.reset();
  exact_ = factorize(to_csr(*coarse_), method);
  kind_ = CoarseSolverKind::Exact;
}

void TwoGridCycle::use_sweep_coarse(const Discretization& coarse_disc, const PartitionOptions& options,
                                    const SweepVariant& variant) {
  exact_.reset();
  partition_ = build_partition(coarse_disc, *coarse_, options);
  if (variant.kind == SweepKind::X && partition_->subdomains() % 2 != 0) {
    throw InvalidArgument("X sweep needs an even number of subdomains, got " +
                          std::to_string(partition_->subdomains()));
  }
  variant_ = variant;
  kind_ = CoarseSolverKind::Sweep;
}

void TwoGridCycle::smooth(CVector& u, const CVector& f, int steps) const {
  jacobi_steps(*fine_, inv_diag_, u, f, steps);
}

CVector TwoGridCycle::coarse_solve(const CVector& r) const {
  if (kind_ == CoarseSolverKind::Sweep) {
    require(partition_ != nullptr, "two-grid: sweeping coarse solver not set up");
    return partition_->apply(r, variant_);
  }
  require(exact_ != nullptr, "two-grid: exact coarse solver not set up");
  return exact_->solve(r);
}

CVector TwoGridCycle::apply(const CVector& f) const {
  require(f.size() == fine_->size(), "two-grid: vector size mismatch");
  CVector u(f.size(), cplx(0.0));
  smooth(u, f, smoother_.nu);
  CVector r(f.size());
  fine_->residual(f.data(), u.data(), r.data());
  const CVector ec = coarse_solve(R_.apply(r));
  P_.apply(ec.data(), r.data());
  simd::kernels().axpy(u.data(), cplx(1.0), r.data(), u.size());
  smooth(u, f, smoother_.nu);
  return u;
}

bool has_pml(const Mesh& mesh) {
  for (int a = 0; a < mesh.dim; ++a) {
    if (mesh.axes[a].lo.kind == LayerKind::Pml || mesh.axes[a].hi.kind == LayerKind::Pml) return true;
  }
  return false;
}

TwoGridSetup build_two_grid(const Mesh& fine, const WaveModel& model, const TgspOptions& options) {
  double h = 0.0;
  require(fine.uniform(&h), "two-grid: the fine mesh must be uniform");
  TwoGridSetup s;
  s.coarse = coarsen_mesh(fine);
  const WaveModel coarse_model = coarsen_wavenumber(fine, model, s.coarse);
  s.fine_disc = describe(Scheme::StandardFd, fine, model, std::pow(h, fine.dim));
  if (has_pml(fine)) {
    s.coarse_disc = describe(Scheme::FiniteElement, s.coarse.mesh, coarse_model, 1.0);
  } else {
    s.coarse_disc = describe(Scheme::OptimizedFd, s.coarse.mesh, coarse_model, std::pow(2.0 * h, fine.dim));
  }
  const SmootherConfig sm = options.smoother.value_or(SmootherConfig::defaults(fine.dim));
  s.cycle = std::make_unique<TwoGridCycle>(assemble(s.fine_disc), assemble(s.coarse_disc),
                                           prolongation_matrix(fine, s.coarse), sm);
  if (options.coarse == CoarseSolverKind::Exact) {
    s.cycle->use_exact_coarse(options.exact_method);
  } else {
    s.cycle->use_sweep_coarse(s.coarse_disc, options.partition, options.variant);
  }
  return s;
}

}  // namespace helmsweep
