#include "helmsweep/sweepdd.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace helmsweep {

SweepVariant SweepVariant::nx(int subdomains, int n_cell) {
  require(n_cell >= 1, "NX sweep needs at least one cell");
  const int grouped = subdomains - (n_cell - 1);
  require(grouped >= 2 * n_cell, "too few subdomains for the requested NX cell count");
  SweepVariant v;
  v.kind = SweepKind::NX;
  v.cell.assign(n_cell + 1, 0);
  v.mid.assign(n_cell + 1, 0);
  v.cell[0] = -1;
  int start = 1;
  for (int m = 1; m <= n_cell; ++m) {
    const int size = grouped / n_cell + (m <= grouped % n_cell ? 1 : 0);
    v.mid[m] = start + size / 2;
    v.cell[m] = start + size;
    start = v.cell[m] + 1;
  }
  v.cell[n_cell] = subdomains + 1;
  return v;
}

struct Partition::Subdomain {
  int first = 0;    // global x-node of the first local unknown
  int x_count = 0;  // local unknowns along x
  StencilOperator op;
  std::unique_ptr<Factorization> lu;

  int local_x(int node) const { return node - first; }
  bool holds(int node) const { return node >= first && node < first + x_count; }
};

namespace {

struct AddedSide {
  int width = 0;
  bool robin = false;
  double strength = 0.0;
  double ref_speed = 1.0;
  double omega = 1.0;

  cplx alpha(double depth, double h) const {
    if (robin) return 1.0;
    const double d = width * h;
    const double sigma = strength * ref_speed / (d * d * d) * depth * depth;
    return pml_alpha(sigma, omega);
  }
};

bool is_one(cplx v) { return std::abs(v - cplx(1.0)) <= 1e-14; }

// Describes subdomain [need_lo, need_hi] (global x-nodes) with lo_w / hi_w
// added cells. Everything but the x-axis and the x-dependent fields is copied.
Discretization describe_subdomain(const Discretization& g, int need_lo, int need_hi, int lo_w,
                                  int hi_w, const AddedSide& side) {
  const DiscreteAxis& gx = g.axes[0];
  const int n1 = gx.unknowns();
  const int first = need_lo - lo_w;
  const int xc = need_hi - need_lo + 1 + lo_w + hi_w;
  const int last_global = need_hi - first + 1;  // local node of need_hi

  Discretization s = g;
  if (g.scheme == Scheme::OptimizedFd) {
    // Added rows come from the finite-element form, which carries h^dim.
    const double h = gx.width.front();
    s.scheme = Scheme::FiniteElement;
    s.scale = g.scale / std::pow(h, g.dim);
  }
  DiscreteAxis& sx = s.axes[0];
  sx.width.assign(xc + 1, 0.0);
  sx.alpha_mid.assign(xc + 1, cplx(1.0));
  sx.alpha_node.assign(xc + 2, cplx(1.0));
  sx.robin_lo = lo_w > 0 ? side.robin : gx.robin_lo;
  sx.robin_hi = hi_w > 0 ? side.robin : gx.robin_hi;

  for (int c = lo_w; c <= last_global; ++c) {
    const int gc = c + first - 1;
    sx.width[c] = gx.width[gc];
    sx.alpha_mid[c] = gx.alpha_mid[gc];
  }
  for (int l = lo_w + 1; l <= last_global; ++l) sx.alpha_node[l] = gx.alpha_node[l + first - 1];
  if (lo_w == 0) sx.alpha_node[0] = gx.alpha_node[0];
  if (hi_w == 0) sx.alpha_node[xc + 1] = gx.alpha_node[n1 + 1];

  if (lo_w > 0) {
    const int straddle = need_lo - 1;
    if (!is_one(gx.alpha_mid[straddle]) || !is_one(gx.alpha_node[need_lo])) {
      throw InvalidArgument("partition: interface at x-node " + std::to_string(need_lo) +
                            " lies inside the global PML");
    }
    const double h = gx.width[straddle];
    sx.alpha_mid[lo_w] = 1.0;
    for (int c = 0; c < lo_w; ++c) {
      sx.width[c] = h;
      sx.alpha_mid[c] = side.alpha((lo_w - c) * h, h);
    }
    for (int l = 0; l <= lo_w; ++l) sx.alpha_node[l] = side.alpha((lo_w - l + 0.5) * h, h);
  }
  if (hi_w > 0) {
    const int straddle = need_hi;
    if (!is_one(gx.alpha_mid[straddle]) || !is_one(gx.alpha_node[need_hi])) {
      throw InvalidArgument("partition: interface at x-node " + std::to_string(need_hi) +
                            " lies inside the global PML");
    }
    const double h = gx.width[straddle];
    sx.alpha_mid[last_global] = 1.0;
    for (int m = 1; m <= hi_w; ++m) {
      sx.width[last_global + m] = h;
      sx.alpha_mid[last_global + m] = side.alpha(m * h, h);
    }
    for (int m = 1; m <= hi_w + 1; ++m) sx.alpha_node[last_global + m] = side.alpha((m - 0.5) * h, h);
  }

  // x-dependent coefficient fields, constant across the added layers.
  const auto gs = g.shape();
  const auto gcs = g.cell_shape();
  const std::size_t cross = static_cast<std::size_t>(gs[1]) * gs[2];
  s.k_node.assign(static_cast<std::size_t>(xc) * cross, 0.0);
  s.k2_node.assign(static_cast<std::size_t>(xc) * cross, cplx(0.0));
  for (std::size_t c = 0; c < cross; ++c) {
    for (int xi = 0; xi < xc; ++xi) {
      const int node = std::clamp(xi + first, need_lo, need_hi);
      const std::size_t src = static_cast<std::size_t>(node - 1) + static_cast<std::size_t>(n1) * c;
      const std::size_t dst = static_cast<std::size_t>(xi) + static_cast<std::size_t>(xc) * c;
      s.k_node[dst] = g.k_node[src];
      s.k2_node[dst] = g.k2_node[src];
    }
  }
  const std::size_t cell_cross = static_cast<std::size_t>(gcs[1]) * gcs[2];
  s.k2_cell.assign(static_cast<std::size_t>(xc + 1) * cell_cross, cplx(0.0));
  for (std::size_t c = 0; c < cell_cross; ++c) {
    for (int xi = 0; xi <= xc; ++xi) {
      const int cell = std::clamp(xi + first - 1, need_lo - 1, need_hi);
      s.k2_cell[static_cast<std::size_t>(xi) + static_cast<std::size_t>(xc + 1) * c] =
          g.k2_cell[static_cast<std::size_t>(cell) + static_cast<std::size_t>(gcs[0]) * c];
    }
  }
  return s;
}

}  // namespace

Partition::Partition(const Discretization& g, const StencilOperator& op, const PartitionOptions& opt)
    : A_(&op), dim_(g.dim), concurrent_(opt.concurrent) {
  require(op.shape() == g.shape(), "partition: operator does not match the discretization");
  require(opt.layer_width >= 1, "partition: added layer width must be at least 1");
  const auto shape = g.shape();
  n1_ = shape[0];
  cross_ = static_cast<std::size_t>(shape[1]) * shape[2];
  require(opt.subdomains >= 0, "partition: negative subdomain count");
  J_ = opt.subdomains > 0 ? opt.subdomains : n1_ / (2 * opt.layer_width + 1);
  if (J_ < 2) {
    throw InvalidArgument("partition: " + std::to_string(n1_) +
                          " x-unknowns give fewer than 2 subdomains");
  }
  beta_.assign(J_ + 1, 0);
  const int base = n1_ / J_, rem = n1_ % J_;
  for (int j = 1; j <= J_; ++j) beta_[j] = beta_[j - 1] + base + (j <= rem ? 1 : 0);
  for (int j = 1; j <= J_; ++j) {
    require(beta_[j] - beta_[j - 1] >= 2, "partition: subdomain thinner than 2 cells");
  }
  beta_tilde_ = beta_;
  for (int j = 1; j < J_; ++j) beta_tilde_[j] = beta_[j] + (opt.alternate_interleave ? 1 : -1);

  AddedSide side;
  side.width = opt.layer_width;
  side.strength = opt.layer_strength > 0.0 ? opt.layer_strength : default_pml_strength(opt.layer_width);
  side.ref_speed = opt.ref_speed;
  side.omega = g.omega;
  switch (opt.closure) {
    case InterfaceClosure::Auto:
      side.robin = g.axes[0].robin_lo || g.axes[0].robin_hi;
      break;
    case InterfaceClosure::Robin:
      side.robin = true;
      break;
    case InterfaceClosure::Pml:
      side.robin = false;
      break;
  }
  require(side.robin || g.omega > 0.0, "partition: PML interfaces need the angular frequency");

  for (int j = 1; j <= J_; ++j) {
    auto sd = std::make_unique<Subdomain>();
    // Owned layers and transmission layers must carry global rows.
    int need_lo = std::min(beta_[j - 1], beta_tilde_[j - 1]) + 1;
    int need_hi = std::max(beta_[j], beta_tilde_[j]);
    if (j > 1) need_lo = std::min(need_lo, beta_[j - 1]);
    if (j < J_) need_hi = std::max(need_hi, beta_tilde_[j] + 1);
    need_lo = std::max(need_lo, 1);
    need_hi = std::min(need_hi, n1_);
    const int lo_w = j > 1 ? opt.layer_width : 0;
    const int hi_w = j < J_ ? opt.layer_width : 0;
    sd->first = need_lo - lo_w;
    sd->x_count = need_hi - need_lo + 1 + lo_w + hi_w;

    const Discretization sdisc = describe_subdomain(g, need_lo, need_hi, lo_w, hi_w, side);
    sd->op = assemble(sdisc);
    for (int node = need_lo; node <= need_hi; ++node) {
      for (std::size_t c = 0; c < cross_; ++c) {
        const std::size_t ln = static_cast<std::size_t>(sd->local_x(node)) + sd->x_count * c;
        const std::size_t gn = static_cast<std::size_t>(node - 1) + static_cast<std::size_t>(n1_) * c;
        for (int o = 0; o < 27; ++o) {
          const cplx v = op.coeff(gn, o);
          if (v != cplx(0.0) || sd->op.active(o)) sd->op.set(ln, o, v);
        }
      }
    }
    if (j < J_) {
      require(sd->holds(beta_[j]) && sd->holds(beta_[j] + 1), "partition: forward output layers missing");
    }
    if (j > 1) {
      require(sd->holds(beta_tilde_[j - 1]) && sd->holds(beta_tilde_[j - 1] + 1),
              "partition: backward output layers missing");
    }
    sd->lu = factorize(to_csr(sd->op), opt.factor_method);
    sub_.push_back(std::move(sd));
  }
}

Partition::~Partition() = default;

const StencilOperator& Partition::subdomain_operator(int j) const {
  require(j >= 1 && j <= J_, "subdomain index out of range");
  return sub_[j - 1]->op;
}

std::pair<int, int> Partition::subdomain_nodes(int j) const {
  require(j >= 1 && j <= J_, "subdomain index out of range");
  const Subdomain& sd = *sub_[j - 1];
  return {sd.first, sd.first + sd.x_count - 1};
}

CsrMatrix Partition::extract_transmission(int j, Direction dir) const {
  int layer;
  double sign;
  if (dir == Direction::Forward) {
    require(j > 1 && j <= J_, "forward transmission needs 1 < j <= J");
    layer = beta_[j - 1];
    sign = 1.0;
  } else {
    require(j >= 1 && j < J_, "backward transmission needs 1 <= j < J");
    layer = beta_tilde_[j];
    sign = -1.0;
  }
  const auto& s = A_->shape();
  std::vector<std::size_t> rows, cols;
  CVector vals;
  for (int dz = (dim_ >= 3 ? -1 : 0); dz <= (dim_ >= 3 ? 1 : 0); ++dz) {
    for (int dy = (dim_ >= 2 ? -1 : 0); dy <= (dim_ >= 2 ? 1 : 0); ++dy) {
      for (int k = 0; k < s[2]; ++k) {
        for (int jj = 0; jj < s[1]; ++jj) {
          const int j2 = jj + dy, k2 = k + dz;
          if (j2 < 0 || j2 >= s[1] || k2 < 0 || k2 >= s[2]) continue;
          const std::size_t c = static_cast<std::size_t>(jj) + static_cast<std::size_t>(s[1]) * k;
          const std::size_t c2 = static_cast<std::size_t>(j2) + static_cast<std::size_t>(s[1]) * k2;
          // Row s=0 couples to layer s=1 and vice versa; diagonal blocks vanish.
          const cplx up = A_->coeff(static_cast<std::size_t>(layer - 1) + n1_ * c,
                                    StencilOperator::offset_index({1, dy, dz}));
          const cplx down = A_->coeff(static_cast<std::size_t>(layer) + n1_ * c,
                                      StencilOperator::offset_index({-1, dy, dz}));
          if (up != cplx(0.0)) {
            rows.push_back(c);
            cols.push_back(cross_ + c2);
            vals.push_back(sign * up);
          }
          if (down != cplx(0.0)) {
            rows.push_back(cross_ + c);
            cols.push_back(c2);
            vals.push_back(-sign * down);
          }
        }
      }
    }
  }
  return csr_from_triplets(2 * cross_, std::move(rows), std::move(cols), std::move(vals));
}

Partition::State Partition::make_state(int buffers) const {
  State s;
  s.u.assign(A_->size(), cplx(0.0));
  s.buffers.assign(buffers, CVector(2 * cross_, cplx(0.0)));
  s.filled.assign(buffers, 0);
  return s;
}

void Partition::add_interface_source(const Subdomain& sd, CVector& fd, int layer, const CVector& buf,
                                     Direction dir) const {
  const cplx sign = dir == Direction::Forward ? 1.0 : -1.0;
  CVector tmp(cross_);
  const int rows[2] = {layer, layer + 1};
  for (int s = 0; s < 2; ++s) {
    std::fill(tmp.begin(), tmp.end(), cplx(0.0));
    // Layer s receives the coupling to the other layer's values.
    A_->apply_x_coupling(rows[s] - 1, s == 0 ? 1 : -1, buf.data() + (s == 0 ? cross_ : 0), tmp.data(),
                         s == 0 ? sign : -sign);
    const std::size_t xi = static_cast<std::size_t>(sd.local_x(rows[s]));
    for (std::size_t c = 0; c < cross_; ++c) fd[xi + sd.x_count * c] += tmp[c];
  }
}

void Partition::extract_layers(const Subdomain& sd, const CVector& ud, int layer, CVector& buf) const {
  for (int s = 0; s < 2; ++s) {
    const std::size_t xi = static_cast<std::size_t>(sd.local_x(layer + s));
    for (std::size_t c = 0; c < cross_; ++c) buf[s * cross_ + c] = ud[xi + sd.x_count * c];
  }
}

void Partition::subdom_solve(State& st, const CVector& f, int j, int a, int b, int a_out, int b_out,
                             int in_fwd, int out_fwd, int in_bwd, int out_bwd) const {
  require(j >= 1 && j <= J_, "subdomain index out of range");
  const Subdomain& sd = *sub_[j - 1];
  const std::size_t X = static_cast<std::size_t>(sd.x_count);
  CVector fd(X * cross_, cplx(0.0));
  for (int node = a + 1; node <= b; ++node) {
    const std::size_t xi = static_cast<std::size_t>(sd.local_x(node));
    for (std::size_t c = 0; c < cross_; ++c) fd[xi + X * c] = f[static_cast<std::size_t>(node - 1) + n1_ * c];
  }
  auto read = [&](int id) -> const CVector& {
    require(id >= 0 && id < static_cast<int>(st.buffers.size()) && st.filled[id],
            "sweep: transmission buffer read before it was written");
    return st.buffers[id];
  };
  if (in_fwd >= 0) add_interface_source(sd, fd, beta_[j - 1], read(in_fwd), Direction::Forward);
  if (in_bwd >= 0) add_interface_source(sd, fd, beta_tilde_[j], read(in_bwd), Direction::Backward);
  sd.lu->solve(fd.data(), 1);
  for (int node = a_out + 1; node <= b_out; ++node) {
    const std::size_t xi = static_cast<std::size_t>(sd.local_x(node));
    for (std::size_t c = 0; c < cross_; ++c) st.u[static_cast<std::size_t>(node - 1) + n1_ * c] += fd[xi + X * c];
  }
  if (out_fwd >= 0) {
    extract_layers(sd, fd, beta_[j], st.buffers[out_fwd]);
    st.filled[out_fwd] = 1;
  }
  if (out_bwd >= 0) {
    extract_layers(sd, fd, beta_tilde_[j - 1], st.buffers[out_bwd]);
    st.filled[out_bwd] = 1;
  }
}

void Partition::forward_sweep(State& s, const CVector& f, int j0, int j1, int buffer) const {
  for (int j = j0; j <= j1; ++j) {
    subdom_solve(s, f, j, beta_[j - 1], beta_[j], beta_[j - 1], beta_[j], j > 1 ? buffer : -1,
                 j < J_ ? buffer : -1, -1, -1);
  }
}

void Partition::backward_sweep(State& s, const CVector& f, int j0, int j1, int buffer) const {
  for (int j = j0; j >= j1; --j) {
    subdom_solve(s, f, j, beta_tilde_[j - 1], beta_tilde_[j], beta_tilde_[j - 1], beta_tilde_[j], -1, -1,
                 j < J_ ? buffer : -1, j > 1 ? buffer : -1);
  }
}

void Partition::mid_solve_in(State& s, const CVector& f, int j, int b_fwd, int b_bwd) const {
  subdom_solve(s, f, j, beta_[j - 1], beta_tilde_[j], beta_[j - 1], beta_tilde_[j], j > 1 ? b_fwd : -1, -1,
               j < J_ ? b_bwd : -1, -1);
}

void Partition::mid_solve_out(State& s, const CVector& f, int j, int b_fwd, int b_bwd) const {
  subdom_solve(s, f, j, beta_tilde_[j - 1], beta_[j], beta_tilde_[j - 1], beta_[j], -1, j < J_ ? b_fwd : -1,
               -1, j > 1 ? b_bwd : -1);
}

void Partition::run_pair(const std::function<void()>& a, const std::function<void()>& b) const {
  if (!concurrent_) {
    a();
    b();
    return;
  }
  std::exception_ptr err;
  std::thread t([&] {
    try {
      a();
    } catch (...) {
      err = std::current_exception();
    }
  });
  try {
    b();
  } catch (...) {
    t.join();
    throw;
  }
  t.join();
  if (err) std::rethrow_exception(err);
}

namespace {

CVector residual(const StencilOperator& A, const CVector& f, const CVector& u) {
  CVector g(f.size());
  A.residual(f.data(), u.data(), g.data());
  return g;
}

}  // namespace

CVector Partition::prec_ud(const CVector& f) const {
  require(f.size() == A_->size(), "preconditioner: vector size mismatch");
  State s = make_state(1);
  forward_sweep(s, f, 1, J_, 0);
  const CVector g = residual(*A_, f, s.u);
  backward_sweep(s, g, J_, 1, 0);
  return std::move(s.u);
}

CVector Partition::prec_x(const CVector& f) const {
  require(f.size() == A_->size(), "preconditioner: vector size mismatch");
  require(J_ % 2 == 0, "X sweep needs an even number of subdomains, got " + std::to_string(J_));
  const int mid = J_ / 2 + 1;
  State s = make_state(2);
  run_pair([&] { forward_sweep(s, f, 1, mid - 1, 0); }, [&] { backward_sweep(s, f, J_, mid + 1, 1); });
  mid_solve_in(s, f, mid, 0, 1);
  const CVector g = residual(*A_, f, s.u);
  mid_solve_out(s, g, mid, 1, 0);
  run_pair([&] { backward_sweep(s, g, mid - 1, 1, 0); }, [&] { forward_sweep(s, g, mid + 1, J_, 1); });
  return std::move(s.u);
}

CVector Partition::prec_nx(const CVector& f, const SweepVariant& v) const {
  require(f.size() == A_->size(), "preconditioner: vector size mismatch");
  const int n = v.cell_count();
  require(n >= 1 && static_cast<int>(v.mid.size()) == n + 1, "NX sweep: malformed cell lists");
  require(v.cell[0] <= 0 && v.cell[n] >= J_, "NX sweep: outer cell sentinels must enclose 1..J");
  for (int m = 1; m <= n; ++m) {
    const int lo = std::max(1, v.cell[m - 1] + 1), hi = std::min(J_, v.cell[m] - 1);
    require(v.cell[m] > v.cell[m - 1], "NX sweep: cell boundaries must increase");
    require(v.mid[m] >= lo && v.mid[m] <= hi, "NX sweep: mid subdomain outside its group");
    if (m < n) require(v.cell[m] >= 2 && v.cell[m] <= J_ - 1, "NX sweep: cell subdomain out of range");
  }
  State s = make_state(2 * n + 2);
  for (int m = 1; m <= n; ++m) {
    if (m < n) mid_solve_out(s, f, v.cell[m], 2 * m + 1, 2 * m);
    const int lo = std::max(1, v.cell[m - 1] + 1), hi = std::min(J_, v.cell[m] - 1);
    run_pair([&] { forward_sweep(s, f, lo, v.mid[m] - 1, 2 * m - 1); },
             [&] { backward_sweep(s, f, hi, v.mid[m] + 1, 2 * m); });
    mid_solve_in(s, f, v.mid[m], 2 * m - 1, 2 * m);
  }
  const CVector g = residual(*A_, f, s.u);
  for (int m = 1; m <= n; ++m) {
    mid_solve_out(s, g, v.mid[m], 2 * m, 2 * m - 1);
    const int lo = std::max(1, v.cell[m - 1] + 1), hi = std::min(J_, v.cell[m] - 1);
    run_pair([&] { backward_sweep(s, g, v.mid[m] - 1, lo, 2 * m - 1); },
             [&] { forward_sweep(s, g, v.mid[m] + 1, hi, 2 * m); });
  }
  // Cell subdomains need the backward data of the following group, so they
  // are completed after every group has swept outward.
  for (int m = 1; m < n; ++m) mid_solve_in(s, g, v.cell[m], 2 * m, 2 * m + 1);
  return std::move(s.u);
}

CVector Partition::apply(const CVector& f, const SweepVariant& v) const {
  switch (v.kind) {
    case SweepKind::UD:
      return prec_ud(f);
    case SweepKind::X:
      return prec_x(f);
    case SweepKind::NX:
      return prec_nx(f, v);
  }
  return prec_ud(f);
}

std::unique_ptr<Partition> build_partition(const Discretization& global, const StencilOperator& op,
                                           const PartitionOptions& options) {
  return std::make_unique<Partition>(global, op, options);
}

}  // namespace helmsweep
