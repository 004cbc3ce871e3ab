#include <chrono>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helmsweep/discretize.hpp"
#include "helmsweep/sweepdd.hpp"

using namespace helmsweep;

namespace {

CVector random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  CVector v(n);
  for (auto& x : v) x = {d(rng), d(rng)};
  return v;
}

double norm(const CVector& v) {
  double s = 0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

double rel_residual(const StencilOperator& A, const CVector& f, const CVector& u) {
  CVector r(f.size());
  A.residual(f.data(), u.data(), r.data());
  return norm(r) / norm(f);
}

double rel_diff(const CVector& a, const CVector& b) {
  CVector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d) / norm(b);
}

// 1-D constant-k problem with exact one-way closures at both ends.
struct Robin1D {
  Mesh mesh;
  WaveModel model;
  Discretization disc;
  StencilOperator op;

  explicit Robin1D(int unknowns, double kh = 0.3)
      : mesh(build_mesh(1, {unknowns + 1}, 1.0 / (unknowns + 1),
                        {AxisLayers{AbsorbingLayerSpec::robin(), AbsorbingLayerSpec::robin()}})),
        model(WaveModel::constant(mesh, kh * (unknowns + 1))),
        disc(describe(Scheme::StandardFd, mesh, model)),
        op(assemble(disc)) {}
};

PartitionOptions with_subdomains(int J, int width = 3) {
  PartitionOptions o;
  o.layer_width = width;
  o.subdomains = J;
  return o;
}

// 2-D constant-k strip with PML on every side.
struct Strip2D {
  Mesh mesh;
  WaveModel model;
  Discretization disc;
  StencilOperator op;

  explicit Strip2D(int n, double ppw = 10.0)
      : mesh(build_mesh(2, n, 1.0 / n, AbsorbingLayerSpec::pml(4))),
        model(WaveModel::constant(mesh, 2 * std::numbers::pi * n / ppw)),
        disc(describe(Scheme::StandardFd, mesh, model)),
        op(assemble(disc)) {}
};

}  // namespace

TEST_CASE("partition of 14 unknowns into two subdomains") {
  const Robin1D p(14);
  PartitionOptions o;
  o.layer_width = 3;
  const Partition q(p.disc, p.op, o);
  CHECK(q.subdomains() == 2);
  CHECK(q.beta() == std::vector<int>{0, 7, 14});
  CHECK(q.beta_tilde() == std::vector<int>{0, 6, 14});
}

TEST_CASE("subdomain count follows the layer width") {
  const Robin1D p(256);
  PartitionOptions o;
  o.layer_width = 3;
  const Partition part(p.disc, p.op, o);
  CHECK(part.subdomains() == 36);
  const auto& b = part.beta();
  for (int j = 1; j <= 36; ++j) {
    CHECK(b[j] > b[j - 1]);
    CHECK(b[j] - b[j - 1] >= 7);
    CHECK(b[j] - b[j - 1] <= 8);
    if (j < 36) CHECK(part.beta_tilde()[j] == b[j] - 1);
  }
  CHECK(b.back() == 256);
}

TEST_CASE("partition preconditions") {
  const Robin1D small(10);
  PartitionOptions o;
  o.layer_width = 3;
  CHECK_THROWS_AS(Partition(small.disc, small.op, o), InvalidArgument);
  CHECK_THROWS_AS(Partition(small.disc, small.op, with_subdomains(6)), InvalidArgument);

  const Robin1D odd(21);
  const Partition part(odd.disc, odd.op, o);
  CHECK(part.subdomains() == 3);
  CHECK_THROWS_AS(part.prec_x(CVector(21, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(part.prec_ud(CVector(20)), InvalidArgument);
}

TEST_CASE("alternate interleaving places the backward interface after the forward one") {
  const Robin1D p(40);
  PartitionOptions o = with_subdomains(4);
  o.alternate_interleave = true;
  const Partition part(p.disc, p.op, o);
  for (int j = 1; j < 4; ++j) CHECK(part.beta_tilde()[j] == part.beta()[j] + 1);
  const CVector f = random_vector(40, 2);
  CHECK(rel_residual(p.op, f, part.prec_ud(f)) < 1e-10);
}

TEST_CASE("1-D transmission matrices read couplings off the stencil") {
  const Robin1D p(14);
  PartitionOptions o;
  o.layer_width = 3;
  const Partition part(p.disc, p.op, o);
  const double h = 1.0 / 15;
  const CsrMatrix t = part.extract_transmission(2, Direction::Forward);
  CHECK(t.n == 2);
  CHECK(t.nnz() == 2);
  CHECK(t.row_ptr == std::vector<std::size_t>{0, 1, 2});
  CHECK(t.col == std::vector<std::size_t>{1, 0});
  CHECK(std::abs(t.val[0] - cplx(-1 / (h * h))) < 1e-9);
  CHECK(std::abs(t.val[1] - cplx(1 / (h * h))) < 1e-9);

  const CsrMatrix tb = part.extract_transmission(1, Direction::Backward);
  CHECK(tb.col == t.col);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(tb.val[i] + t.val[i]) < 1e-9);

  CHECK_THROWS_AS(part.extract_transmission(1, Direction::Forward), InvalidArgument);
  CHECK_THROWS_AS(part.extract_transmission(2, Direction::Backward), InvalidArgument);
}

TEST_CASE("2-D transmission matrices have zero diagonal blocks") {
  const Strip2D s(40);
  const Partition part(s.disc, s.op, with_subdomains(4));
  const std::size_t C = part.cross_section();
  for (int j = 2; j <= 4; ++j) {
    const CsrMatrix t = part.extract_transmission(j, Direction::Forward);
    CHECK(t.n == 2 * C);
    for (std::size_t r = 0; r < t.n; ++r) {
      for (std::size_t q = t.row_ptr[r]; q < t.row_ptr[r + 1]; ++q) CHECK((r < C) != (t.col[q] < C));
    }
  }
}

TEST_CASE("sweeps are exact for 1-D constant k") {
  const auto start = std::chrono::steady_clock::now();
  for (int n : {200, 1000, 2000}) {
    const Robin1D p(n);
    const CVector f = random_vector(n, static_cast<unsigned>(n));
    for (int J : {2, 4, 8, 16}) {
      const Partition part(p.disc, p.op, with_subdomains(J));
      CAPTURE(n);
      CAPTURE(J);
      CHECK(rel_residual(p.op, f, part.prec_ud(f)) < 1e-10);
      CHECK(rel_residual(p.op, f, part.prec_x(f)) < 1e-10);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 5.0);
}

TEST_CASE("sweeps are exact for 1-D with PML interfaces") {
  const Robin1D p(400);
  const CVector f = random_vector(400, 4);
  PartitionOptions o = with_subdomains(8);
  o.closure = InterfaceClosure::Pml;
  o.layer_width = 40;
  const Partition part(p.disc, p.op, o);
  // A PML only approximates the exact closure, so the residual is small but not zero.
  CHECK(rel_residual(p.op, f, part.prec_ud(f)) < 1e-2);
}

TEST_CASE("forward transmission over two subdomains reproduces the global solution") {
  const Robin1D p(60);
  const Partition part(p.disc, p.op, with_subdomains(2));
  CVector f(60, cplx(0.0));
  f[10] = 1.0;
  f[25] = cplx(0.0, -2.0);
  Partition::State st = part.make_state(1);
  part.subdom_solve(st, f, 1, 0, part.beta()[1], 0, part.beta()[1], -1, 0, -1, -1);
  part.subdom_solve(st, f, 2, part.beta()[1], 60, part.beta()[1], 60, 0, -1, -1, -1);
  CHECK(rel_diff(st.u, dense_solve(p.op, f)) < 1e-10);
}

TEST_CASE("subdomain solves without transmission") {
  const Robin1D p(60);
  const Partition part(p.disc, p.op, with_subdomains(2));
  Partition::State st = part.make_state(1);
  part.subdom_solve(st, CVector(60), 1, 0, 30, 0, 30, -1, -1, -1, -1);
  CHECK(st.u == CVector(60));
  CHECK_THROWS_AS(part.subdom_solve(st, CVector(60), 2, 30, 60, 30, 60, 0, -1, -1, -1), InvalidArgument);

  CVector f(60);
  f[5] = 1.0;
  part.forward_sweep(st, f, 1, 1, 0);
  CHECK(st.u[5] != cplx(0.0));
  CHECK(st.u[40] == cplx(0.0));
  CHECK(st.filled[0]);
}

TEST_CASE("sweeping a zero source leaves zero") {
  const Strip2D s(40);
  const Partition part(s.disc, s.op, with_subdomains(4));
  const CVector zero(s.op.size());
  CHECK(part.prec_ud(zero) == zero);
  CHECK(part.prec_x(zero) == zero);
  CHECK(part.prec_nx(zero, SweepVariant::nx(4, 1)) == zero);
}

TEST_CASE("preconditioners are linear") {
  const Strip2D s(48);
  const Partition part(s.disc, s.op, with_subdomains(6));
  const CVector f1 = random_vector(s.op.size(), 1), f2 = random_vector(s.op.size(), 2);
  CVector f12(f1.size());
  for (std::size_t i = 0; i < f1.size(); ++i) f12[i] = f1[i] + f2[i];
  for (const SweepVariant& v : {SweepVariant::ud(), SweepVariant::x(), SweepVariant::nx(6, 2)}) {
    const CVector u1 = part.apply(f1, v), u2 = part.apply(f2, v), u12 = part.apply(f12, v);
    CVector sum(u1.size());
    for (std::size_t i = 0; i < u1.size(); ++i) sum[i] = u1[i] + u2[i];
    CHECK(rel_diff(u12, sum) < 1e-12);
  }
}

TEST_CASE("concurrent and serial sweeps agree exactly") {
  const Strip2D s(48);
  PartitionOptions serial = with_subdomains(8), threaded = serial;
  threaded.concurrent = true;
  const Partition a(s.disc, s.op, serial), b(s.disc, s.op, threaded);
  const CVector f = random_vector(s.op.size(), 3);
  CHECK(a.prec_x(f) == b.prec_x(f));
  const SweepVariant nx = SweepVariant::nx(8, 2);
  CHECK(a.prec_nx(f, nx) == b.prec_nx(f, nx));
}

TEST_CASE("a single NX cell is the X sweep") {
  const Strip2D s(40);
  const Partition part(s.disc, s.op, with_subdomains(4));
  const SweepVariant v = SweepVariant::nx(4, 1);
  CHECK(v.cell == std::vector<int>{-1, 5});
  CHECK(v.mid[1] == 3);
  const CVector f = random_vector(s.op.size(), 8);
  CHECK(rel_diff(part.prec_nx(f, v), part.prec_x(f)) < 1e-14);
}

TEST_CASE("NX cell layout and validation") {
  const SweepVariant v = SweepVariant::nx(12, 2);
  CHECK(v.cell_count() == 2);
  CHECK(v.cell.front() == -1);
  CHECK(v.cell.back() == 13);
  CHECK(v.cell[1] == 7);
  CHECK(v.mid[1] == 4);
  CHECK(v.mid[2] == 10);
  CHECK_THROWS_AS(SweepVariant::nx(4, 2), InvalidArgument);
  CHECK_THROWS_AS(SweepVariant::nx(8, 0), InvalidArgument);

  const Robin1D p(200);
  const Partition part(p.disc, p.op, with_subdomains(12));
  SweepVariant bad = v;
  bad.mid[1] = 7;
  CHECK_THROWS_AS(part.prec_nx(CVector(200, 1.0), bad), InvalidArgument);
}

TEST_CASE("NX information crosses a cell subdomain once per application") {
  // With the source confined to the first group, that group is solved
  // exactly while the second group stays untouched until the next application.
  const Robin1D p(200);
  const Partition part(p.disc, p.op, with_subdomains(12));
  const SweepVariant v = SweepVariant::nx(12, 2);
  const int group_end = part.beta_tilde()[v.cell[1] - 1];
  const int far_start = part.beta()[v.cell[1]];
  CVector f = random_vector(200, 6);
  for (int i = group_end; i < 200; ++i) f[i] = 0.0;
  const CVector u = part.prec_nx(f, v), exact = dense_solve(p.op, f);
  for (int i = 0; i < group_end; ++i) CHECK(std::abs(u[i] - exact[i]) < 1e-10 * std::abs(exact[i]) + 1e-12);
  for (int i = far_start; i < 200; ++i) CHECK(u[i] == cplx(0.0));
  CHECK(rel_residual(p.op, f, u) > 1e-3);
}

TEST_CASE("one sweep reduces a 2-D residual tenfold") {
  const Strip2D s(64);
  PartitionOptions o;
  o.layer_width = 4;
  const Partition part(s.disc, s.op, o);
  const CVector f = random_vector(s.op.size(), 12);
  CHECK(rel_residual(s.op, f, part.prec_ud(f)) < 0.1);
  if (part.subdomains() % 2 == 0) CHECK(rel_residual(s.op, f, part.prec_x(f)) < 0.1);
}

TEST_CASE("subdomain operators copy the global rows") {
  const Strip2D s(40);
  const Partition part(s.disc, s.op, with_subdomains(4));
  const auto shape = s.op.shape();
  for (int j = 1; j <= 4; ++j) {
    const auto [first, last] = part.subdomain_nodes(j);
    const StencilOperator& sub = part.subdomain_operator(j);
    CHECK(sub.shape()[0] == last - first + 1);
    for (int node = part.beta()[j - 1] + 1; node <= part.beta()[j]; ++node) {
      for (int c = 0; c < shape[1]; ++c) {
        const std::size_t g = linear_index(shape, node - 1, c, 0);
        const std::size_t l = linear_index(sub.shape(), node - first, c, 0);
        for (int o = 0; o < 27; ++o) CHECK(sub.coeff(l, o) == s.op.coeff(g, o));
      }
    }
  }
}
