#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helmsweep/discretize.hpp"
#include "helmsweep/krylov.hpp"
#include "helmsweep/sparselin.hpp"

using namespace helmsweep;

namespace {

CVector random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  CVector v(n);
  for (auto& x : v) x = {d(rng), d(rng)};
  return v;
}

LinearMap diagonal_map(CVector d) {
  return [d](const CVector& x) {
    CVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = d[i] * x[i];
    return y;
  };
}

LinearMap identity() {
  return [](const CVector& x) { return x; };
}

struct Helmholtz {
  StencilOperator op;
  Helmholtz() {
    const Mesh m = build_mesh(2, 16, 1.0 / 16, AbsorbingLayerSpec::pml(3));
    op = assemble_fine(m, WaveModel::constant(m, 2 * std::numbers::pi * 16 / 8.0));
  }
  LinearMap map() const {
    return [this](const CVector& x) { return op.apply(x); };
  }
};

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate(GmresConfig{}));
  CHECK_THROWS_AS(validate(GmresConfig{0.0, 10, {}}), InvalidArgument);
  CHECK_THROWS_AS(validate(GmresConfig{1e-6, 0, {}}), InvalidArgument);
  CHECK_THROWS_AS(validate(GmresConfig{1e-6, 10, 0}), InvalidArgument);
}

TEST_CASE("identity converges in one iteration") {
  const CVector f = random_vector(30, 1);
  SolveReport rep;
  const CVector u = gmres(identity(), identity(), f, {}, rep);
  CHECK(rep.converged);
  CHECK(rep.iterations == 1);
  CHECK(rep.residual_history.size() == 2);
  CHECK(rep.residual_history.front() == 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(u[i] - f[i]) < 1e-14);
}

TEST_CASE("two distinct eigenvalues need two iterations") {
  CVector d(40);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = i % 2 ? cplx(3.0, 1.0) : cplx(-2.0, 0.5);
  const CVector f = random_vector(40, 2);
  SolveReport rep;
  const CVector u = gmres(diagonal_map(d), nullptr, f, GmresConfig{1e-12, 50, {}}, rep);
  CHECK(rep.converged);
  CHECK(rep.iterations == 2);
  CHECK(rep.true_residual < 1e-12);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(d[i] * u[i] - f[i]) < 1e-11);
}

TEST_CASE("full GMRES residuals never increase") {
  const Helmholtz h;
  const CVector f = random_vector(h.op.size(), 3);
  SolveReport rep;
  gmres(h.map(), nullptr, f, GmresConfig{1e-8, 400, {}}, rep);
  CHECK(rep.residual_history.size() == static_cast<std::size_t>(rep.iterations) + 1);
  for (std::size_t i = 1; i < rep.residual_history.size(); ++i) {
    CHECK(rep.residual_history[i] <= rep.residual_history[i - 1] + 1e-12);
  }
  CHECK(rep.converged);
  CHECK(rep.true_residual < 1e-7);
}

TEST_CASE("exact inverse preconditioner converges in one iteration") {
  const Helmholtz h;
  const auto lu = factorize(to_csr(h.op));
  const LinearMap inverse = [&](const CVector& x) { return lu->solve(x); };
  const CVector f = random_vector(h.op.size(), 4);
  SolveReport rep;
  const CVector u = gmres(h.map(), inverse, f, GmresConfig{1e-10, 20, {}}, rep);
  CHECK(rep.iterations == 1);
  CHECK(rep.converged);
  CHECK(rep.true_residual < 1e-10);
  const CVector ref = dense_solve(h.op, f);
  double err = 0, size = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    err = std::max(err, std::abs(u[i] - ref[i]));
    size = std::max(size, std::abs(ref[i]));
  }
  CHECK(err <= 1e-9 * size);
}

TEST_CASE("scaling the right-hand side does not change the iteration count") {
  const Helmholtz h;
  const CVector f = random_vector(h.op.size(), 5);
  CVector g = f;
  for (auto& x : g) x *= cplx(0.0, 1e3);
  const LinearMap jacobi = [&](const CVector& x) {
    const CVector d = h.op.diagonal();
    CVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / d[i];
    return y;
  };
  SolveReport a, b;
  gmres(h.map(), jacobi, f, {}, a);
  gmres(h.map(), jacobi, g, {}, b);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("restarted GMRES still converges") {
  const Helmholtz h;
  const CVector f = random_vector(h.op.size(), 6);
  SolveReport rep;
  gmres(h.map(), nullptr, f, GmresConfig{1e-6, 2000, 30}, rep);
  CHECK(rep.converged);
  CHECK(rep.true_residual < 2e-6);
}

TEST_CASE("iteration cap is reported as not converged") {
  const Helmholtz h;
  const CVector f = random_vector(h.op.size(), 7);
  SolveReport rep;
  gmres(h.map(), nullptr, f, GmresConfig{1e-12, 3, {}}, rep);
  CHECK_FALSE(rep.converged);
  CHECK(rep.iterations == 3);
}

TEST_CASE("zero right-hand side returns zero") {
  SolveReport rep;
  const CVector u = gmres(identity(), nullptr, CVector(5), {}, rep);
  CHECK(u == CVector(5));
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
}

TEST_CASE("non-finite values abort the solve") {
  const LinearMap bad = [](const CVector& x) {
    CVector y = x;
    y[0] = std::numeric_limits<double>::quiet_NaN();
    return y;
  };
  SolveReport rep;
  CHECK_THROWS_WITH_AS(gmres(bad, nullptr, CVector(4, 1.0), {}, rep), doctest::Contains("non-finite"), Error);
  CVector f(4, 1.0);
  f[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(gmres(identity(), nullptr, f, {}, rep), InvalidArgument);
}
