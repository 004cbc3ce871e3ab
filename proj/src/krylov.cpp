#include "helmsweep/krylov.hpp"

#include <chrono>
#include <cmath>

#include "helmsweep/simd/kernels.hpp"

namespace helmsweep {

void validate(const GmresConfig& c) {
  require(c.tol > 0.0, "GMRES tolerance must be positive");
  require(c.max_iter >= 1, "GMRES needs max_iter >= 1");
  require(!c.restart || *c.restart >= 1, "GMRES restart length must be positive");
}

namespace {

double norm(const CVector& v) { return std::sqrt(simd::kernels().norm_sq(v.data(), v.size())); }

bool finite(const CVector& v) {
  for (const cplx& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

// Rotation zeroing b in (a, b): c real, s complex.
void givens(cplx a, cplx b, double& c, cplx& s) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
  } else {
    const double r = std::hypot(na, nb);
    c = na / r;
    s = (a / na) * std::conj(b) / r;
  }
}

}  // namespace

CVector gmres(const LinearMap& apply_A, const LinearMap& apply_M, const CVector& f,
              const GmresConfig& config, SolveReport& report) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();
  const auto& k = simd::kernels();
  const std::size_t n = f.size();
  report = SolveReport{};
  require(finite(f), "GMRES: right-hand side is not finite");
  auto precond = [&](const CVector& v) { return apply_M ? apply_M(v) : v; };

  CVector u(n, cplx(0.0));
  const double fnorm = norm(f);
  report.residual_history.push_back(fnorm == 0.0 ? 0.0 : 1.0);
  if (fnorm == 0.0) {
    report.converged = true;
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return u;
  }
  const int m = config.restart.value_or(config.max_iter);
  CVector r = f;

  while (report.iterations < config.max_iter && !report.converged) {
    const double beta = norm(r);
    std::vector<CVector> V;
    V.reserve(m + 1);
    V.emplace_back(r);
    for (cplx& z : V[0]) z /= beta;
    std::vector<CVector> H;  // columns, each of length j + 2
    std::vector<double> cs;
    std::vector<cplx> sn;
    CVector g(1, beta);
    int j = 0;
    bool breakdown = false;
    for (; j < m && report.iterations < config.max_iter; ++j) {
      CVector w = apply_A(precond(V[j]));
      if (!finite(w)) throw Error("GMRES: non-finite value in operator application at iteration " +
                                  std::to_string(report.iterations + 1));
      CVector h(j + 2, cplx(0.0));
      for (int i = 0; i <= j; ++i) {
        h[i] = k.dotc(V[i].data(), w.data(), n);
        k.axpy(w.data(), -h[i], V[i].data(), n);
      }
      h[j + 1] = norm(w);
      for (int i = 0; i < j; ++i) {
        const cplx t = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -std::conj(sn[i]) * h[i] + cs[i] * h[i + 1];
        h[i] = t;
      }
      const double hnext = std::abs(h[j + 1]);
      double c;
      cplx s;
      givens(h[j], h[j + 1], c, s);
      cs.push_back(c);
      sn.push_back(s);
      h[j] = c * h[j] + s * h[j + 1];
      h[j + 1] = 0.0;
      g.push_back(-std::conj(s) * g[j]);
      g[j] = c * g[j];
      H.push_back(std::move(h));
      ++report.iterations;
      const double rel = std::abs(g[j + 1]) / fnorm;
      report.residual_history.push_back(rel);
      if (rel <= config.tol) {
        report.converged = true;
        ++j;
        break;
      }
      if (hnext <= 1e-14 * beta) {
        breakdown = true;
        ++j;
        break;
      }
      for (cplx& z : w) z /= hnext;
      V.push_back(std::move(w));
    }
    // Back substitution for the least-squares coefficients.
    CVector y(j);
    for (int i = j - 1; i >= 0; --i) {
      cplx s = g[i];
      for (int l = i + 1; l < j; ++l) s -= H[l][i] * y[l];
      if (H[i][i] == cplx(0.0)) throw Error("GMRES: singular Hessenberg matrix (true breakdown)");
      y[i] = s / H[i][i];
    }
    CVector z(n, cplx(0.0));
    for (int i = 0; i < j; ++i) k.axpy(z.data(), y[i], V[i].data(), n);
    const CVector dz = precond(z);
    k.axpy(u.data(), cplx(1.0), dz.data(), n);
    const CVector Au = apply_A(u);
    for (std::size_t i = 0; i < n; ++i) r[i] = f[i] - Au[i];
    report.true_residual = norm(r) / fnorm;
    if (breakdown) {
      // Happy breakdown: the Krylov space is invariant and holds the solution.
      report.converged = true;
      report.note = "happy breakdown";
    }
  }
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return u;
}

}  // namespace helmsweep
