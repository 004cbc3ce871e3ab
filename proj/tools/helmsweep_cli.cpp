// helmsweep: run Helmholtz experiments with the two-grid sweeping
// preconditioner, batch tables, dispersion curves and oracle checks.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "helmsweep/experiment.hpp"
#include "helmsweep/oracles.hpp"
#include "helmsweep/simd/kernels.hpp"

using namespace helmsweep;

namespace {

struct Flags {
  std::string model = "constant", boundary = "pml", variant = "ud", coarse = "sweep", rhs = "point";
  double freq = 0.0;
  std::vector<double> source;
  long long seed = -1;
};

void add_config_flags(CLI::App* app, ExperimentConfig& c, Flags& f) {
  app->add_option("--dim", c.dim, "Spatial dimension (2 or 3)")->capture_default_str();
  app->add_option("--n", c.n, "Interior cells per axis of the unit box")->capture_default_str();
  app->add_option("--freq", f.freq, "Frequency in cycles per unit length (default n / ppw)");
  app->add_option("--ppw", c.ppw, "Points per wavelength at unit speed")->capture_default_str();
  app->add_option("--model", f.model, "constant, wedge or file")->capture_default_str();
  app->add_option("--model-path", c.model_path, "float32 little-endian velocity file");
  app->add_option("--model-dims", c.model_dims, "Velocity file dimensions, x first");
  app->add_option("--boundary", f.boundary, "pml or sponge")->capture_default_str();
  app->add_option("--pml-width", c.pml_width, "Global PML width in cells")->capture_default_str();
  app->add_option("--pml-strength", c.pml_strength, "Global PML strength (0: 5 per cell)");
  app->add_option("--sponge-width", c.sponge_width, "Sponge width in cells")->capture_default_str();
  app->add_option("--sponge-gamma", c.sponge_gamma, "Sponge peak damping")->capture_default_str();
  app->add_option("--variant", f.variant, "Sweep variant: ud, x or nx")->capture_default_str();
  app->add_option("--nx-cells", c.nx_cells, "Number of cells for the nx variant")->capture_default_str();
  app->add_option("--dd-width", c.dd_width, "Added layer width of the subdomains")->capture_default_str();
  app->add_option("--subdomains", c.subdomains, "Subdomain count (0: floor(N1 / (2 dd-width + 1)))");
  app->add_option("--dd-strength", c.dd_strength, "Added layer strength (0: 5 per cell)");
  app->add_flag("--concurrent", c.concurrent, "Run independent half sweeps on two threads");
  app->add_option("--nu", c.nu, "Smoothing steps (0: dimension default)");
  app->add_option("--omega-jac", c.omega_jac, "Jacobi weight (0: dimension default)");
  app->add_option("--coarse", f.coarse, "Coarse solver: sweep or exact")->capture_default_str();
  app->add_option("--tol", c.tol, "GMRES relative tolerance")->capture_default_str();
  app->add_option("--max-iter", c.max_iter, "GMRES iteration limit")->capture_default_str();
  app->add_option("--rhs", f.rhs, "point or random")->capture_default_str();
  app->add_option("--source", f.source, "Point source position as fractions of the box");
  app->add_option("--seed", f.seed, "Seed for the random right-hand side");
}

void finish_config(ExperimentConfig& c, const Flags& f) {
  if (f.freq > 0.0) c.freq = f.freq;
  c.model = parse_model_source(f.model);
  c.boundary = parse_boundary(f.boundary);
  c.variant = parse_sweep_kind(f.variant);
  c.coarse = parse_coarse_solver(f.coarse);
  c.rhs = parse_rhs(f.rhs);
  for (std::size_t a = 0; a < f.source.size() && a < 3; ++a) c.source[a] = f.source[a];
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  validate(c);
}

template <class T>
std::vector<T> parse_list(const std::vector<std::string>& v, T (*parse)(const std::string&)) {
  std::vector<T> out;
  for (const auto& s : v) out.push_back(parse(s));
  return out;
}

int oracle_check() {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, double value) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << value << ")\n";
    if (!ok) ++failures;
  };
  const double pi = std::numbers::pi;

  RobinProblem1D p;
  p.k = 2.0 * pi;
  p.sources = {{0.5, 1.0}};
  const cplx u = solve_1d_analytic(p, 0.5);
  report("1-D point source value i/(4 pi)", std::abs(u - cplx(0.0, 1.0 / (4.0 * pi))) < 1e-14,
         std::abs(u - cplx(0.0, 1.0 / (4.0 * pi))));

  const cplx lam = strip_lambda(10.0, 2.0 * pi);
  report("strip mode lambda for k=10, l=1", std::abs(lam - cplx(0.0, std::sqrt(100.0 - 4.0 * pi * pi))) < 1e-12,
         lam.imag());

  const double kh = 2.0 * pi / 10.0;
  const double e = phase_error(StencilFamily::StandardFd, 1, kh);
  report("1-D standard FD phase error vs (kh)^2/24", std::abs(e / (kh * kh / 24.0) - 1.0) < 0.1, e);

  const auto d = dispersion_error(StencilFamily::OptimizedFd, 2, {0.05, 0.1, 0.15, 0.2, 0.25});
  double worst = 0.0;
  for (const auto& pt : d) worst = std::max(worst, pt.max_error);
  report("optimized coarse/fine phase mismatch, 2-D, G >= 4", worst <= 5e-4, worst);

  const double r = sponge_reflection_1d(10.0, 36, 1.0);
  report("sponge reflection at 10 points per wavelength", r < 0.05, r);
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Helmholtz solver with a two-grid sweeping preconditioner"};
  app.set_config("--config", "", "Key-value configuration file (TOML/INI)");
  app.require_subcommand(1);
  std::string simd;
  app.add_option("--simd", simd, "Force the kernel instruction set: scalar or avx2");

  ExperimentConfig solve_cfg;
  Flags solve_flags;
  std::string solve_csv, history_path;
  auto* solve = app.add_subcommand("solve", "Run one preconditioned GMRES solve");
  add_config_flags(solve, solve_cfg, solve_flags);
  solve->add_option("--csv", solve_csv, "Append the result row to this CSV file");
  solve->add_option("--field", solve_cfg.field_path, "Write the solution as interleaved float64");
  solve->add_option("--history", history_path, "Write the residual history, one value per line");

  ExperimentConfig table_cfg;
  Flags table_flags;
  std::string table_csv = "results.csv";
  std::vector<int> sizes, widths;
  std::vector<std::string> variants, boundaries;
  auto* table = app.add_subcommand("table", "Run a resumable batch over sizes, widths and variants");
  add_config_flags(table, table_cfg, table_flags);
  table->add_option("--sizes", sizes, "Grid sizes");
  table->add_option("--dd-widths", widths, "Added layer widths");
  table->add_option("--variants", variants, "Sweep variants");
  table->add_option("--boundaries", boundaries, "Global boundary kinds");
  table->add_option("--out", table_csv, "Results CSV")->capture_default_str();

  int disp_dim = 2, disp_steps = 20;
  double disp_max = 0.4;
  std::string disp_family = "opt", disp_out;
  auto* disp = app.add_subcommand("dispersion", "Fine/coarse phase speed mismatch curve");
  disp->add_option("--dim", disp_dim, "Dimension (2 or 3)")->capture_default_str();
  disp->add_option("--family", disp_family, "Coarse stencil: opt or fd")->capture_default_str();
  disp->add_option("--inv-g-max", disp_max, "Largest coarse 1/G")->capture_default_str();
  disp->add_option("--steps", disp_steps, "Number of 1/G samples")->capture_default_str();
  disp->add_option("--out", disp_out, "CSV output (stdout when empty)");

  auto* oracle = app.add_subcommand("oracle-check", "Check the reference oracles");

  CLI11_PARSE(app, argc, argv);
  try {
    if (simd == "scalar") simd::set_active_isa(simd::Isa::Scalar);
    if (simd == "avx2") simd::set_active_isa(simd::Isa::Avx2);
    if (!simd.empty() && simd != "scalar" && simd != "avx2") throw InvalidArgument("unknown --simd value");

    if (*solve) {
      finish_config(solve_cfg, solve_flags);
      const ResultRow r = run_experiment(solve_cfg);
      std::cout << csv_header() << '\n' << csv_row(r) << '\n';
      if (!solve_csv.empty()) {
        const bool fresh = !std::ifstream(solve_csv).good();
        std::ofstream out(solve_csv, std::ios::app);
        if (fresh) out << csv_header() << '\n';
        out << csv_row(r) << '\n';
      }
      if (!history_path.empty()) {
        std::ofstream out(history_path);
        out.precision(17);
        for (double v : r.residual_history) out << v << '\n';
      }
      return r.converged ? 0 : 2;
    }
    if (*table) {
      finish_config(table_cfg, table_flags);
      TableSpec spec;
      spec.base = table_cfg;
      spec.sizes = sizes;
      spec.dd_widths = widths;
      spec.variants = parse_list(variants, parse_sweep_kind);
      spec.boundaries = parse_list(boundaries, parse_boundary);
      run_table(spec, table_csv, &std::cerr);
      return 0;
    }
    if (*disp) {
      if (disp_family != "opt" && disp_family != "fd") throw InvalidArgument("family must be opt or fd");
      std::vector<double> inv_g;
      for (int i = 1; i <= disp_steps; ++i) inv_g.push_back(disp_max * i / disp_steps);
      const auto pts = dispersion_error(
          disp_family == "opt" ? StencilFamily::OptimizedFd : StencilFamily::StandardFd, disp_dim, inv_g);
      if (disp_out.empty()) {
        write_dispersion_csv(std::cout, pts);
      } else {
        std::ofstream out(disp_out);
        write_dispersion_csv(out, pts);
      }
      return 0;
    }
    if (*oracle) return oracle_check();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
