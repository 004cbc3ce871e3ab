#include "helmsweep/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace helmsweep {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::UD: return "ud";
    case SweepKind::X: return "x";
    case SweepKind::NX: return "nx";
  }
  return "ud";
}
std::string to_string(BoundaryKind k) { return k == BoundaryKind::Pml ? "pml" : "sponge"; }
std::string to_string(ModelSource k) {
  switch (k) {
    case ModelSource::Constant: return "constant";
    case ModelSource::Wedge: return "wedge";
    case ModelSource::File: return "file";
  }
  return "constant";
}
std::string to_string(CoarseSolverKind k) { return k == CoarseSolverKind::Exact ? "exact" : "sweep"; }
std::string to_string(RhsKind k) { return k == RhsKind::Point ? "point" : "random"; }

SweepKind parse_sweep_kind(const std::string& s) {
  if (s == "ud") return SweepKind::UD;
  if (s == "x") return SweepKind::X;
  if (s == "nx") return SweepKind::NX;
  throw InvalidArgument("unknown sweep variant '" + s + "' (ud, x, nx)");
}
BoundaryKind parse_boundary(const std::string& s) {
  if (s == "pml") return BoundaryKind::Pml;
  if (s == "sponge") return BoundaryKind::Sponge;
  throw InvalidArgument("unknown boundary '" + s + "' (pml, sponge)");
}
ModelSource parse_model_source(const std::string& s) {
  if (s == "constant") return ModelSource::Constant;
  if (s == "wedge") return ModelSource::Wedge;
  if (s == "file") return ModelSource::File;
  throw InvalidArgument("unknown model '" + s + "' (constant, wedge, file)");
}
CoarseSolverKind parse_coarse_solver(const std::string& s) {
  if (s == "exact") return CoarseSolverKind::Exact;
  if (s == "sweep") return CoarseSolverKind::Sweep;
  throw InvalidArgument("unknown coarse solver '" + s + "' (exact, sweep)");
}
RhsKind parse_rhs(const std::string& s) {
  if (s == "point") return RhsKind::Point;
  if (s == "random") return RhsKind::Random;
  throw InvalidArgument("unknown right-hand side '" + s + "' (point, random)");
}

void validate(const ExperimentConfig& c) {
  require(c.dim == 2 || c.dim == 3, "experiments run in 2 or 3 dimensions");
  require(c.n >= 4 && c.n % 2 == 0, "grid size must be even and at least 4");
  require(c.ppw > 0.0, "points per wavelength must be positive");
  require(!c.freq || *c.freq > 0.0, "frequency must be positive");
  require(c.model != ModelSource::File || !c.model_path.empty(), "file model needs a path");
  require(c.model != ModelSource::File || static_cast<int>(c.model_dims.size()) == c.dim,
          "file model needs one dimension per axis");
  require(c.rhs != RhsKind::Random || c.seed.has_value(), "random right-hand side needs a seed");
  require(c.nu >= 0 && c.omega_jac >= 0.0 && c.omega_jac <= 1.0, "invalid smoother settings");
  require(c.tol > 0.0 && c.max_iter >= 1, "invalid GMRES settings");
  for (int a = 0; a < c.dim; ++a) {
    require(c.source[a] >= 0.0 && c.source[a] <= 1.0, "source position must lie in the unit box");
  }
}

double frequency(const ExperimentConfig& c) { return c.freq ? *c.freq : c.n / c.ppw; }

VelocityGrid load_model(const std::string& path, const std::vector<int>& dims) {
  require(!dims.empty(), "velocity model needs dimensions");
  std::size_t count = 1;
  for (int d : dims) {
    require(d >= 1, "velocity model dimensions must be positive");
    count *= static_cast<std::size_t>(d);
  }
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot open velocity model '" + path + "'");
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != count * 4) {
    throw InvalidArgument("velocity model '" + path + "' has " + std::to_string(size) + " bytes, expected " +
                          std::to_string(count * 4));
  }
  in.seekg(0);
  std::vector<float> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(size));
  VelocityGrid g{dims, std::vector<double>(count)};
  for (std::size_t i = 0; i < count; ++i) {
    if (!(raw[i] > 0.0f) || !std::isfinite(raw[i])) {
      throw InvalidArgument("velocity model: nonpositive or invalid speed at flat index " + std::to_string(i));
    }
    g.speed[i] = raw[i];
  }
  return g;
}

void save_model(const std::string& path, const VelocityGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write velocity model '" + path + "'");
  for (double v : grid.speed) {
    const float f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), 4);
  }
}

double wedge_speed(int dim, const std::array<double, 3>& x) {
  const double depth = x[dim - 1];
  const double lateral = x[0];
  if (depth < 0.3 + 0.2 * lateral) return 1.0;
  if (depth < 0.75 - 0.25 * lateral) return 1.5;
  return 2.0;
}

Mesh experiment_mesh(const ExperimentConfig& c) {
  const double h = 1.0 / c.n;
  const AbsorbingLayerSpec layer = c.boundary == BoundaryKind::Pml
                                       ? AbsorbingLayerSpec::pml(c.pml_width, c.pml_strength > 0.0
                                                                                  ? c.pml_strength
                                                                                  : default_pml_strength(c.pml_width))
                                       : AbsorbingLayerSpec::sponge(c.sponge_width, c.sponge_gamma);
  return build_mesh(c.dim, c.n, h, layer);
}

std::vector<double> experiment_speed(const ExperimentConfig& c, const Mesh& mesh) {
  const auto s = mesh.shape();
  std::optional<VelocityGrid> grid;
  if (c.model == ModelSource::File) grid = load_model(c.model_path, c.model_dims);
  std::vector<double> speed(mesh.unknowns(), 1.0);
  for (int k = 0; k < s[2]; ++k) {
    for (int j = 0; j < s[1]; ++j) {
      for (int i = 0; i < s[0]; ++i) {
        const int idx[3] = {i, j, k};
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < c.dim; ++a) {
          const MeshAxis& ax = mesh.axes[a];
          const double box = ax.length() - ax.lo_thickness() - ax.hi_thickness();
          x[a] = std::clamp(ax.node_x(idx[a] + 1) / box, 0.0, 1.0);
        }
        double v = 1.0;
        if (c.model == ModelSource::Wedge) {
          v = wedge_speed(c.dim, x);
        } else if (grid) {
          std::size_t flat = 0, stride = 1;
          for (int a = 0; a < c.dim; ++a) {
            const int d = grid->dims[a];
            const int g = static_cast<int>(std::lround(x[a] * (d - 1)));
            flat += stride * static_cast<std::size_t>(std::clamp(g, 0, d - 1));
            stride *= static_cast<std::size_t>(d);
          }
          v = grid->speed[flat];
        }
        speed[linear_index(s, i, j, k)] = v;
      }
    }
  }
  return speed;
}

CVector experiment_rhs(const ExperimentConfig& c, const Mesh& mesh, const Discretization& fine) {
  const auto s = mesh.shape();
  const double h = 1.0 / c.n;
  CVector f(mesh.unknowns(), cplx(0.0));
  if (c.rhs == RhsKind::Point) {
    int idx[3] = {0, 0, 0};
    for (int a = 0; a < c.dim; ++a) {
      const int node = mesh.axes[a].lo.cells() + static_cast<int>(std::lround(c.source[a] * c.n));
      idx[a] = std::clamp(node - 1, 0, s[a] - 1);
    }
    f[linear_index(s, idx[0], idx[1], idx[2])] = 1.0 / std::pow(h, c.dim);
  } else {
    std::mt19937_64 rng(*c.seed);
    std::normal_distribution<double> normal;
    for (cplx& v : f) {
      const double re = normal(rng);
      v = cplx(re, normal(rng));
    }
  }
  const CVector w = fd_rhs_weights(fine);
  for (std::size_t n = 0; n < f.size(); ++n) f[n] *= w[n];
  return f;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

}  // namespace

ResultRow run_experiment(const ExperimentConfig& c, CVector* solution) {
  validate(c);
  ResultRow row;
  row.config = c;
  const auto t0 = std::chrono::steady_clock::now();
  const Mesh mesh = stage("mesh", [&] { return experiment_mesh(c); });
  const double omega = 2.0 * std::numbers::pi * frequency(c);
  const WaveModel model =
      stage("model", [&] { return WaveModel::from_velocity(mesh, omega, experiment_speed(c, mesh)); });

  TgspOptions opt;
  SmootherConfig sm = SmootherConfig::defaults(c.dim);
  if (c.nu > 0) sm.nu = c.nu;
  if (c.omega_jac > 0.0) sm.omega_jac = c.omega_jac;
  opt.smoother = sm;
  opt.coarse = c.coarse;
  opt.partition.layer_width = c.dd_width;
  opt.partition.layer_strength = c.dd_strength;
  opt.partition.subdomains = c.subdomains;
  opt.partition.concurrent = c.concurrent;
  TwoGridSetup setup = stage("setup", [&] {
    if (c.variant == SweepKind::X) opt.variant = SweepVariant::x();
    if (c.variant == SweepKind::NX) {
      const int n1 = coarsen_mesh(mesh).mesh.shape()[0];
      const int J = c.subdomains > 0 ? c.subdomains : n1 / (2 * c.dd_width + 1);
      opt.variant = SweepVariant::nx(J, c.nx_cells);
    }
    return build_two_grid(mesh, model, opt);
  });
  const CVector f = stage("rhs", [&] { return experiment_rhs(c, mesh, setup.fine_disc); });
  row.setup_time = seconds_since(t0);
  row.unknowns = mesh.unknowns();
  if (const Partition* p = setup.cycle->partition()) row.subdomains = p->subdomains();

  const TwoGridCycle& cycle = *setup.cycle;
  GmresConfig gc;
  gc.tol = c.tol;
  gc.max_iter = c.max_iter;
  SolveReport rep;
  const CVector u = stage("solve", [&] {
    return gmres([&](const CVector& x) { return cycle.fine_operator().apply(x); },
                 [&](const CVector& x) { return cycle.apply(x); }, f, gc, rep);
  });
  row.iterations = rep.iterations;
  row.converged = rep.converged;
  row.final_residual = rep.true_residual;
  row.residual_history = rep.residual_history;
  row.solve_time = rep.wall_time;
  if (!c.field_path.empty()) stage("output", [&] { write_field(c.field_path, u); });
  if (solution) *solution = u;
  return row;
}

void write_field(const std::string& path, const CVector& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write field '" + path + "'");
  out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(cplx)));
}

CVector read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error("cannot open field '" + path + "'");
  const auto size = static_cast<std::size_t>(in.tellg());
  require(size % sizeof(cplx) == 0, "field file size is not a multiple of 16 bytes");
  in.seekg(0);
  CVector u(size / sizeof(cplx));
  in.read(reinterpret_cast<char*>(u.data()), static_cast<std::streamsize>(size));
  return u;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string csv_header() {
  return "dim,n,freq,ppw,model,boundary,pml_width,sponge_width,variant,nx_cells,dd_width,dd_subdomains,coarse,nu,"
         "omega_jac,rhs,seed,tol,max_iter,iterations,converged,final_residual,subdomains,unknowns,"
         "setup_time,solve_time,history,error";
}

std::string row_key(const ExperimentConfig& c) {
  std::ostringstream os;
  os << c.dim << ',' << c.n << ',' << fmt(frequency(c)) << ',' << fmt(c.ppw) << ',' << to_string(c.model) << ','
     << to_string(c.boundary) << ',' << c.pml_width << ',' << c.sponge_width << ',' << to_string(c.variant) << ','
     << c.nx_cells << ',' << c.dd_width << ',' << c.subdomains << ',' << to_string(c.coarse) << ',' << c.nu << ',' << fmt(c.omega_jac)
     << ',' << to_string(c.rhs) << ',' << (c.seed ? std::to_string(*c.seed) : "") << ',' << fmt(c.tol) << ','
     << c.max_iter;
  return os.str();
}

std::string csv_row(const ResultRow& r) {
  std::ostringstream os;
  os << row_key(r.config) << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << ','
     << fmt(r.final_residual) << ',' << r.subdomains << ',' << r.unknowns << ',' << fmt(r.setup_time) << ','
     << fmt(r.solve_time) << ',';
  for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
    os << (i ? ";" : "") << fmt(r.residual_history[i]);
  }
  os << ',' << clean(r.error);
  return os.str();
}

ResultRow parse_csv_row(const std::string& line) {
  const auto f = split(line, ',');
  require(f.size() == 28, "results row has " + std::to_string(f.size()) + " fields, expected 28");
  ResultRow r;
  ExperimentConfig& c = r.config;
  c.dim = std::stoi(f[0]);
  c.n = std::stoi(f[1]);
  c.freq = std::stod(f[2]);
  c.ppw = std::stod(f[3]);
  c.model = parse_model_source(f[4]);
  c.boundary = parse_boundary(f[5]);
  c.pml_width = std::stoi(f[6]);
  c.sponge_width = std::stoi(f[7]);
  c.variant = parse_sweep_kind(f[8]);
  c.nx_cells = std::stoi(f[9]);
  c.dd_width = std::stoi(f[10]);
  c.subdomains = std::stoi(f[11]);
  c.coarse = parse_coarse_solver(f[12]);
  c.nu = std::stoi(f[13]);
  c.omega_jac = std::stod(f[14]);
  c.rhs = parse_rhs(f[15]);
  if (!f[16].empty()) c.seed = std::stoull(f[16]);
  c.tol = std::stod(f[17]);
  c.max_iter = std::stoi(f[18]);
  r.iterations = std::stoi(f[19]);
  r.converged = f[20] == "true";
  r.final_residual = std::stod(f[21]);
  r.subdomains = std::stoi(f[22]);
  r.unknowns = std::stoull(f[23]);
  r.setup_time = std::stod(f[24]);
  r.solve_time = std::stod(f[25]);
  if (!f[26].empty()) {
    for (const auto& v : split(f[26], ';')) r.residual_history.push_back(std::stod(v));
  }
  r.error = f[27];
  return r;
}

std::vector<ResultRow> run_table(const TableSpec& spec, const std::string& csv_path, std::ostream* log) {
  std::vector<ResultRow> rows;
  std::set<std::string> done;
  {
    std::ifstream in(csv_path);
    std::string line;
    if (in && std::getline(in, line)) {
      require(line == csv_header(), "existing results file '" + csv_path + "' has a different header");
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(parse_csv_row(line));
        done.insert(row_key(rows.back().config));
      }
    }
  }
  const bool fresh = rows.empty() && !std::ifstream(csv_path).good();
  std::ofstream out(csv_path, std::ios::app);
  if (!out) throw Error("cannot write results file '" + csv_path + "'");
  if (fresh) out << csv_header() << '\n' << std::flush;

  auto or_base = [](auto list, auto base) { return list.empty() ? decltype(list){base} : list; };
  for (int n : or_base(spec.sizes, spec.base.n)) {
    for (BoundaryKind b : or_base(spec.boundaries, spec.base.boundary)) {
      for (int w : or_base(spec.dd_widths, spec.base.dd_width)) {
        for (SweepKind v : or_base(spec.variants, spec.base.variant)) {
          ExperimentConfig c = spec.base;
          c.n = n;
          c.boundary = b;
          c.dd_width = w;
          c.variant = v;
          if (done.count(row_key(c))) {
            if (log) *log << "skip " << row_key(c) << '\n';
            continue;
          }
          ResultRow r;
          try {
            r = run_experiment(c);
          } catch (const std::exception& e) {
            r = ResultRow{};
            r.config = c;
            r.converged = false;
            r.error = e.what();
          }
          out << csv_row(r) << '\n' << std::flush;
          if (log) {
            *log << row_key(c) << " -> " << r.iterations << (r.converged ? "" : " (not converged)")
                 << (r.error.empty() ? "" : " " + r.error) << '\n';
          }
          done.insert(row_key(c));
          rows.push_back(std::move(r));
        }
      }
    }
  }
  return rows;
}

}  // namespace helmsweep
