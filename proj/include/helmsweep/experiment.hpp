#pragma once

// Experiment harness behind the command-line tool: configuration, velocity
// models, right-hand sides, one preconditioned GMRES run per configuration,
// CSV result rows and batch tables.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "helmsweep/discretize.hpp"
#include "helmsweep/krylov.hpp"
#include "helmsweep/mesh.hpp"
#include "helmsweep/sweepdd.hpp"
#include "helmsweep/twogrid.hpp"

namespace helmsweep {

enum class ModelSource { Constant, Wedge, File };
enum class BoundaryKind { Pml, Sponge };
enum class RhsKind { Point, Random };

struct ExperimentConfig {
  int dim = 2;
  int n = 256;                 // interior cells per axis on the unit box
  std::optional<double> freq;  // cycles per unit length; n / ppw when empty
  double ppw = 10.0;           // points per wavelength at speed 1

  ModelSource model = ModelSource::Constant;
  std::string model_path;
  std::vector<int> model_dims;

  BoundaryKind boundary = BoundaryKind::Pml;
  int pml_width = 4;
  double pml_strength = 0.0;  // 0 selects 5 per cell
  int sponge_width = 36;
  double sponge_gamma = 1.0;

  SweepKind variant = SweepKind::UD;
  int nx_cells = 2;
  int dd_width = 4;
  int subdomains = 0;  // 0 selects floor(N1 / (2 dd_width + 1)) on the coarse grid
  double dd_strength = 0.0;
  bool concurrent = false;

  int nu = 0;              // 0 selects the dimension default
  double omega_jac = 0.0;  // 0 selects the dimension default
  CoarseSolverKind coarse = CoarseSolverKind::Sweep;

  double tol = 1e-6;
  int max_iter = 200;

  RhsKind rhs = RhsKind::Point;
  std::array<double, 3> source{0.5, 0.5, 0.5};  // fractions of the box
  std::optional<std::uint64_t> seed;

  std::string field_path;  // solution dump, interleaved float64
};

void validate(const ExperimentConfig& c);
double frequency(const ExperimentConfig& c);

struct ResultRow {
  ExperimentConfig config;
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
  int subdomains = 0;
  std::size_t unknowns = 0;
  double setup_time = 0.0;
  double solve_time = 0.0;
  std::vector<double> residual_history;
  std::string error;  // stage-prefixed message when the run failed
};

// Velocity samples over the physical box, x fastest.
struct VelocityGrid {
  std::vector<int> dims;
  std::vector<double> speed;
};

// Reads little-endian float32 velocities; the file must hold prod(dims) values.
VelocityGrid load_model(const std::string& path, const std::vector<int>& dims);
void save_model(const std::string& path, const VelocityGrid& grid);
// Three layers (1.0, 1.5, 2.0) with dipping interfaces along the last axis.
double wedge_speed(int dim, const std::array<double, 3>& x);

Mesh experiment_mesh(const ExperimentConfig& c);
// Speed per unknown; absorbing layers take the value at the nearest box point.
std::vector<double> experiment_speed(const ExperimentConfig& c, const Mesh& mesh);
CVector experiment_rhs(const ExperimentConfig& c, const Mesh& mesh, const Discretization& fine);

ResultRow run_experiment(const ExperimentConfig& c, CVector* solution = nullptr);

void write_field(const std::string& path, const CVector& u);
CVector read_field(const std::string& path);

std::string csv_header();
std::string csv_row(const ResultRow& r);
ResultRow parse_csv_row(const std::string& line);
// Identifies a configuration within a table.
std::string row_key(const ExperimentConfig& c);

struct TableSpec {
  ExperimentConfig base;
  std::vector<int> sizes;
  std::vector<int> dd_widths;
  std::vector<SweepKind> variants;
  std::vector<BoundaryKind> boundaries;
};

// Runs every missing cell of the product sizes x boundaries x dd_widths x
// variants, appending rows to csv_path. Failing cells are recorded with
// converged = false. Returns all rows of the file.
std::vector<ResultRow> run_table(const TableSpec& spec, const std::string& csv_path,
                                 std::ostream* log = nullptr);

std::string to_string(SweepKind k);
std::string to_string(BoundaryKind k);
std::string to_string(ModelSource k);
std::string to_string(CoarseSolverKind k);
std::string to_string(RhsKind k);
SweepKind parse_sweep_kind(const std::string& s);
BoundaryKind parse_boundary(const std::string& s);
ModelSource parse_model_source(const std::string& s);
CoarseSolverKind parse_coarse_solver(const std::string& s);
RhsKind parse_rhs(const std::string& s);

}  // namespace helmsweep
