#pragma once

// Right-preconditioned GMRES (modified Gram-Schmidt, Givens rotations).

#include <functional>
#include <optional>
#include <string>

#include "helmsweep/types.hpp"

namespace helmsweep {

using LinearMap = std::function<CVector(const CVector&)>;

struct GmresConfig {
  double tol = 1e-6;
  int max_iter = 200;
  std::optional<int> restart;  // full GMRES when empty
};

void validate(const GmresConfig& c);

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  // ||f - A u_i|| / ||f||, iterations + 1 entries
  bool converged = false;
  double wall_time = 0.0;  // seconds
  double true_residual = 0.0;  // recomputed from the returned u
  std::string note;            // breakdown or stagnation remarks
};

// Solves A M v = f and returns u = M v. An empty preconditioner means M = I.
CVector gmres(const LinearMap& apply_A, const LinearMap& apply_M, const CVector& f,
              const GmresConfig& config, SolveReport& report);

}  // namespace helmsweep
