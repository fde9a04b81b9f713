/**
 * @file solve.hpp
 * Newton solves, Nehari-manifold minimizers and ground states.
 */
#pragma once

#include <cstdint>

#include "nehari/functional.hpp"

namespace nehari {

struct SolveReport {
  ScalarField u;
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
  EnergyTriple energies;
  NehariClass nehari_class = NehariClass::NotOnNehari;
};

struct NewtonOptions {
  /// Fraction-to-boundary damping and projection onto u ≥ 0.
  bool nonnegative = false;
  /// Throw DIVERGED instead of returning an unconverged report.
  bool throw_on_failure = true;
};

SolveReport newton_solve(const ScalarField& u0, const ProblemParams& params, double tol = 1e-10,
                         int max_iter = 100, const NewtonOptions& opts = {});

enum class NehariSign { Plus, Minus };

struct MinimizeOptions {
  int max_gradient_iters = 3000;
  double newton_tol = 1e-10;
  int newton_max_iter = 200;
};

/// Minimizes I_λ over N_λ^+ (Plus) or N_λ^- (Minus) from seeded random
/// non-negative directions. Requires ε = 0.
SolveReport nehari_minimize(const ProblemParams& params, NehariSign sign, int n_starts,
                            std::uint64_t rng_seed, const MinimizeOptions& opts = {});

enum class GroundStateKind { PureA, PureB };

/// Parameters of the pure problem: λ = 0 for PureA; a = 0, λ = 1 for PureB.
ProblemParams pure_problem(const ProblemParams& params, GroundStateKind which);

SolveReport ground_state(const ProblemParams& params, GroundStateKind which, int n_starts,
                         std::uint64_t rng_seed, const MinimizeOptions& opts = {});

}  // namespace nehari
