/**
 * @file checks.hpp
 * Closed-form a priori bounds and identities used as cross-validation gates:
 * the λ bound for non-negative solutions, the sub/supersolution window, the
 * integrated solvability identity and the positive floor on Ω^b_+.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nehari/functional.hpp"

namespace nehari {

/// Closed subinterval [lo, hi] of a 1D domain.
struct Subinterval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

/// Principal eigenvalue λ_D of -φ'' = λ a φ on the subinterval with φ = 0
/// at its ends, on the grid nodes of [lo, hi]. a ≥ 0, a ≢ 0 required.
double dirichlet_weighted_eig(const ProblemParams& params, Subinterval ball);

struct LambdaBar {
  double value = 0.0;
  double lambda1 = 0.0;   ///< λ_D(a) on the ball
  double s0 = 0.0;        ///< λ1^{1/(p-2)}
  double a_norm = 0.0;    ///< max |a| on the ball
  double b_min = 0.0;     ///< min (b - ε0) on the ball
  Subinterval ball;
};

/// λ̄ = λ1 ‖a‖_{C(B)} (s0 + ε0)^{2-q} / min_B (b - ε0): no non-negative
/// nontrivial solution exists for λ ≥ λ̄ and ε ∈ (0, ε0]. DOMAIN unless
/// a ≥ 0, a ≢ 0 and b - ε0 > 0 at every node of the ball; 1D only.
LambdaBar nonexistence_lambda_bar(const ProblemParams& params, Subinterval ball, double epsilon0);

/// Smallest λ̄ over grid-aligned subintervals inside the maximal runs where
/// the hypotheses hold; endpoints are sampled on at most `samples` nodes per run.
/// DOMAIN when no admissible subinterval exists.
LambdaBar best_lambda_bar(const ProblemParams& params, double epsilon0, int samples = 24);

struct WindowReport {
  std::optional<double> Lambda0;
  std::string reason;     ///< set when Lambda0 is absent
  ScalarField w_delta;    ///< ground state of -Δw = (b+δ)|w|^{q-2}w
  double w_sup = 0.0;
};

/// Λ0 = (δ ‖a⁺‖∞⁻¹ ‖w_δ‖∞^{q-p})^{(2-q)/(p-2)}. DOMAIN unless Ω^b_+ ≠ ∅,
/// ∫b < 0 and ∫(b+δ) < 0. Absent with a reason when a ≤ 0.
WindowReport subsupersolution_window(const ProblemParams& params, double delta, int n_starts = 6,
                                     std::uint64_t seed = 1);

/// |Σ w_i (λ b_i |u_i|^{q-2}u_i + a_i |u_i|^{p-2}u_i)|, zero for exact solutions.
double solvability_identity(const ScalarField& u, const ProblemParams& params);

struct FloorReport {
  double floor = 0.0;      ///< c = min{(λ̄ b0 / 2λ1)^{1/(2-q)}, δ̄}
  double b0 = 0.0;         ///< inf_D b
  double a0 = 0.0;         ///< sup_D a⁻
  double lambda1 = 0.0;    ///< (π/|D|)²
  double delta_bar = 0.0;  ///< root of a0 δ^{p-2} = λ1, +∞ when a0 = 0
  ScalarField phi1;        ///< sin(π(x - lo)/|D|) on D, 0 elsewhere
};

/// Positive lower barrier c·φ1 ≤ u on D for B⁺ solutions at λ ≥ λ̄. DOMAIN if b0 ≤ 0.
FloorReport no_bifurcation_floor(const ProblemParams& params, double lambda_bar, Subinterval d);

/// Named pass/fail record with its measured value.
struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct BoundsReport {
  std::optional<double> lambda_bar;
  std::string lambda_bar_reason;
  std::optional<double> Lambda0;
  std::string Lambda0_reason;
  std::vector<double> identity_residuals;
  std::vector<Verdict> verdicts;

  bool all_pass() const;
};

}  // namespace nehari
