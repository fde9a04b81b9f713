/**
 * @file continuation.hpp
 * Pseudo-arclength continuation of the ε-regularized problem, departure
 * from the two bifurcation points on the trivial line, the ε-homotopy
 * toward the loop continuum and asymptotic scaling fits.
 */
#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nehari/functional.hpp"

namespace nehari {

enum class BranchEvent { None, Start, End, Fold, LambdaZeroCrossing };
const char* branch_event_name(BranchEvent e);

struct BranchPoint {
  double lambda = 0.0;
  ScalarField u;
  double sup_norm = 0.0;
  double l2_norm = 0.0;
  std::optional<double> gamma1;
  NehariClass nehari_class = NehariClass::NotOnNehari;
  double arclength = 0.0;
  BranchEvent event = BranchEvent::None;
  double residual_norm = 0.0;  ///< strong-form discrete L² residual
};

enum class BranchOrigin { FromZero, FromLambdaEps };
const char* branch_origin_name(BranchOrigin o);

struct ContinuationSettings {
  double ds_init = 0.02;
  double ds_min = 1e-6;
  double ds_max = 0.3;
  double newton_tol = 1e-9;
  int max_steps = 5000;
  int direction = 1;
  int newton_max_iter = 8;
  /// Bounding box |λ| ≤ lambda_max, ‖u‖∞ ≤ sup_max; tracing stops on exit.
  double lambda_max = std::numeric_limits<double>::infinity();
  double sup_max = std::numeric_limits<double>::infinity();
  bool compute_gamma1 = true;

  /// Throws InvalidArgument unless 0 < ds_min ≤ ds_init ≤ ds_max, tol > 0, direction = ±1.
  void validate() const;
  /// Departure amplitude 10·sqrt(newton_tol).
  double departure_scale() const;
};

struct Branch {
  double epsilon = 0.0;
  BranchOrigin origin = BranchOrigin::FromZero;
  std::vector<BranchPoint> points;
  std::optional<double> lambda_eps;
  /// Distance in the (λ, ‖u‖∞) plane from the interpolated return to u = 0
  /// to the other bifurcation point.
  std::optional<double> closed_loop_gap;
  std::optional<double> closure_lambda;  ///< λ where the branch returns to u = 0
  std::string termination;               ///< closed, box, max_steps
  int steps = 0;

  int count(BranchEvent e) const;
};

struct Departure {
  BranchPoint point;
  double s = 0.0;               ///< amplitude used (mean of u, or φ-coefficient)
  int attempts = 0;             ///< number of amplitudes tried in the decade sweep
  double predicted_lambda = 0.0;
  ScalarField tangent_u;        ///< unit tangent in the product norm
  double tangent_lambda = 0.0;
};

/// -ε^{2-q} ∫a / ∫(b-ε): limit of λ/s^{p-2} along the branch from (0,0).
double departure_slope_formula(const ProblemParams& params);

/// Branch point near (0,0) with mean(u) = s. DOMAIN if ∫(b-ε) = 0 or ε = 0;
/// DEPARTURE_FAILED if no amplitude of the decade sweep converges.
Departure depart_from_zero(const ProblemParams& params, const ContinuationSettings& settings);
/// Branch point with mean(u) = s exactly (no sweep).
Departure depart_from_zero_at(const ProblemParams& params, double s,
                              const ContinuationSettings& settings);

/// Branch point near (λ_ε, 0) with ⟨φ,u⟩_W = s⟨φ,φ⟩_W.
Departure depart_from_lambda_eps(const ProblemParams& params,
                                 const ContinuationSettings& settings);
Departure depart_from_lambda_eps_at(const ProblemParams& params, double s,
                                    const ContinuationSettings& settings);

struct SlopeEstimate {
  std::vector<double> s;
  std::vector<double> slopes;  ///< λ(s)/s^{p-2}
  double extrapolated = 0.0;   ///< Richardson limit s → 0
  double formula = 0.0;
};
/// Measured departure slopes at s, s/2, s/4, ... and their Richardson limit.
SlopeEstimate measure_departure_slope(const ProblemParams& params, double s0, int levels,
                                      const ContinuationSettings& settings);

struct InterceptEstimate {
  double lambda_eps = 0.0;        ///< eigensolver value
  double lambda_s = 0.0;          ///< γ(s)
  double lambda_half = 0.0;       ///< γ(s/2)
  double lambda_quarter = 0.0;    ///< γ(s/4)
  double extrapolated = 0.0;      ///< (8γ(s/4) - 6γ(s/2) + γ(s)) / 3
  double sup_ratio = 0.0;         ///< ‖u(s/4)‖∞ / (s/4)
  double phi_sup = 0.0;           ///< ‖φ‖∞ of the L²-normalized eigenfunction
  double min_max_ratio = 0.0;     ///< min u / max u at the departure point
};
/// Richardson estimate of γ(0) from the departures at s, s/2 and s/4.
InterceptEstimate measure_lambda_eps_intercept(const ProblemParams& params, double s,
                                               const ContinuationSettings& settings);

/// Pseudo-arclength trace starting from a departure. STEP_COLLAPSE when the
/// step falls below ds_min with a failing corrector.
Branch trace_branch(const Departure& start, BranchOrigin origin, const ProblemParams& params,
                    const ContinuationSettings& settings);

/// Hausdorff distance between two branch polylines in the (λ, ‖u‖∞) plane.
double hausdorff_distance(const Branch& a, const Branch& b);

struct LoopDiagnostics {
  std::vector<double> epsilons;
  std::vector<std::optional<double>> lambda_eps;
  std::vector<std::optional<double>> gaps;
  std::vector<double> hausdorff;  ///< between consecutive branches
  std::vector<std::optional<double>> crossing_norms;  ///< smallest ‖u‖∞ at λ = 0 per ε
  std::vector<std::string> errors;  ///< per ε, empty on success
  bool lambda_eps_decreasing = false;
  bool hausdorff_decreasing = false;
};

struct HomotopyResult {
  std::vector<std::optional<Branch>> branches;
  LoopDiagnostics diagnostics;
};

/// Traces C_*(ε) from (0,0) for every ε; epsilons must strictly decrease.
/// Runs branches in parallel, capped by NEHARI_LOOP_THREADS.
HomotopyResult epsilon_homotopy(const ProblemParams& params, const std::vector<double>& eps_list,
                                const ContinuationSettings& settings);

enum class ScalingLaw { Concave2mq, ConvexPmq };

struct ScalingFit {
  double exponent = 0.0;
  double constant = 0.0;      ///< exp of the log-log intercept
  double fit_residual = 0.0;  ///< max |log-log residual|
  std::vector<double> profile_errors;  ///< ‖λ^{-κ}u - ref‖∞ / ‖ref‖∞ per sample
};
/// Least-squares fit of log‖u‖∞ against log λ and rescaled profile distances,
/// κ = 1/(2-q) or 1/(p-q). INSUFFICIENT_DATA with fewer than 4 samples or a
/// λ span below two decades. A one-element reference is a constant profile.
ScalingFit scaling_fit(const std::vector<std::pair<double, ScalarField>>& samples, ScalingLaw law,
                       double p, double q, const ScalarField& reference);

}  // namespace nehari
