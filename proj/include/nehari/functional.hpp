/**
 * @file functional.hpp
 * Energies, residuals, Jacobians and fibering-map analysis for
 *   -Δu = λ b |u|^{q-2}u + a |u|^{p-2}u            (ε = 0)
 *   -Δu = a |u|^{p-2}u + λ (b-ε) |u+ε|^{q-2}u      (ε > 0)
 * with homogeneous Neumann conditions.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "nehari/mesh.hpp"

namespace nehari {

struct Discretization {
  Grid grid;
  DiscreteOperator op;
};

std::shared_ptr<const Discretization> make_discretization(const Grid& grid);

struct ProblemParams {
  std::shared_ptr<const Discretization> disc;
  ScalarField a, b;
  double p = 4.0;
  double q = 1.5;
  double lambda = 0.0;
  double epsilon = 0.0;

  const Grid& grid() const { return disc->grid; }
  const DiscreteOperator& op() const { return disc->op; }
  int size() const { return disc->grid.size(); }
  /// Throws InvalidArgument unless 1 < q < 2 < p, ε ≥ 0 and field sizes match.
  void validate() const;
  ProblemParams with_lambda(double lam) const;
  ProblemParams with_epsilon(double eps) const;
};

ProblemParams make_params(const Grid& grid, const CoeffSpec& a, const CoeffSpec& b, double p,
                          double q, double lambda = 0.0, double epsilon = 0.0);

struct EnergyTriple {
  double E = 0.0, A = 0.0, B = 0.0, I = 0.0;
};

EnergyTriple energies(const ScalarField& u, const ProblemParams& params);

/// B_ε(u) = ∫(b-ε)|u+ε|^{q-2}u², the ε>0 analogue of B used for labels.
double regularized_B(const ScalarField& u, const ProblemParams& params);

/// Right-hand side f(u) of -Δu = f(u).
ScalarField nonlinearity(const ScalarField& u, const ProblemParams& params);
/// ∂f/∂λ.
ScalarField nonlinearity_dlambda(const ScalarField& u, const ProblemParams& params);
/// ∂f/∂u (diagonal). For ε = 0 |u_i| is clamped below by η = 1e-12·max(1,‖u‖∞)
/// unless `clamp` is false, in which case SINGULAR_LINEARIZATION is thrown.
ScalarField nonlinearity_du(const ScalarField& u, const ProblemParams& params, bool clamp = true);

/// Strong-form residual r = Lu - f(u).
ScalarField residual(const ScalarField& u, const ProblemParams& params);
/// ‖r‖ / (‖Lu‖ + ‖a-term‖ + ‖λ-term‖) in discrete L², 0 when every term vanishes.
/// Separates genuine solutions from small fields whose terms are all tiny.
double relative_residual(const ScalarField& u, const ProblemParams& params);
/// K u - W f(u); equals W r.
ScalarField weak_residual(const ScalarField& u, const ProblemParams& params);

/// Symmetric representative S = K - W diag(f'(u)); ∂r/∂u = W⁻¹S.
DiscreteOperator jacobian(const ScalarField& u, const ProblemParams& params, bool clamp = true);

enum class NehariClass { Nplus, Nminus, Nzero, NotOnNehari };
const char* nehari_class_name(NehariClass c);

struct FiberingReport {
  double Cpq = 0.0;
  std::optional<double> tstar;
  std::optional<double> t1;  ///< root of j' with j'' > 0
  std::optional<double> t2;  ///< root of j' with j'' < 0
  std::optional<double> iu_at_tstar;
  NehariClass nehari_class = NehariClass::NotOnNehari;
};

double c_pq(double p, double q);

/// Classifies a field with the given energies (ε = 0 functional).
NehariClass nehari_classify(double E, double A, double B, double lambda, double p, double q,
                            double rel_tol = 1e-8);

/// Fibering analysis from E, A, lambda*B. Throws NO_ROOT when j' has no positive root.
FiberingReport fibering_from_energies(double E, double A, double B, double lambda, double p,
                                      double q);
FiberingReport fibering_analyze(const ScalarField& u, const ProblemParams& params);

/// j_u(t), j'_u(t), j''_u(t).
double fiber_j(double t, double E, double A, double B, double lambda, double p, double q);
double fiber_dj(double t, double E, double A, double B, double lambda, double p, double q);
double fiber_d2j(double t, double E, double A, double B, double lambda, double p, double q);

/// (-∫b/∫a)^{1/(p-q)}; DOMAIN unless ∫a<0≤∫b or ∫a>0≥∫b.
double cstar(const ProblemParams& params);

/// F(u) = C_pq E^{(p-q)/(p-2)} / (B A^{(2-q)/(p-2)}); +∞ outside E⁺∩A⁺∩B⁺.
double lambda0_functional(const ScalarField& u, const ProblemParams& params);

/// Upper estimate of λ0 by multi-start minimization of F.
double lambda0_estimate(const ProblemParams& params, int n_starts, std::uint64_t rng_seed);

}  // namespace nehari
