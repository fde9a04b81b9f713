/**
 * @file spectral.hpp
 * Principal eigenvalues of the weighted Neumann problem at u = 0 and the
 * linearized stability eigenvalue γ1 at a solution.
 */
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nehari/functional.hpp"

namespace nehari {

struct EigenReport {
  double eigenvalue = 0.0;
  ScalarField eigenfunction;  ///< unit discrete L² norm
  double residual_norm = 0.0;
  bool positive_eigenfunction = false;
  double c0_norm = 0.0;  ///< ‖φ‖∞ of the L²-normalized eigenfunction
  bool converged = false;
};

/// Number of negative eigenvalues of a symmetric sparse matrix (Sylvester inertia).
int negative_inertia(const SpMat& a);

/// Smallest eigenpair of S φ = γ W φ for symmetric S and positive diagonal W,
/// by inertia bisection followed by shifted inverse iteration.
EigenReport smallest_pencil_eig(const SpMat& s, const Vec& w, double rel_tol = 1e-10);

/// Two principal eigenvalues of Lφ = λ m ε^{q-2} φ: (0, constant) and λ_ε > 0.
std::pair<EigenReport, EigenReport> principal_eigs_weighted(const ScalarField& m, double epsilon,
                                                            const ProblemParams& params);

/// Dense generalized eigensolve of K φ = λ W m ε^{q-2} φ; smallest positive eigenvalue.
double dense_positive_principal(const ScalarField& m, double epsilon, const ProblemParams& params);

struct EpsLambda {
  double epsilon = 0.0;
  std::optional<double> lambda_eps;
  std::string error;  ///< set when lambda_eps is absent
  EigenReport eig;
};

/// λ_ε for m = b - ε per entry, ordered as given.
std::vector<EpsLambda> lambda_epsilon_curve(const ProblemParams& params,
                                            const std::vector<double>& eps_list);

enum class Stability { AsymptoticallyStable, WeaklyStable, Unstable };

/// Smallest eigenvalue of L - f'(u). Throws SINGULAR_LINEARIZATION at dead cores (ε = 0).
EigenReport gamma1(const ScalarField& u, const ProblemParams& params);
/// Dense oracle for gamma1.
double dense_gamma1(const ScalarField& u, const ProblemParams& params);
Stability classify_stability(double gamma1_value, double tol = 0.0);

}  // namespace nehari
