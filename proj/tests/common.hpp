#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "nehari/functional.hpp"

namespace nehari::test {

inline Grid unit_grid(int n) { return build_grid(1, n, {{0.0, 1.0}}); }

inline CoeffSpec constant(double c) { return CoeffSpec{{CoeffTerm::constant(c)}}; }

inline CoeffSpec cos_plus(int k, double amp, double shift) {
  return CoeffSpec{{CoeffTerm::cosine(k, amp), CoeffTerm::constant(shift)}};
}

/// -1 + 3 exp(-((x-0.5)/0.15)^2): positive on a middle subinterval, ∫ < 0.
inline CoeffSpec loop_a() {
  return CoeffSpec{{CoeffTerm::constant(-1.0), CoeffTerm::bump(0.5, 0.15, 3.0)}};
}

/// cos(πx) - 0.05: positive on the left, ∫ = -0.05.
inline CoeffSpec loop_b() { return cos_plus(1, 1.0, -0.05); }

/// Dense smallest eigenvalues of the pencil (K, W) in ascending order.
inline Vec neumann_spectrum(const Grid& g) {
  DiscreteOperator op = laplacian_neumann(g);
  Vec is = op.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd a = is.asDiagonal() * Eigen::MatrixXd(op.stiffness) * is.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace nehari::test
