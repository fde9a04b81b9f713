/**
 * @file mesh.hpp
 * Uniform grids, coefficient sampling, trapezoid quadrature and the
 * discrete Neumann Laplacian on an interval or rectangle.
 */
#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nehari {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Nodal values on a Grid; node index is i + n*j in 2D (x fastest).
using ScalarField = Vec;

struct Grid {
  int dim = 1;
  int n = 0;  ///< nodes per axis
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<double, 2> h{0.0, 0.0};
  Vec weights;  ///< trapezoid quadrature weights, tensor product in 2D

  int size() const { return dim == 1 ? n : n * n; }
  double measure() const;
  /// Coordinate of node `node` along `axis`.
  double coord(int node, int axis) const;
  /// Per-axis 1D weights.
  Vec axis_weights(int axis) const;
};

Grid build_grid(int dim, int n, const std::vector<std::pair<double, double>>& endpoints);

struct CoeffTerm {
  enum class Kind { Constant, Cosine, Bump, Step };
  Kind kind = Kind::Constant;
  double value = 0.0;                 // Constant
  std::array<int, 2> k{0, 0};         // Cosine: per-axis mode numbers
  double amplitude = 0.0;             // Cosine
  std::array<double, 2> center{0.0, 0.0};  // Bump
  double width = 1.0;                 // Bump
  double height = 0.0;                // Bump
  double breakpoint = 0.0;            // Step, along x
  double left = 0.0;                  // Step value for x < breakpoint
  double right = 0.0;                 // Step value for x >= breakpoint

  static CoeffTerm constant(double c);
  static CoeffTerm cosine(int k, double amplitude, int ky = 0);
  static CoeffTerm bump(double center, double width, double height, double center_y = 0.0);
  static CoeffTerm step(double breakpoint, double left, double right);

  double eval(double x, double y, const Grid& g) const;
};

struct CoeffSpec {
  std::vector<CoeffTerm> terms;
  double eval(double x, double y, const Grid& g) const;
};

struct SampledCoefficient {
  ScalarField values;
  double integral = 0.0;
};

SampledCoefficient sample_coefficient(const CoeffSpec& spec, const Grid& grid);

/// Σ_i w_i f_i.
double integrate(const ScalarField& f, const Grid& grid);

/// Discrete -Δ with homogeneous Neumann closure.
///
/// `stiffness` is the symmetric matrix K with uᵀKu = ∫|∇u|²; `mass` is the
/// diagonal of trapezoid weights W. The strong-form operator is L = W⁻¹K.
struct DiscreteOperator {
  SpMat stiffness;
  Vec mass;

  int size() const { return static_cast<int>(mass.size()); }
  /// K u in difference form Σ_j c_ij (u_i - u_j); exactly zero on constants.
  Vec stiffness_apply(const Vec& u) const;
  /// L u = W⁻¹ K u.
  Vec apply(const Vec& u) const;
  /// uᵀKu = Σ_{i<j} c_ij (u_i - u_j)².
  double dirichlet_form(const Vec& u) const;
  /// Strong-form matrix, diagonal set to minus the off-diagonal row sum.
  SpMat strong() const;
};

DiscreteOperator laplacian_neumann(const Grid& grid);

/// max_i |Σ_j M_ij| / max_ij |M_ij|.
double relative_row_sum_defect(const SpMat& m);
/// max_ij |M_ij - M_ji|.
double symmetry_defect(const SpMat& m);

/// Discrete L² norm sqrt(Σ w r²).
double l2_norm(const Vec& r, const Grid& grid);
/// Σ w |r|.
double l1_norm(const Vec& r, const Grid& grid);

}  // namespace nehari
