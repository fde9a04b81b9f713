#include <cmath>
#include <numbers>

#include "common.hpp"
#include "doctest.h"
#include "nehari/errors.hpp"
#include "nehari/solve.hpp"

using namespace nehari;
using std::numbers::pi;

namespace {

ProblemParams constant_params(double lambda, int n = 101) {
  return make_params(test::unit_grid(n), test::constant(-1.0), test::constant(1.0), 4.0, 1.5,
                     lambda);
}

ProblemParams loop_params(double lambda, int n = 101) {
  return make_params(test::unit_grid(n), test::loop_a(), test::loop_b(), 4.0, 1.5, lambda);
}

double identity_sum(const ScalarField& u, const ProblemParams& pr) {
  return std::abs(integrate(nonlinearity(u, pr), pr.grid()));
}

}  // namespace

TEST_CASE("Newton from zero with epsilon > 0 stops immediately") {
  ProblemParams pr = loop_params(0.3).with_epsilon(0.1);
  SolveReport r = newton_solve(Vec::Zero(101), pr, 1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
  CHECK(r.u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Newton recovers the constant solution") {
  const double lam = 0.01;
  ProblemParams pr = constant_params(lam, 201);
  const double c = std::pow(lam, 0.4);
  CHECK(c == doctest::Approx(0.158489319246111).epsilon(1e-12));
  SolveReport r = newton_solve(Vec::Constant(201, 0.9 * c), pr, 1e-12, 50);
  CHECK(r.converged);
  CHECK(r.final_residual_norm <= 1e-12);
  CHECK((r.u.array() - c).abs().maxCoeff() < 1e-12);

  Vec u0(201);
  for (int i = 0; i < 201; ++i) u0[i] = c * (1 + 0.1 * std::cos(2 * pi * pr.grid().coord(i, 0)));
  SolveReport r2 = newton_solve(u0, pr, 1e-12, 50);
  CHECK(r2.converged);
  CHECK((r2.u.array() - c).abs().maxCoeff() < 1e-10);
}

TEST_CASE("Newton reports failure as DIVERGED") {
  ProblemParams pr = constant_params(0.01);
  try {
    newton_solve(Vec::Constant(101, 0.5), pr, 1e-12, 0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Diverged);
  }
}

TEST_CASE("plus minimizer with constant coefficients is the constant solution") {
  const double lam = 0.05;
  ProblemParams pr = constant_params(lam);
  SolveReport r = nehari_minimize(pr, NehariSign::Plus, 3, 1);
  CHECK(r.converged);
  CHECK((r.u.array() - std::pow(lam, 0.4)).abs().maxCoeff() < 1e-9);
  CHECK(r.energies.I < 0);
  CHECK(r.nehari_class == NehariClass::Nplus);
}

TEST_CASE("minus minimizer with sign-changing a has positive energy") {
  for (double lam : {0.02, 0.005}) {
    ProblemParams pr = loop_params(lam);
    SolveReport r = nehari_minimize(pr, NehariSign::Minus, 4, 3);
    CHECK(r.converged);
    CHECK(r.energies.I > 0);
    CHECK(r.nehari_class == NehariClass::Nminus);
    const double p = pr.p, q = pr.q;
    double lhs = (0.5 - 1 / p) * r.energies.E - lam * (1 / q - 1 / p) * r.energies.B;
    CHECK(std::abs(lhs - r.energies.I) <= 1e-10 * std::abs(r.energies.I) + 1e-12);
  }
}

TEST_CASE("minimizer invariants: sign, class, solvability identity") {
  ProblemParams pr = loop_params(0.02);
  for (NehariSign s : {NehariSign::Plus, NehariSign::Minus}) {
    SolveReport r = nehari_minimize(pr, s, 4, 17);
    CHECK(r.u.minCoeff() >= -1e-10 * r.u.cwiseAbs().maxCoeff());
    CHECK(r.nehari_class == (s == NehariSign::Plus ? NehariClass::Nplus : NehariClass::Nminus));
    double r1 = l1_norm(residual(r.u, pr), pr.grid());
    CHECK(identity_sum(r.u, pr) <= r1 + 1e-12);
  }
}

TEST_CASE("without admissible directions the minimizer refuses to start") {
  ProblemParams pr = make_params(test::unit_grid(51), test::constant(-1.0), test::constant(-1.0),
                                 4.0, 1.5, 0.1);
  try {
    nehari_minimize(pr, NehariSign::Plus, 3, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoAdmissibleDirection);
  }
}

TEST_CASE("ground state preconditions") {
  ProblemParams pos_a = make_params(test::unit_grid(51), test::constant(1.0), test::loop_b(),
                                    4.0, 1.5);
  try {
    ground_state(pos_a, GroundStateKind::PureA, 2, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  ProblemParams pos_b = make_params(test::unit_grid(51), test::loop_a(), test::constant(1.0),
                                    4.0, 1.5);
  CHECK_THROWS_AS(ground_state(pos_b, GroundStateKind::PureB, 2, 1), Error);
}

TEST_CASE("pure_b ground state for b = cos(2 pi x) - 0.25") {
  ProblemParams pr = make_params(test::unit_grid(201), test::loop_a(),
                                 test::cos_plus(2, 1.0, -0.25), 4.0, 1.5);
  SolveReport r = ground_state(pr, GroundStateKind::PureB, 6, 5);
  CHECK(r.converged);
  CHECK(r.u.maxCoeff() > 0);
  CHECK(r.u.minCoeff() >= 0);
  CHECK(std::abs(r.energies.E - r.energies.B) <= 1e-8 * r.energies.E);
}

TEST_CASE("pure_a ground state solves -u'' = a u^{p-1}") {
  ProblemParams pr = loop_params(0.0, 201);
  SolveReport r = ground_state(pr, GroundStateKind::PureA, 4, 2);
  CHECK(r.converged);
  CHECK(r.u.minCoeff() > 0);
  CHECK(std::abs(r.energies.E - r.energies.A) <= 1e-8 * r.energies.E);
  CHECK(r.energies.I > 0);
}

TEST_CASE("ground state mesh refinement agrees to O(h^2)") {
  auto solve_at = [](int n) {
    ProblemParams pr = make_params(test::unit_grid(n), test::loop_a(), test::cos_plus(1, 1.0, -0.1),
                                   3.0, 1.5);
    return ground_state(pr, GroundStateKind::PureB, 4, 9);
  };
  SolveReport a = solve_at(101), b = solve_at(201), c = solve_at(401);
  double d1 = 0, d2 = 0;
  for (int i = 0; i < 101; ++i) {
    d1 = std::max(d1, std::abs(a.u[i] - b.u[2 * i]));
    d2 = std::max(d2, std::abs(b.u[2 * i] - c.u[4 * i]));
  }
  CHECK(d1 < 1e-2 * a.u.maxCoeff());
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("u1 energy upper bound exponent when the integral of b is negative") {
  std::vector<double> lams{1e-3, 3e-3, 1e-2, 3e-2};
  std::vector<double> logI, logL;
  for (double lam : lams) {
    ProblemParams pr = make_params(test::unit_grid(101), test::loop_a(),
                                   test::cos_plus(1, 1.0, -0.1), 4.0, 1.5, lam);
    MinimizeOptions o;
    o.newton_tol = 1e-10 * std::pow(lam, 2.0);
    SolveReport r = nehari_minimize(pr, NehariSign::Plus, 3, 4, o);
    CHECK(r.energies.I < 0);
    logI.push_back(std::log(-r.energies.I));
    logL.push_back(std::log(lam));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < lams.size(); ++i) {
    mx += logL[i] / lams.size();
    my += logI[i] / lams.size();
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < lams.size(); ++i) {
    sxy += (logL[i] - mx) * (logI[i] - my);
    sxx += (logL[i] - mx) * (logL[i] - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(2.0 / (2.0 - 1.5)).epsilon(0.10));
}
