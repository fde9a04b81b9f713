#include <cmath>
#include <numbers>

#include "common.hpp"
#include "doctest.h"
#include "nehari/checks.hpp"
#include "nehari/errors.hpp"
#include "nehari/random_fields.hpp"
#include "nehari/solve.hpp"

using namespace nehari;
using std::numbers::pi;

namespace {

ProblemParams unit_a(double eps = 0.0) {
  return make_params(test::unit_grid(401), test::constant(1.0), test::cos_plus(1, 0.5, 1.0), 4.0,
                     1.5, 0.0, eps);
}

}  // namespace

TEST_CASE("Dirichlet eigenvalue of [0.25, 0.75] with unit weight") {
  ProblemParams pr = unit_a();
  double l1 = dirichlet_weighted_eig(pr, {0.25, 0.75});
  // 199 interior nodes with h = 1/400: exact discrete value 4/h² sin²(π/400).
  const double h = 1.0 / 400;
  CHECK(l1 == doctest::Approx(4.0 / (h * h) * std::pow(std::sin(pi / 400.0), 2)).epsilon(1e-11));
  CHECK(std::abs(l1 - 4 * pi * pi) <= 1e-4 * 4 * pi * pi);
}

TEST_CASE("lambda_bar formula on [0.25, 0.75]") {
  ProblemParams pr = unit_a();
  const double eps0 = 0.1;
  LambdaBar lb = nonexistence_lambda_bar(pr, {0.25, 0.75}, eps0);
  double bmin = 1.0 + 0.5 * std::cos(0.75 * pi) - eps0;
  double s0 = std::sqrt(lb.lambda1);
  CHECK(lb.b_min == doctest::Approx(bmin).epsilon(1e-14));
  CHECK(lb.a_norm == 1.0);
  CHECK(lb.s0 == doctest::Approx(s0).epsilon(1e-14));
  CHECK(lb.value == doctest::Approx(lb.lambda1 * std::sqrt(s0 + eps0) / bmin).epsilon(1e-14));
  // Within O(h²) of the analytic (2π)².
  double analytic = 4 * pi * pi * std::sqrt(2 * pi + eps0) / bmin;
  CHECK(std::abs(lb.value - analytic) <= 1e-4 * analytic);
}

TEST_CASE("doubling b - epsilon0 on the ball halves lambda_bar") {
  ProblemParams pr = unit_a();
  const double eps0 = 0.1;
  LambdaBar one = nonexistence_lambda_bar(pr, {0.25, 0.75}, eps0);
  ProblemParams twice = pr;
  twice.b = 2.0 * (pr.b.array() - eps0) + eps0;
  LambdaBar two = nonexistence_lambda_bar(twice, {0.25, 0.75}, eps0);
  CHECK(two.value == doctest::Approx(0.5 * one.value).epsilon(1e-14));
}

TEST_CASE("lambda_bar hypotheses") {
  ProblemParams pr = make_params(test::unit_grid(201), test::loop_a(), test::loop_b(), 4.0, 1.5);
  try {
    nonexistence_lambda_bar(pr, {0.0, 0.2}, 0.05);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  CHECK_THROWS_AS(nonexistence_lambda_bar(pr, {0.4, 0.6}, 0.05), Error);
  LambdaBar best = best_lambda_bar(pr, 0.05);
  CHECK(best.value > 0);
  for (int i = 0; i < pr.size(); ++i) {
    double x = pr.grid().coord(i, 0);
    if (x < best.ball.lo - 1e-12 || x > best.ball.hi + 1e-12) continue;
    CHECK(pr.a[i] >= 0);
    CHECK(pr.b[i] - 0.05 > 0);
  }
  LambdaBar direct = nonexistence_lambda_bar(pr, best.ball, 0.05);
  CHECK(direct.value == best.value);
}

TEST_CASE("weighted lambda_1 with a non-constant weight is below the pointwise bounds") {
  ProblemParams pr = make_params(test::unit_grid(401), test::cos_plus(1, 0.5, 1.0),
                                 test::constant(1.0), 4.0, 1.5);
  double l1 = dirichlet_weighted_eig(pr, {0.0, 0.5});
  double base = 4 * pi * pi;  // (π/0.5)²
  // 1 ≤ a ≤ 1.5 on the ball brackets λ_D(a) between base/1.5 and base.
  CHECK(l1 < base);
  CHECK(l1 > base / 1.5);
}

TEST_CASE("no non-negative solutions above lambda_bar") {
  ProblemParams pr = make_params(test::unit_grid(101), test::cos_plus(1, 1.0, 0.2),
                                 test::cos_plus(1, 1.0, 0.0), 4.0, 1.5, 0.0, 0.05);
  LambdaBar lb = best_lambda_bar(pr, 0.05);
  ProblemParams at = pr.with_lambda(1.1 * lb.value);
  Rng rng(5);
  NewtonOptions no;
  no.nonnegative = true;
  no.throw_on_failure = false;
  int found = 0;
  for (int k = 0; k < 10; ++k) {
    double scale = std::pow(10.0, uniform(rng, -2.0, 2.0));
    Vec u0 = scale * random_trig_field(pr.grid(), rng, true);
    SolveReport r = newton_solve(u0, at, 1e-9 * std::max(1.0, scale), 60, no);
    if (r.converged && r.u.maxCoeff() > 1e-6) ++found;
  }
  CHECK(found == 0);
}

TEST_CASE("sub/supersolution window") {
  ProblemParams pr = make_params(test::unit_grid(201), test::loop_a(), test::cos_plus(1, 1.0, -0.2),
                                 4.0, 1.5);
  WindowReport w = subsupersolution_window(pr, 0.1);
  REQUIRE(w.Lambda0);
  double aplus = pr.a.maxCoeff();
  CHECK(*w.Lambda0 == doctest::Approx(std::pow(0.1 / aplus * std::pow(w.w_sup, -2.5), 0.25))
                          .epsilon(1e-14));

  WindowReport half = subsupersolution_window(pr, 0.05);
  REQUIRE(half.Lambda0);
  ProblemParams shifted = pr;
  shifted.b = pr.b.array() + 0.05;
  SolveReport wd = ground_state(shifted, GroundStateKind::PureB, 6, 1);
  double recomputed =
      std::pow(0.05 / aplus * std::pow(wd.u.cwiseAbs().maxCoeff(), -2.5), 0.25);
  CHECK(*half.Lambda0 == doctest::Approx(recomputed).epsilon(1e-12));

  double lam = 0.5 * *w.Lambda0;
  ProblemParams at = pr.with_lambda(lam);
  SolveReport u = nehari_minimize(at, NehariSign::Plus, 4, 3);
  CHECK(u.converged);
  Vec bound = std::pow(lam, 2.0) * w.w_delta;
  CHECK((u.u - bound).maxCoeff() <= 1e-9);

  ProblemParams neg = make_params(test::unit_grid(101), test::constant(-1.0),
                                  test::cos_plus(1, 1.0, -0.2), 4.0, 1.5);
  WindowReport none = subsupersolution_window(neg, 0.1);
  CHECK(!none.Lambda0);
  CHECK(none.reason == "a_plus_zero");
  try {
    subsupersolution_window(pr, 0.3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
}

TEST_CASE("solvability identity") {
  const double lam = 0.1;
  ProblemParams cc = make_params(test::unit_grid(101), test::constant(-1.0), test::constant(1.0),
                                 4.0, 1.5, lam);
  CHECK(solvability_identity(Vec::Constant(101, std::pow(lam, 0.4)), cc) <= 1e-12);

  ProblemParams pos = make_params(test::unit_grid(101), test::cos_plus(1, 0.5, 1.0),
                                  test::constant(1.0), 4.0, 1.5, lam);
  CHECK(solvability_identity(Vec::Constant(101, 0.7), pos) > 0.1);

  ProblemParams lp = make_params(test::unit_grid(101), test::loop_a(), test::loop_b(), 4.0, 1.5,
                                 0.02);
  SolveReport r = nehari_minimize(lp, NehariSign::Minus, 3, 2);
  CHECK(solvability_identity(r.u, lp) <= l1_norm(residual(r.u, lp), lp.grid()) + 1e-12);
}

TEST_CASE("positive floor on a subdomain of b > 0") {
  ProblemParams pr = make_params(test::unit_grid(201), test::loop_a(), test::loop_b(), 4.0, 1.5);
  Subinterval d{0.05, 0.35};
  FloorReport f = no_bifurcation_floor(pr, 0.02, d);
  CHECK(f.lambda1 == doctest::Approx(std::pow(pi / 0.3, 2)).epsilon(1e-14));
  CHECK(f.delta_bar == doctest::Approx(std::sqrt(f.lambda1 / f.a0)).epsilon(1e-14));
  double first = std::pow(0.02 * f.b0 / (2 * f.lambda1), 2.0);
  REQUIRE(first < f.delta_bar);
  CHECK(f.floor == doctest::Approx(first).epsilon(1e-14));

  ProblemParams twice = pr;
  twice.b = 2.0 * pr.b;
  FloorReport f2 = no_bifurcation_floor(twice, 0.02, d);
  CHECK(f2.floor == doctest::Approx(f.floor * std::pow(2.0, 1.0 / 0.5)).epsilon(1e-13));
  CHECK(no_bifurcation_floor(pr, 1e-12, d).floor < 1e-20);

  // Bit-identical re-evaluation.
  CHECK(no_bifurcation_floor(pr, 0.02, d).floor == f.floor);

  for (double lam : {0.02, 0.04}) {
    SolveReport u = nehari_minimize(pr.with_lambda(lam), NehariSign::Plus, 4, 7);
    REQUIRE(u.energies.B > 0);
    CHECK((f.floor * f.phi1 - u.u).maxCoeff() <= 1e-9);
  }
  CHECK_THROWS_AS(no_bifurcation_floor(pr, 0.02, {0.6, 0.9}), Error);
}
