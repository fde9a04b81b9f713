#include "nehari/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "nehari/errors.hpp"
#include "nehari/solve.hpp"

namespace nehari {

namespace {

struct NodeRange {
  int first = 0;  ///< first node with x ≥ lo
  int last = -1;  ///< last node with x ≤ hi
};

NodeRange nodes_in(const Grid& g, Subinterval s) {
  if (g.dim != 1) throw Error(ErrorCode::InvalidArgument, "subinterval bounds are 1D only");
  if (!(s.hi > s.lo) || s.lo < g.lo[0] || s.hi > g.hi[0])
    throw Error(ErrorCode::InvalidArgument, "subinterval must lie inside the domain");
  NodeRange r;
  const double tol = 1e-9;
  r.first = static_cast<int>(std::ceil((s.lo - g.lo[0]) / g.h[0] - tol));
  r.last = static_cast<int>(std::floor((s.hi - g.lo[0]) / g.h[0] + tol));
  r.first = std::clamp(r.first, 0, g.n - 1);
  r.last = std::clamp(r.last, 0, g.n - 1);
  return r;
}

// Weighted Dirichlet eigenvalue on nodes first..last (ends are the boundary).
double weighted_dirichlet(const ProblemParams& pr, NodeRange r) {
  const Grid& g = pr.grid();
  const int m = r.last - r.first - 1;
  if (m < 1) throw Error(ErrorCode::Domain, "subinterval has no interior nodes");
  const double h = g.h[0];
  std::vector<Eigen::Triplet<double>> trip;
  Vec mass(m);
  for (int k = 0; k < m; ++k) {
    trip.emplace_back(k, k, 2.0 / h);
    if (k > 0) trip.emplace_back(k, k - 1, -1.0 / h);
    if (k + 1 < m) trip.emplace_back(k, k + 1, -1.0 / h);
    mass[k] = h * pr.a[r.first + 1 + k];
  }
  if (!(mass.maxCoeff() > 0)) throw Error(ErrorCode::Domain, "a vanishes inside the subinterval");
  SpMat k(m, m);
  k.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SpMat> solver(k);
  Vec x = mass.cwiseMax(0.0).cwiseSqrt();
  double lam = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 5000; ++it) {
    Vec y = solver.solve(mass.cwiseProduct(x));
    x = y / y.norm();
    double ln = x.dot(k * x) / x.dot(mass.cwiseProduct(x));
    bool done = std::abs(ln - lam) <= 1e-14 * ln;
    lam = ln;
    if (done) break;
  }
  return lam;
}

LambdaBar lambda_bar_on(const ProblemParams& pr, NodeRange r, double eps0) {
  const Grid& g = pr.grid();
  LambdaBar out;
  out.ball = {g.coord(r.first, 0), g.coord(r.last, 0)};
  double amax = 0.0, bmin = std::numeric_limits<double>::infinity();
  for (int i = r.first; i <= r.last; ++i) {
    if (pr.a[i] < 0) throw Error(ErrorCode::Domain, "a < 0 on the subinterval");
    amax = std::max(amax, pr.a[i]);
    bmin = std::min(bmin, pr.b[i] - eps0);
  }
  if (!(amax > 0)) throw Error(ErrorCode::Domain, "a vanishes on the subinterval");
  if (!(bmin > 0)) throw Error(ErrorCode::Domain, "b - epsilon0 is not positive on the subinterval");
  out.lambda1 = weighted_dirichlet(pr, r);
  out.s0 = std::pow(out.lambda1, 1.0 / (pr.p - 2.0));
  out.a_norm = amax;
  out.b_min = bmin;
  out.value = out.lambda1 * amax * std::pow(out.s0 + eps0, 2.0 - pr.q) / bmin;
  return out;
}

}  // namespace

double dirichlet_weighted_eig(const ProblemParams& pr, Subinterval ball) {
  pr.validate();
  return weighted_dirichlet(pr, nodes_in(pr.grid(), ball));
}

LambdaBar nonexistence_lambda_bar(const ProblemParams& pr, Subinterval ball, double eps0) {
  pr.validate();
  if (!(eps0 >= 0)) throw Error(ErrorCode::InvalidArgument, "epsilon0 must be non-negative");
  return lambda_bar_on(pr, nodes_in(pr.grid(), ball), eps0);
}

LambdaBar best_lambda_bar(const ProblemParams& pr, double eps0, int samples) {
  pr.validate();
  const Grid& g = pr.grid();
  if (g.dim != 1) throw Error(ErrorCode::InvalidArgument, "subinterval bounds are 1D only");
  std::optional<LambdaBar> best;
  auto ok = [&](int i) { return pr.a[i] >= 0 && pr.b[i] - eps0 > 0; };
  for (int i = 0; i < g.n;) {
    if (!ok(i)) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < g.n && ok(j + 1)) ++j;
    std::vector<int> pos;
    const int s = std::max(2, samples);
    for (int k = 0; k < s; ++k) {
      int p = i + static_cast<int>(std::lround(static_cast<double>(k) * (j - i) / (s - 1)));
      if (pos.empty() || p != pos.back()) pos.push_back(p);
    }
    for (size_t x = 0; x < pos.size(); ++x)
      for (size_t y = x + 1; y < pos.size(); ++y) {
        if (pos[y] - pos[x] < 2) continue;
        try {
          LambdaBar c = lambda_bar_on(pr, {pos[x], pos[y]}, eps0);
          if (!best || c.value < best->value) best = c;
        } catch (const Error&) {
        }
      }
    i = j + 1;
  }
  if (!best) throw Error(ErrorCode::Domain, "no subinterval with a >= 0, a != 0 and b > epsilon0");
  return *best;
}

WindowReport subsupersolution_window(const ProblemParams& pr, double delta, int n_starts,
                                     std::uint64_t seed) {
  pr.validate();
  const Grid& g = pr.grid();
  if (!(delta > 0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (!(pr.b.maxCoeff() > 0)) throw Error(ErrorCode::Domain, "b is nowhere positive");
  if (!(integrate(pr.b, g) < 0)) throw Error(ErrorCode::Domain, "requires ∫b < 0");
  ProblemParams shifted = pr;
  shifted.b = pr.b.array() + delta;
  if (!(integrate(shifted.b, g) < 0)) throw Error(ErrorCode::Domain, "requires ∫(b+δ) < 0");
  WindowReport out;
  SolveReport w = ground_state(shifted, GroundStateKind::PureB, n_starts, seed);
  out.w_delta = w.u;
  out.w_sup = w.u.cwiseAbs().maxCoeff();
  const double aplus = pr.a.cwiseMax(0.0).maxCoeff();
  if (!(aplus > 0)) {
    out.reason = "a_plus_zero";
    return out;
  }
  out.Lambda0 = std::pow(delta / aplus * std::pow(out.w_sup, pr.q - pr.p),
                         (2.0 - pr.q) / (pr.p - 2.0));
  return out;
}

double solvability_identity(const ScalarField& u, const ProblemParams& pr) {
  return std::abs(integrate(nonlinearity(u, pr), pr.grid()));
}

FloorReport no_bifurcation_floor(const ProblemParams& pr, double lambda_bar, Subinterval d) {
  pr.validate();
  if (!(lambda_bar > 0)) throw Error(ErrorCode::InvalidArgument, "lambda_bar must be positive");
  const Grid& g = pr.grid();
  NodeRange r = nodes_in(g, d);
  if (r.last < r.first) throw Error(ErrorCode::Domain, "subinterval contains no nodes");
  FloorReport out;
  out.b0 = std::numeric_limits<double>::infinity();
  for (int i = r.first; i <= r.last; ++i) {
    out.b0 = std::min(out.b0, pr.b[i]);
    out.a0 = std::max(out.a0, -pr.a[i]);
  }
  if (!(out.b0 > 0)) throw Error(ErrorCode::Domain, "inf_D b must be positive");
  using std::numbers::pi;
  out.lambda1 = std::pow(pi / d.length(), 2);
  out.delta_bar = out.a0 > 0 ? std::pow(out.lambda1 / out.a0, 1.0 / (pr.p - 2.0))
                             : std::numeric_limits<double>::infinity();
  out.floor = std::min(std::pow(lambda_bar * out.b0 / (2.0 * out.lambda1), 1.0 / (2.0 - pr.q)),
                       out.delta_bar);
  out.phi1 = ScalarField::Zero(g.size());
  for (int i = r.first; i <= r.last; ++i)
    out.phi1[i] = std::max(0.0, std::sin(pi * (g.coord(i, 0) - d.lo) / d.length()));
  return out;
}

bool BoundsReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

}  // namespace nehari
