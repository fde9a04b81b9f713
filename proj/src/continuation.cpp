#include "nehari/continuation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <Eigen/SparseLU>

#include "nehari/errors.hpp"
#include "nehari/solve.hpp"
#include "nehari/spectral.hpp"

namespace nehari {

const char* branch_event_name(BranchEvent e) {
  switch (e) {
    case BranchEvent::None: return "";
    case BranchEvent::Start: return "start";
    case BranchEvent::End: return "end";
    case BranchEvent::Fold: return "fold";
    case BranchEvent::LambdaZeroCrossing: return "lambda_zero_crossing";
  }
  return "";
}

const char* branch_origin_name(BranchOrigin o) {
  return o == BranchOrigin::FromZero ? "from_zero" : "from_lambda_eps";
}

void ContinuationSettings::validate() const {
  if (!(ds_min > 0 && ds_min <= ds_init && ds_init <= ds_max))
    throw Error(ErrorCode::InvalidArgument, "require 0 < ds_min <= ds_init <= ds_max");
  if (!(newton_tol > 0)) throw Error(ErrorCode::InvalidArgument, "newton_tol must be positive");
  if (direction != 1 && direction != -1)
    throw Error(ErrorCode::InvalidArgument, "direction must be +1 or -1");
  if (max_steps < 1 || newton_max_iter < 1)
    throw Error(ErrorCode::InvalidArgument, "max_steps and newton_max_iter must be positive");
}

double ContinuationSettings::departure_scale() const { return 10.0 * std::sqrt(newton_tol); }

int Branch::count(BranchEvent e) const {
  return static_cast<int>(
      std::count_if(points.begin(), points.end(), [e](const BranchPoint& p) { return p.event == e; }));
}

namespace {

/// Linear side condition cuᵀu + cl·λ = rhs.
struct Constraint {
  Vec cu;
  double cl = 0.0;
  double rhs = 0.0;
};

struct Corrected {
  Vec u;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool ok = false;
};

double strong_norm(const Vec& weak, const Grid& g) {
  return l2_norm(weak.cwiseQuotient(g.weights), g);
}

/// Bordered matrix [[S, -W f_λ], [cuᵀ, cl]].
SpMat bordered(const Vec& u, double lam, const Vec& cu, double cl, const ProblemParams& pr) {
  ProblemParams pl = pr.with_lambda(lam);
  SpMat s = jacobian(u, pl).stiffness;
  Vec fl = pr.grid().weights.cwiseProduct(nonlinearity_dlambda(u, pl));
  const int n = pr.size();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(s.nonZeros() + 2 * n + 1);
  for (int col = 0; col < s.outerSize(); ++col)
    for (SpMat::InnerIterator it(s, col); it; ++it) trip.emplace_back(it.row(), col, it.value());
  for (int i = 0; i < n; ++i) {
    if (fl[i] != 0.0) trip.emplace_back(i, n, -fl[i]);
    if (cu[i] != 0.0) trip.emplace_back(n, i, cu[i]);
  }
  trip.emplace_back(n, n, cl);
  SpMat m(n + 1, n + 1);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// Newton on {R(u,λ) = 0, constraint}. Converged when the strong residual is
// within tol and the last update is below 1e-8 of the solution scale.
Corrected correct(Vec u, double lam, const Constraint& c, const ProblemParams& pr, double tol,
                  int max_iter) {
  const Grid& g = pr.grid();
  const int n = pr.size();
  Corrected out;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    Vec r = weak_residual(u, pr.with_lambda(lam));
    double res = strong_norm(r, g);
    if (!std::isfinite(res)) return out;
    double scale = std::max(u.cwiseAbs().maxCoeff(), std::abs(lam));
    if (it > 0 && res <= tol && last_step <= 1e-8 * scale) {
      out.u = std::move(u);
      out.lambda = lam;
      out.residual = res;
      out.iterations = it;
      out.ok = true;
      return out;
    }
    if (it >= max_iter) return out;
    Vec rhs(n + 1);
    rhs.head(n) = -r;
    rhs[n] = c.rhs - c.cu.dot(u) - c.cl * lam;
    Eigen::SparseLU<SpMat> lu;
    try {
      lu.compute(bordered(u, lam, c.cu, c.cl, pr));
    } catch (const Error&) {
      return out;
    }
    if (lu.info() != Eigen::Success) return out;
    Vec d = lu.solve(rhs);
    if (!d.allFinite()) return out;
    u += d.head(n);
    lam += d[n];
    last_step = d.cwiseAbs().maxCoeff();
  }
}

double mean(const Vec& u, const Grid& g) { return integrate(u, g) / g.measure(); }

double product_norm(const Vec& du, double dl, const Grid& g) {
  return std::sqrt(g.weights.dot(du.cwiseAbs2()) + dl * dl);
}

/// Unit tangent solving [R_u, R_λ]τ = 0 with border ⟨border, τ⟩ = 1.
std::pair<Vec, double> tangent(const Vec& u, double lam, const Vec& border_u, double border_l,
                               const ProblemParams& pr) {
  const int n = pr.size();
  Eigen::SparseLU<SpMat> lu(bordered(u, lam, border_u, border_l, pr));
  if (lu.info() != Eigen::Success)
    throw Error(ErrorCode::DepartureFailed, "singular bordered system at the departure point");
  Vec rhs = Vec::Zero(n + 1);
  rhs[n] = 1.0;
  Vec t = lu.solve(rhs);
  double nt = product_norm(t.head(n), t[n], pr.grid());
  if (!(nt > 0) || !std::isfinite(nt))
    throw Error(ErrorCode::DepartureFailed, "degenerate tangent at the departure point");
  return {t.head(n) / nt, t[n] / nt};
}

BranchPoint make_point(const Vec& u, double lam, double res, const ProblemParams& pr,
                       const ContinuationSettings& st) {
  ProblemParams pl = pr.with_lambda(lam);
  BranchPoint p;
  p.lambda = lam;
  p.u = u;
  p.sup_norm = u.cwiseAbs().maxCoeff();
  p.l2_norm = l2_norm(u, pr.grid());
  p.residual_norm = res;
  if (st.compute_gamma1) {
    try {
      EigenReport g = gamma1(u, pl);
      if (g.converged) p.gamma1 = g.eigenvalue;
    } catch (const Error&) {
    }
  }
  EnergyTriple e = energies(u, pl);
  double b = pr.epsilon == 0.0 ? e.B : regularized_B(u, pl);
  p.nehari_class = nehari_classify(e.E, e.A, b, lam, pr.p, pr.q);
  return p;
}

Vec regularized_weight(const ProblemParams& pr) {
  return pr.b.array() - pr.epsilon;
}

std::vector<double> decade_sweep(double s0) {
  return {s0, s0 / 10, s0 * 10, s0 / 100, s0 * 100};
}

}  // namespace

double departure_slope_formula(const ProblemParams& pr) {
  double im = integrate(regularized_weight(pr), pr.grid());
  double ia = integrate(pr.a, pr.grid());
  if (im == 0.0) throw Error(ErrorCode::Domain, "∫(b-ε) = 0: departure slope undefined");
  return -std::pow(pr.epsilon, 2.0 - pr.q) * ia / im;
}

Departure depart_from_zero_at(const ProblemParams& pr, double s, const ContinuationSettings& st) {
  pr.validate();
  st.validate();
  if (!(pr.epsilon > 0))
    throw Error(ErrorCode::Domain, "continuation through u = 0 requires epsilon > 0");
  const Grid& g = pr.grid();
  const double kappa = departure_slope_formula(pr);
  Departure d;
  d.s = s;
  d.predicted_lambda = kappa * std::pow(s, pr.p - 2.0);
  Constraint c{g.weights / g.measure(), 0.0, s};
  Corrected k = correct(Vec::Constant(pr.size(), s), d.predicted_lambda, c, pr, st.newton_tol,
                        4 * st.newton_max_iter);
  if (!k.ok) throw Error(ErrorCode::DepartureFailed, "corrector failed at the departure amplitude");
  d.point = make_point(k.u, k.lambda, k.residual, pr, st);
  d.point.event = BranchEvent::Start;
  auto [tu, tl] = tangent(k.u, k.lambda, c.cu, 0.0, pr);
  if (mean(tu, g) < 0) {
    tu = -tu;
    tl = -tl;
  }
  d.tangent_u = tu;
  d.tangent_lambda = tl;
  d.attempts = 1;
  return d;
}

Departure depart_from_zero(const ProblemParams& pr, const ContinuationSettings& st) {
  auto list = decade_sweep(st.departure_scale());
  int attempts = 0;
  for (double s : list) {
    ++attempts;
    try {
      Departure d = depart_from_zero_at(pr, s, st);
      d.attempts = attempts;
      return d;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DepartureFailed) throw;
    }
  }
  throw Error(ErrorCode::DepartureFailed, "no amplitude of the decade sweep converged at (0,0)");
}

Departure depart_from_lambda_eps_at(const ProblemParams& pr, double s,
                                    const ContinuationSettings& st) {
  pr.validate();
  st.validate();
  if (!(pr.epsilon > 0))
    throw Error(ErrorCode::Domain, "continuation through u = 0 requires epsilon > 0");
  const Grid& g = pr.grid();
  EigenReport eig = principal_eigs_weighted(regularized_weight(pr), pr.epsilon, pr).second;
  const Vec& phi = eig.eigenfunction;
  Departure d;
  d.s = s;
  d.predicted_lambda = eig.eigenvalue;
  Constraint c{g.weights.cwiseProduct(phi), 0.0, s * g.weights.dot(phi.cwiseAbs2())};
  Corrected k = correct(s * phi, eig.eigenvalue, c, pr, st.newton_tol, 4 * st.newton_max_iter);
  if (!k.ok) throw Error(ErrorCode::DepartureFailed, "corrector failed at the departure amplitude");
  d.point = make_point(k.u, k.lambda, k.residual, pr, st);
  d.point.event = BranchEvent::Start;
  auto [tu, tl] = tangent(k.u, k.lambda, c.cu, 0.0, pr);
  if (tu.dot(c.cu) < 0) {
    tu = -tu;
    tl = -tl;
  }
  d.tangent_u = tu;
  d.tangent_lambda = tl;
  d.attempts = 1;
  return d;
}

Departure depart_from_lambda_eps(const ProblemParams& pr, const ContinuationSettings& st) {
  auto list = decade_sweep(st.departure_scale());
  int attempts = 0;
  for (double s : list) {
    ++attempts;
    try {
      Departure d = depart_from_lambda_eps_at(pr, s, st);
      d.attempts = attempts;
      return d;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DepartureFailed) throw;
    }
  }
  throw Error(ErrorCode::DepartureFailed, "no amplitude of the decade sweep converged at λ_ε");
}

SlopeEstimate measure_departure_slope(const ProblemParams& pr, double s0, int levels,
                                      const ContinuationSettings& st) {
  if (levels < 2) throw Error(ErrorCode::InsufficientData, "need at least two amplitudes");
  SlopeEstimate out;
  out.formula = departure_slope_formula(pr);
  double s = s0;
  for (int k = 0; k < levels; ++k, s *= 0.5) {
    ContinuationSettings c = st;
    Departure d = depart_from_zero_at(pr, s, c);
    out.s.push_back(s);
    out.slopes.push_back(d.point.lambda / std::pow(s, pr.p - 2.0));
  }
  // μ(s)/s^{p-2} = κ + O(s): first-order Richardson on the two smallest amplitudes.
  const size_t m = out.slopes.size();
  out.extrapolated = 2.0 * out.slopes[m - 1] - out.slopes[m - 2];
  return out;
}

InterceptEstimate measure_lambda_eps_intercept(const ProblemParams& pr, double s,
                                               const ContinuationSettings& st) {
  InterceptEstimate out;
  EigenReport eig = principal_eigs_weighted(regularized_weight(pr), pr.epsilon, pr).second;
  out.lambda_eps = eig.eigenvalue;
  out.phi_sup = eig.c0_norm;
  Departure a = depart_from_lambda_eps_at(pr, s, st);
  Departure b = depart_from_lambda_eps_at(pr, 0.5 * s, st);
  Departure c = depart_from_lambda_eps_at(pr, 0.25 * s, st);
  out.lambda_s = a.point.lambda;
  out.lambda_half = b.point.lambda;
  out.lambda_quarter = c.point.lambda;
  // γ(s) = λ_ε + c1 s + c2 s² + O(s³): second-order Richardson.
  out.extrapolated = (8.0 * out.lambda_quarter - 6.0 * out.lambda_half + out.lambda_s) / 3.0;
  out.sup_ratio = c.point.sup_norm / (0.25 * s);
  out.min_max_ratio = a.point.u.minCoeff() / a.point.u.maxCoeff();
  return out;
}

Branch trace_branch(const Departure& start, BranchOrigin origin, const ProblemParams& pr,
                    const ContinuationSettings& st) {
  pr.validate();
  st.validate();
  const Grid& g = pr.grid();
  const Vec& w = g.weights;
  const double dep = st.departure_scale();

  Branch br;
  br.epsilon = pr.epsilon;
  br.origin = origin;
  try {
    br.lambda_eps = principal_eigs_weighted(regularized_weight(pr), pr.epsilon, pr).second.eigenvalue;
  } catch (const Error&) {
  }
  std::optional<double> target;
  if (origin == BranchOrigin::FromZero)
    target = br.lambda_eps;
  else
    target = 0.0;

  BranchPoint first = start.point;
  first.arclength = 0.0;
  first.event = BranchEvent::Start;
  br.points.push_back(first);

  Vec tu = st.direction * start.tangent_u;
  double tl = st.direction * start.tangent_lambda;
  double ds = st.ds_init;
  const double start_sup = first.sup_norm;
  bool left = false;
  br.termination = "max_steps";

  int step = 0;
  for (; step < st.max_steps; ++step) {
    const BranchPoint& cur = br.points.back();
    Constraint c{w.cwiseProduct(tu), tl, 0.0};
    Corrected k;
    double chord = 0.0;
    bool accepted = false;
    while (!accepted) {
      c.rhs = c.cu.dot(cur.u) + tl * cur.lambda + ds;
      k = correct(cur.u + ds * tu, cur.lambda + ds * tl, c, pr, st.newton_tol, st.newton_max_iter);
      if (k.ok) {
        Vec du = k.u - cur.u;
        double dl = k.lambda - cur.lambda;
        chord = product_norm(du, dl, g);
        double forward = w.dot(tu.cwiseProduct(du)) + tl * dl;
        accepted = chord <= 2.0 * ds && forward > 0;
      }
      if (!accepted) {
        ds *= 0.5;
        if (ds < st.ds_min)
          throw Error(ErrorCode::StepCollapse, "step size fell below ds_min");
      }
    }
    Vec du = k.u - cur.u;
    double dl = k.lambda - cur.lambda;
    tu = du / chord;
    tl = dl / chord;
    if (k.iterations < 4) ds = std::min(1.5 * ds, st.ds_max);

    const double sup_new = k.u.cwiseAbs().maxCoeff();
    const double mean_new = mean(k.u, g);
    if (!left && sup_new > 10.0 * std::max(start_sup, dep)) left = true;

    if (std::abs(k.lambda) > st.lambda_max || sup_new > st.sup_max) {
      br.termination = "box";
      break;
    }

    if (left && mean_new < dep) {
      // Land exactly on mean(u) = dep, then extrapolate linearly to mean(u) = 0.
      const double m0 = mean(cur.u, g);
      const double theta = (m0 - dep) / (m0 - mean_new);
      Constraint cm{w / g.measure(), 0.0, dep};
      Corrected e = correct(cur.u + theta * du, cur.lambda + theta * dl, cm, pr, st.newton_tol,
                            4 * st.newton_max_iter);
      Vec u1 = k.u;
      double l1 = k.lambda, m1 = mean_new;
      if (e.ok && product_norm(e.u - cur.u, e.lambda - cur.lambda, g) <= 2.0 * chord) {
        BranchPoint p = make_point(e.u, e.lambda, e.residual, pr, st);
        p.arclength = cur.arclength + product_norm(e.u - cur.u, e.lambda - cur.lambda, g);
        br.points.push_back(std::move(p));
        u1 = e.u;
        l1 = e.lambda;
        m1 = dep;
      }
      const double t0 = m0 / (m0 - m1);
      const double lam_c = cur.lambda + t0 * (l1 - cur.lambda);
      const double sup_c = (cur.u + t0 * (u1 - cur.u)).cwiseAbs().maxCoeff();
      br.closure_lambda = lam_c;
      if (target) br.closed_loop_gap = std::hypot(lam_c - *target, sup_c);
      br.termination = "closed";
      break;
    }

    BranchPoint p = make_point(k.u, k.lambda, k.residual, pr, st);
    p.arclength = cur.arclength + chord;

    if (cur.lambda * k.lambda < 0 && cur.sup_norm > 10 * dep && sup_new > 10 * dep) {
      double theta = cur.lambda / (cur.lambda - k.lambda);
      NewtonOptions no;
      no.throw_on_failure = false;
      SolveReport z = newton_solve(cur.u + theta * du, pr.with_lambda(0.0), st.newton_tol, 50, no);
      if (z.converged && product_norm(z.u - cur.u, cur.lambda, g) <= 2.0 * chord) {
        BranchPoint zc = make_point(z.u, 0.0, z.final_residual_norm, pr, st);
        zc.arclength = cur.arclength + product_norm(z.u - cur.u, cur.lambda, g);
        zc.arclength = std::min(zc.arclength, p.arclength);
        zc.event = BranchEvent::LambdaZeroCrossing;
        br.points.push_back(std::move(zc));
      }
    }
    br.points.push_back(std::move(p));
  }
  br.steps = step;
  br.points.back().event = BranchEvent::End;

  for (size_t i = 1; i + 1 < br.points.size(); ++i) {
    auto& p = br.points[i];
    if (p.event != BranchEvent::None) continue;
    double a = p.lambda - br.points[i - 1].lambda;
    double b = br.points[i + 1].lambda - p.lambda;
    if (a * b < 0) p.event = BranchEvent::Fold;
  }
  return br;
}

namespace {

double point_segment(double px, double py, double ax, double ay, double bx, double by) {
  double vx = bx - ax, vy = by - ay;
  double l2 = vx * vx + vy * vy;
  double t = l2 > 0 ? std::clamp(((px - ax) * vx + (py - ay) * vy) / l2, 0.0, 1.0) : 0.0;
  return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

// max over vertices and segment midpoints of `a` of the distance to polyline `b`.
double directed(const Branch& a, const Branch& b) {
  auto dist = [&](double x, double y) {
    double best = std::numeric_limits<double>::infinity();
    const auto& q = b.points;
    if (q.size() == 1) return std::hypot(x - q[0].lambda, y - q[0].sup_norm);
    for (size_t j = 0; j + 1 < q.size(); ++j)
      best = std::min(best, point_segment(x, y, q[j].lambda, q[j].sup_norm, q[j + 1].lambda,
                                          q[j + 1].sup_norm));
    return best;
  };
  double worst = 0.0;
  const auto& p = a.points;
  for (size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, dist(p[i].lambda, p[i].sup_norm));
    if (i + 1 < p.size())
      worst = std::max(worst, dist(0.5 * (p[i].lambda + p[i + 1].lambda),
                                   0.5 * (p[i].sup_norm + p[i + 1].sup_norm)));
  }
  return worst;
}

int loop_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NEHARI_LOOP_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(hw);
}

}  // namespace

double hausdorff_distance(const Branch& a, const Branch& b) {
  if (a.points.empty() || b.points.empty())
    throw Error(ErrorCode::InsufficientData, "empty branch");
  return std::max(directed(a, b), directed(b, a));
}

HomotopyResult epsilon_homotopy(const ProblemParams& pr, const std::vector<double>& eps_list,
                                const ContinuationSettings& st) {
  pr.validate();
  st.validate();
  if (eps_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty epsilon list");
  for (size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "epsilon list must strictly decrease");
  }
  const size_t m = eps_list.size();
  HomotopyResult out;
  out.branches.resize(m);
  LoopDiagnostics& dg = out.diagnostics;
  dg.epsilons = eps_list;
  dg.errors.assign(m, "");

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < m; i = next++) {
      try {
        ProblemParams pe = pr.with_epsilon(eps_list[i]);
        Departure d = depart_from_zero(pe, st);
        out.branches[i] = trace_branch(d, BranchOrigin::FromZero, pe, st);
      } catch (const Error& e) {
        dg.errors[i] = e.what();
      }
    }
  };
  int nt = std::min<int>(loop_threads(), static_cast<int>(m));
  std::vector<std::thread> pool;
  for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  auto curve = lambda_epsilon_curve(pr, eps_list);
  for (size_t i = 0; i < m; ++i) {
    dg.lambda_eps.push_back(curve[i].lambda_eps);
    const auto& b = out.branches[i];
    dg.gaps.push_back(b ? b->closed_loop_gap : std::nullopt);
    std::optional<double> cn;
    if (b)
      for (const auto& p : b->points)
        if (p.event == BranchEvent::LambdaZeroCrossing)
          cn = cn ? std::min(*cn, p.sup_norm) : p.sup_norm;
    dg.crossing_norms.push_back(cn);
  }
  dg.lambda_eps_decreasing = true;
  for (size_t i = 0; i < m; ++i) {
    if (!dg.lambda_eps[i]) dg.lambda_eps_decreasing = false;
    else if (i > 0 && dg.lambda_eps[i - 1] && !(*dg.lambda_eps[i] < *dg.lambda_eps[i - 1]))
      dg.lambda_eps_decreasing = false;
  }
  for (size_t i = 0; i + 1 < m; ++i)
    if (out.branches[i] && out.branches[i + 1])
      dg.hausdorff.push_back(hausdorff_distance(*out.branches[i], *out.branches[i + 1]));
  dg.hausdorff_decreasing = dg.hausdorff.size() + 1 == m;
  for (size_t i = 1; i < dg.hausdorff.size(); ++i)
    if (!(dg.hausdorff[i] < dg.hausdorff[i - 1])) dg.hausdorff_decreasing = false;
  return out;
}

ScalingFit scaling_fit(const std::vector<std::pair<double, ScalarField>>& samples, ScalingLaw law,
                       double p, double q, const ScalarField& reference) {
  if (samples.size() < 4) throw Error(ErrorCode::InsufficientData, "need at least 4 samples");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& [lam, u] : samples) {
    if (!(lam > 0)) throw Error(ErrorCode::InsufficientData, "scaling fit needs λ > 0");
    lo = std::min(lo, lam);
    hi = std::max(hi, lam);
  }
  if (hi / lo < 100.0 * (1.0 - 1e-9))
    throw Error(ErrorCode::InsufficientData, "λ must span at least two decades");
  const double kappa = law == ScalingLaw::Concave2mq ? 1.0 / (2.0 - q) : 1.0 / (p - q);
  const size_t n = samples.size();
  std::vector<double> x(n), y(n);
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    x[i] = std::log(samples[i].first);
    y[i] = std::log(samples[i].second.cwiseAbs().maxCoeff());
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  ScalingFit f;
  f.exponent = sxy / sxx;
  double c = my - f.exponent * mx;
  f.constant = std::exp(c);
  for (size_t i = 0; i < n; ++i)
    f.fit_residual = std::max(f.fit_residual, std::abs(y[i] - c - f.exponent * x[i]));
  const double rn = reference.cwiseAbs().maxCoeff();
  for (const auto& [lam, u] : samples) {
    Vec r = std::pow(lam, -kappa) * u;
    if (reference.size() == 1)
      f.profile_errors.push_back((r.array() - reference[0]).abs().maxCoeff() / rn);
    else
      f.profile_errors.push_back((r - reference).cwiseAbs().maxCoeff() / rn);
  }
  return f;
}

}  // namespace nehari
