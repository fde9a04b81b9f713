#include "nehari/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "nehari/errors.hpp"
#include "nehari/random_fields.hpp"

namespace nehari {

namespace {

inline double pw(double u, double e) {
  if (u == 0.0) return 0.0;
  return std::pow(std::abs(u), e - 2.0) * u;
}

}  // namespace

double uniform(Rng& rng, double lo, double hi) {
  double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

ScalarField random_trig_field(const Grid& grid, Rng& rng, bool nonnegative, int modes) {
  using std::numbers::pi;
  const int n = grid.size();
  ScalarField v = ScalarField::Constant(n, uniform(rng, 0.5, 1.5));
  const int ky_max = grid.dim == 2 ? modes : 0;
  for (int ky = 0; ky <= ky_max; ++ky)
    for (int kx = 0; kx <= modes; ++kx) {
      if (kx == 0 && ky == 0) continue;
      if (kx + ky > modes) continue;
      double c = uniform(rng, -1.0, 1.0) / (kx + ky);
      for (int i = 0; i < n; ++i) {
        double x = grid.coord(i, 0);
        double t = std::cos(kx * pi * (x - grid.lo[0]) / (grid.hi[0] - grid.lo[0]));
        if (grid.dim == 2)
          t *= std::cos(ky * pi * (grid.coord(i, 1) - grid.lo[1]) / (grid.hi[1] - grid.lo[1]));
        v[i] += c * t;
      }
    }
  if (nonnegative) {
    v = v.cwiseMax(0.0);
    if (v.maxCoeff() <= 0.0) v.setOnes();
  }
  return v;
}

std::shared_ptr<const Discretization> make_discretization(const Grid& grid) {
  auto d = std::make_shared<Discretization>();
  d->grid = grid;
  d->op = laplacian_neumann(grid);
  return d;
}

void ProblemParams::validate() const {
  if (!disc) throw Error(ErrorCode::InvalidArgument, "missing discretization");
  if (!(p > 2.0)) throw Error(ErrorCode::InvalidArgument, "p must exceed 2");
  if (!(q > 1.0 && q < 2.0)) throw Error(ErrorCode::InvalidArgument, "q must lie in (1,2)");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  if (a.size() != size() || b.size() != size())
    throw Error(ErrorCode::InvalidArgument, "coefficient size does not match grid");
  if (!a.allFinite() || !b.allFinite() || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidArgument, "non-finite coefficient or lambda");
}

ProblemParams ProblemParams::with_lambda(double lam) const {
  ProblemParams c = *this;
  c.lambda = lam;
  return c;
}

ProblemParams ProblemParams::with_epsilon(double eps) const {
  ProblemParams c = *this;
  c.epsilon = eps;
  return c;
}

ProblemParams make_params(const Grid& grid, const CoeffSpec& a, const CoeffSpec& b, double p,
                          double q, double lambda, double epsilon) {
  ProblemParams pr;
  pr.disc = make_discretization(grid);
  pr.a = sample_coefficient(a, grid).values;
  pr.b = sample_coefficient(b, grid).values;
  pr.p = p;
  pr.q = q;
  pr.lambda = lambda;
  pr.epsilon = epsilon;
  pr.validate();
  return pr;
}

EnergyTriple energies(const ScalarField& u, const ProblemParams& pr) {
  const Vec& w = pr.grid().weights;
  EnergyTriple e;
  e.E = pr.op().dirichlet_form(u);
  double A = 0.0, B = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    double au = std::abs(u[i]);
    A += w[i] * pr.a[i] * std::pow(au, pr.p);
    B += w[i] * pr.b[i] * std::pow(au, pr.q);
  }
  e.A = A;
  e.B = B;
  e.I = e.E / 2.0 - e.A / pr.p - pr.lambda * e.B / pr.q;
  return e;
}

double regularized_B(const ScalarField& u, const ProblemParams& pr) {
  if (pr.epsilon == 0.0) return energies(u, pr).B;
  const Vec& w = pr.grid().weights;
  double s = 0.0;
  for (int i = 0; i < u.size(); ++i)
    s += w[i] * (pr.b[i] - pr.epsilon) * std::pow(std::abs(u[i] + pr.epsilon), pr.q - 2.0) *
         u[i] * u[i];
  return s;
}

ScalarField nonlinearity_dlambda(const ScalarField& u, const ProblemParams& pr) {
  ScalarField f(u.size());
  const double e = pr.epsilon;
  for (int i = 0; i < u.size(); ++i) {
    if (e == 0.0)
      f[i] = pr.b[i] * pw(u[i], pr.q);
    else
      f[i] = (pr.b[i] - e) * std::pow(std::abs(u[i] + e), pr.q - 2.0) * u[i];
  }
  return f;
}

ScalarField nonlinearity(const ScalarField& u, const ProblemParams& pr) {
  ScalarField f = pr.lambda * nonlinearity_dlambda(u, pr);
  for (int i = 0; i < u.size(); ++i) f[i] += pr.a[i] * pw(u[i], pr.p);
  return f;
}

ScalarField nonlinearity_du(const ScalarField& u, const ProblemParams& pr, bool clamp) {
  ScalarField d(u.size());
  const double e = pr.epsilon;
  const double eta = 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff());
  for (int i = 0; i < u.size(); ++i) {
    double au = std::abs(u[i]);
    double v = (pr.p - 1.0) * pr.a[i] * std::pow(au, pr.p - 2.0);
    if (e == 0.0) {
      if (au < eta && pr.b[i] != 0.0 && pr.lambda != 0.0) {
        if (!clamp)
          throw Error(ErrorCode::SingularLinearization,
                      "|u| below clamp floor at a node with b != 0");
        au = eta;
      }
      if (pr.lambda != 0.0 && pr.b[i] != 0.0)
        v += pr.lambda * (pr.q - 1.0) * pr.b[i] * std::pow(au, pr.q - 2.0);
    } else {
      double s = u[i] + e;
      double as = std::abs(s);
      v += pr.lambda * (pr.b[i] - e) * std::pow(as, pr.q - 2.0) * (1.0 + (pr.q - 2.0) * u[i] / s);
    }
    d[i] = v;
  }
  return d;
}

ScalarField weak_residual(const ScalarField& u, const ProblemParams& pr) {
  return pr.op().stiffness_apply(u) - pr.grid().weights.cwiseProduct(nonlinearity(u, pr));
}

ScalarField residual(const ScalarField& u, const ProblemParams& pr) {
  return pr.op().apply(u) - nonlinearity(u, pr);
}

double relative_residual(const ScalarField& u, const ProblemParams& pr) {
  const Grid& g = pr.grid();
  ScalarField lu = pr.op().apply(u);
  ScalarField fa = nonlinearity(u, pr.with_lambda(0.0));
  ScalarField fb = nonlinearity(u, pr) - fa;
  double scale = l2_norm(lu, g) + l2_norm(fa, g) + l2_norm(fb, g);
  double r = l2_norm(lu - fa - fb, g);
  return scale > 0 ? r / scale : 0.0;
}

DiscreteOperator jacobian(const ScalarField& u, const ProblemParams& pr, bool clamp) {
  ScalarField d = nonlinearity_du(u, pr, clamp);
  DiscreteOperator j;
  j.mass = pr.grid().weights;
  j.stiffness = pr.op().stiffness;
  for (int i = 0; i < u.size(); ++i) j.stiffness.coeffRef(i, i) -= j.mass[i] * d[i];
  return j;
}

const char* nehari_class_name(NehariClass c) {
  switch (c) {
    case NehariClass::Nplus: return "Nplus";
    case NehariClass::Nminus: return "Nminus";
    case NehariClass::Nzero: return "Nzero";
    case NehariClass::NotOnNehari: return "NotOnNehari";
  }
  return "NotOnNehari";
}

double c_pq(double p, double q) {
  return (q * (p - 2.0) / (2.0 * (p - q))) *
         std::pow(p * (2.0 - q) / (2.0 * (p - q)), (2.0 - q) / (p - 2.0));
}

NehariClass nehari_classify(double E, double A, double B, double lambda, double p, double q,
                            double rel_tol) {
  double lb = lambda * B;
  double scale = std::abs(E) + std::abs(A) + std::abs(lb);
  if (scale == 0.0 || std::abs(E - A - lb) > rel_tol * scale) return NehariClass::NotOnNehari;
  double split = lb * (p - q) / (p - 2.0);
  double c = E - split;
  if (std::abs(c) <= rel_tol * (std::abs(E) + std::abs(split))) return NehariClass::Nzero;
  return c < 0 ? NehariClass::Nplus : NehariClass::Nminus;
}

double fiber_j(double t, double E, double A, double B, double lam, double p, double q) {
  return t * t * E / 2.0 - std::pow(t, p) * A / p - lam * std::pow(t, q) * B / q;
}

double fiber_dj(double t, double E, double A, double B, double lam, double p, double q) {
  return t * E - std::pow(t, p - 1.0) * A - lam * std::pow(t, q - 1.0) * B;
}

double fiber_d2j(double t, double E, double A, double B, double lam, double p, double q) {
  return E - (p - 1.0) * std::pow(t, p - 2.0) * A - lam * (q - 1.0) * std::pow(t, q - 2.0) * B;
}

namespace {

struct GFun {
  double E, A, beta, p, q;
  double g(double t) const {
    return std::pow(t, 2.0 - q) * E - std::pow(t, p - q) * A - beta;
  }
  double dg(double t) const {
    return (2.0 - q) * std::pow(t, 1.0 - q) * E - (p - q) * std::pow(t, p - q - 1.0) * A;
  }
};

// Root of a monotone g on [lo, hi] with g(lo), g(hi) of opposite sign;
// bisection until the bracket is tight relative to hi, then safeguarded Newton
// to a relative step of `rel_tol`.
double monotone_root(const GFun& f, double lo, double hi, double rel_tol) {
  double glo = f.g(lo);
  for (int it = 0; it < 2000 && hi - lo > 1e-3 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    double gm = f.g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double gt = f.g(t);
    if (gt == 0.0) break;
    if ((gt < 0) == (glo < 0)) lo = t; else hi = t;
    double d = f.dg(t);
    double tn = (d != 0.0 && std::isfinite(d)) ? t - gt / d : 0.5 * (lo + hi);
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    double step = std::abs(tn - t);
    t = tn;
    if (step <= rel_tol * t || hi - lo <= rel_tol * t) break;
  }
  return t;
}

// Smallest hi > start where sign(g(hi)) == target_sign.
double expand_until(const GFun& f, double start, bool want_negative) {
  double hi = std::max(start, 1e-300) * 2.0;
  if (start <= 0.0) hi = 1.0;
  for (int it = 0; it < 2000; ++it) {
    double v = f.g(hi);
    if ((v < 0) == want_negative && v != 0.0) return hi;
    hi *= 2.0;
  }
  throw Error(ErrorCode::NoRoot, "fibering root bracket expansion failed");
}

}  // namespace

FiberingReport fibering_from_energies(double E, double A, double B, double lambda, double p,
                                      double q) {
  FiberingReport rep;
  rep.Cpq = c_pq(p, q);
  rep.nehari_class = nehari_classify(E, A, B, lambda, p, q);
  const double beta = lambda * B;
  if (A > 0 && E > 0) {
    double ts = std::pow(p * (2.0 - q) * E / (2.0 * (p - q) * A), 1.0 / (p - 2.0));
    rep.tstar = ts;
    rep.iu_at_tstar = std::pow(ts, 2.0 - q) * E / 2.0 - std::pow(ts, p - q) * A / p - beta / q;
  }
  GFun f{E, A, beta, p, q};
  const double scale_t = rep.tstar ? *rep.tstar : 1.0;
  const double rel = 1e-15;

  if (A > 0 && E > 0) {
    double tg = std::pow((2.0 - q) * E / ((p - q) * A), 1.0 / (p - 2.0));
    double gmax = f.g(tg);
    double gscale = std::pow(tg, 2.0 - q) * E + std::abs(beta);
    if (std::abs(gmax) <= 1e-12 * gscale) {
      rep.t1 = tg;
      rep.t2 = tg;
      return rep;
    }
    if (gmax < 0) throw Error(ErrorCode::NoRoot, "fibering map has no critical point");
    if (beta > 0) rep.t1 = monotone_root(f, 0.0, tg, rel);
    double hi = expand_until(f, tg, true);
    rep.t2 = monotone_root(f, tg, hi, rel);
    return rep;
  }
  if (A > 0) {  // E == 0: g decreasing from -beta
    if (beta < 0) {
      rep.t2 = std::pow(-beta / A, 1.0 / (p - q));
      return rep;
    }
    throw Error(ErrorCode::NoRoot, "fibering map has no critical point");
  }
  // A <= 0: g non-decreasing from -beta
  if (beta > 0 && (E > 0 || A < 0)) {
    if (E == 0.0) {
      rep.t1 = std::pow(beta / (-A), 1.0 / (p - q));
      return rep;
    }
    double hi = expand_until(f, scale_t, false);
    rep.t1 = monotone_root(f, 0.0, hi, rel);
    return rep;
  }
  throw Error(ErrorCode::NoRoot, "fibering map has no critical point");
}

FiberingReport fibering_analyze(const ScalarField& u, const ProblemParams& pr) {
  if (u.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::InvalidArgument, "u must be nonzero");
  EnergyTriple e = energies(u, pr);
  return fibering_from_energies(e.E, e.A, e.B, pr.lambda, pr.p, pr.q);
}

double cstar(const ProblemParams& pr) {
  double ia = integrate(pr.a, pr.grid()), ib = integrate(pr.b, pr.grid());
  bool ok = (ia < 0 && ib >= 0) || (ia > 0 && ib <= 0);
  if (!ok) throw Error(ErrorCode::Domain, "c* requires ∫a<0≤∫b or ∫a>0≥∫b");
  return std::pow(-ib / ia, 1.0 / (pr.p - pr.q));
}

double lambda0_functional(const ScalarField& u, const ProblemParams& pr) {
  EnergyTriple e = energies(u, pr);
  if (!(e.E > 0 && e.A > 0 && e.B > 0)) return std::numeric_limits<double>::infinity();
  const double p = pr.p, q = pr.q;
  return c_pq(p, q) * std::pow(e.E, (p - q) / (p - 2.0)) /
         (e.B * std::pow(e.A, (2.0 - q) / (p - 2.0)));
}

double lambda0_estimate(const ProblemParams& pr, int n_starts, std::uint64_t rng_seed) {
  const double inf = std::numeric_limits<double>::infinity();
  const double p = pr.p, q = pr.q;
  const double al = (p - q) / (p - 2.0), be = (2.0 - q) / (p - 2.0);
  const Vec& w = pr.grid().weights;
  const SpMat& K = pr.op().stiffness;
  SpMat H = K;
  for (int i = 0; i < H.rows(); ++i) H.coeffRef(i, i) += w[i];
  Eigen::SimplicialLDLT<SpMat> riesz(H);
  auto h1 = [&](const Vec& v) { return std::sqrt(v.dot(H * v)); };

  Rng rng(rng_seed);
  double best = inf;
  const int max_draws = std::max(1, n_starts) * 50;
  int accepted = 0;
  for (int draw = 0; draw < max_draws && accepted < n_starts; ++draw) {
    Vec u = random_trig_field(pr.grid(), rng, true);
    double F = lambda0_functional(u, pr);
    if (!std::isfinite(F)) continue;
    ++accepted;
    u /= h1(u);
    double step = 1.0;
    for (int it = 0; it < 400; ++it) {
      EnergyTriple e = energies(u, pr);
      Vec gA(u.size()), gB(u.size());
      for (int i = 0; i < u.size(); ++i) {
        gA[i] = p * w[i] * pr.a[i] * pw(u[i], p);
        gB[i] = q * w[i] * pr.b[i] * pw(u[i], q);
      }
      Vec grad = al * 2.0 * (K * u) / e.E - gB / e.B - be * gA / e.A;
      Vec d = riesz.solve(grad);
      double logF = std::log(F);
      double slope = grad.dot(d);
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        Vec un = u - step * d;
        double Fn = lambda0_functional(un, pr);
        if (std::isfinite(Fn) && std::log(Fn) <= logF - 1e-4 * step * slope) {
          u = un / h1(un);
          moved = std::abs(Fn - F) > 1e-13 * F;
          F = Fn;
          step = std::min(step * 2.0, 1e3);
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    best = std::min(best, F);
  }
  return best;
}

}  // namespace nehari
