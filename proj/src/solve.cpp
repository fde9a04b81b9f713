#include "nehari/solve.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "nehari/errors.hpp"
#include "nehari/random_fields.hpp"

namespace nehari {

namespace {

Vec newton_direction(const ScalarField& u, const Vec& r, const ProblemParams& pr) {
  DiscreteOperator j = jacobian(u, pr);
  Eigen::SparseLU<SpMat> lu;
  lu.compute(j.stiffness);
  if (lu.info() != Eigen::Success)
    throw Error(ErrorCode::SingularLinearization, "Jacobian factorization failed");
  Vec d = lu.solve(-j.mass.cwiseProduct(r));
  if (!d.allFinite()) throw Error(ErrorCode::SingularLinearization, "Jacobian solve not finite");
  return d;
}

Vec damped_update(const ScalarField& u, const Vec& d, double t, bool nonnegative) {
  if (!nonnegative) return u + t * d;
  Vec un = u;
  for (int i = 0; i < u.size(); ++i) {
    double tb = 1.0;
    if (d[i] < 0) tb = std::min(1.0, 0.8 * u[i] / -d[i]);
    un[i] = std::max(u[i] + t * tb * d[i], 0.0);
  }
  return un;
}

void finish_report(SolveReport& rep, const ProblemParams& pr) {
  rep.energies = energies(rep.u, pr);
  if (pr.epsilon == 0.0)
    rep.nehari_class =
        nehari_classify(rep.energies.E, rep.energies.A, rep.energies.B, pr.lambda, pr.p, pr.q);
  else
    rep.nehari_class = nehari_classify(rep.energies.E, rep.energies.A, regularized_B(rep.u, pr),
                                       pr.lambda, pr.p, pr.q);
}

}  // namespace

SolveReport newton_solve(const ScalarField& u0, const ProblemParams& pr, double tol, int max_iter,
                         const NewtonOptions& opts) {
  pr.validate();
  const Grid& g = pr.grid();
  SolveReport rep;
  rep.u = opts.nonnegative ? Vec(u0.cwiseMax(0.0)) : u0;
  Vec r = residual(rep.u, pr);
  double nr = l2_norm(r, g);
  int it = 0;
  for (; it < max_iter && nr > tol; ++it) {
    Vec d = newton_direction(rep.u, r, pr);
    double t = 1.0;
    bool accepted = false;
    Vec un;
    double nrn = nr;
    while (t > 1e-10) {
      un = damped_update(rep.u, d, t, opts.nonnegative);
      Vec rn = residual(un, pr);
      nrn = l2_norm(rn, g);
      if (std::isfinite(nrn) && nrn * nrn <= (1.0 - 1e-4 * t) * nr * nr) {
        accepted = true;
        r = rn;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    rep.u = un;
    nr = nrn;
  }
  if (nr <= tol && nr > 0.0) {
    // One polishing step, kept only if it lowers the residual.
    try {
      Vec d = newton_direction(rep.u, r, pr);
      Vec un = damped_update(rep.u, d, 1.0, opts.nonnegative);
      double nrn = l2_norm(residual(un, pr), g);
      if (nrn < nr) {
        rep.u = un;
        nr = nrn;
        ++it;
      }
    } catch (const Error&) {
    }
  }
  rep.iterations = it;
  rep.final_residual_norm = nr;
  rep.converged = nr <= tol;
  finish_report(rep, pr);
  if (!rep.converged && opts.throw_on_failure)
    throw Error(ErrorCode::Diverged, "Newton did not reach the tolerance");
  return rep;
}

namespace {

struct Reduced {
  const ProblemParams& pr;
  NehariSign sign;

  std::optional<double> root(const Vec& v) const {
    EnergyTriple e = energies(v, pr);
    try {
      FiberingReport f = fibering_from_energies(e.E, e.A, e.B, pr.lambda, pr.p, pr.q);
      if (sign == NehariSign::Plus) return f.t1;
      return f.t2;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  bool in_cone(const Vec& v) const {
    EnergyTriple e = energies(v, pr);
    return sign == NehariSign::Plus ? e.B * pr.lambda > 0 : e.A > 0;
  }
};

}  // namespace

SolveReport nehari_minimize(const ProblemParams& pr, NehariSign sign, int n_starts,
                            std::uint64_t rng_seed, const MinimizeOptions& opts) {
  pr.validate();
  if (pr.epsilon != 0.0)
    throw Error(ErrorCode::InvalidArgument, "Nehari minimization is defined for epsilon = 0");
  const NehariClass want = sign == NehariSign::Plus ? NehariClass::Nplus : NehariClass::Nminus;
  const SpMat& K = pr.op().stiffness;
  const Vec& w = pr.grid().weights;
  SpMat H = K;
  for (int i = 0; i < H.rows(); ++i) H.coeffRef(i, i) += w[i];
  Eigen::SimplicialLDLT<SpMat> riesz(H);
  auto h1 = [&](const Vec& v) { return std::sqrt(v.dot(H * v)); };

  Reduced red{pr, sign};
  Rng rng(rng_seed);
  int admissible = 0;
  std::optional<SolveReport> best;
  const int max_draws = std::max(1, n_starts) * 20;
  for (int draw = 0; draw < max_draws && admissible < n_starts; ++draw) {
    Vec v = random_trig_field(pr.grid(), rng, true);
    if (!red.in_cone(v)) continue;
    ++admissible;
    v /= h1(v);
    auto t0 = red.root(v);
    if (!t0) continue;
    double t = *t0;
    double J = energies(t * v, pr).I;
    // Steps are taken along the H¹-normalized direction on the unit sphere;
    // the raw gradient scales like t² and is useless as a step length.
    double step = 0.1;
    int flat = 0;
    for (int it = 0; it < opts.max_gradient_iters; ++it) {
      Vec G = t * weak_residual(t * v, pr);
      Vec d = riesz.solve(G);
      double nd = h1(d);
      if (!(nd > 0) || !std::isfinite(nd)) break;
      d /= nd;
      bool moved = false;
      for (int ls = 0; ls < 50; ++ls) {
        Vec vn = (v - step * d).cwiseMax(0.0);
        double nv = h1(vn);
        if (nv > 0) {
          vn /= nv;
          auto tn = red.root(vn);
          if (tn) {
            double Jn = energies(*tn * vn, pr).I;
            double dec = G.dot(v - vn);
            if (Jn <= J - 1e-4 * std::max(dec, 0.0) && Jn <= J) {
              flat = std::abs(J - Jn) <= 1e-13 * std::max(std::abs(J), 1e-300) ? flat + 1 : 0;
              v = vn;
              t = *tn;
              J = Jn;
              moved = true;
              step = std::min(step * 2.0, 1.0);
              break;
            }
          }
        }
        step *= 0.5;
        if (step < 1e-14) break;
      }
      if (!moved || flat >= 3) break;
    }
    NewtonOptions nopt;
    nopt.nonnegative = true;
    nopt.throw_on_failure = false;
    SolveReport rep;
    try {
      rep = newton_solve(t * v, pr, opts.newton_tol, opts.newton_max_iter, nopt);
    } catch (const Error&) {
      continue;
    }
    if (!rep.converged || rep.nehari_class != want) continue;
    if (rep.u.minCoeff() < -1e-10 * rep.u.cwiseAbs().maxCoeff()) continue;
    if (rep.u.maxCoeff() <= 0.0) continue;
    if (!best || rep.energies.I < best->energies.I) best = rep;
  }
  if (admissible == 0)
    throw Error(ErrorCode::NoAdmissibleDirection, "no start lies in the required cone");
  if (!best) throw Error(ErrorCode::NotConverged, "no start produced a converged minimizer");
  return *best;
}

ProblemParams pure_problem(const ProblemParams& pr, GroundStateKind which) {
  ProblemParams q = pr;
  q.epsilon = 0.0;
  if (which == GroundStateKind::PureA) {
    q.lambda = 0.0;
  } else {
    q.a = ScalarField::Zero(pr.size());
    q.lambda = 1.0;
  }
  return q;
}

SolveReport ground_state(const ProblemParams& pr, GroundStateKind which, int n_starts,
                         std::uint64_t rng_seed, const MinimizeOptions& opts) {
  pr.validate();
  const Grid& g = pr.grid();
  if (which == GroundStateKind::PureA) {
    if (!(integrate(pr.a, g) < 0))
      throw Error(ErrorCode::Domain, "pure_a ground state requires ∫a < 0");
    if (!(pr.a.maxCoeff() > 0)) throw Error(ErrorCode::Domain, "pure_a requires a > 0 somewhere");
    return nehari_minimize(pure_problem(pr, which), NehariSign::Minus, n_starts, rng_seed, opts);
  }
  if (!(integrate(pr.b, g) < 0))
    throw Error(ErrorCode::Domain, "pure_b ground state requires ∫b < 0");
  if (!(pr.b.maxCoeff() > 0)) throw Error(ErrorCode::Domain, "pure_b requires b > 0 somewhere");
  return nehari_minimize(pure_problem(pr, which), NehariSign::Plus, n_starts, rng_seed, opts);
}

}  // namespace nehari
