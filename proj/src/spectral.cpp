#include "nehari/spectral.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

SpMat shifted(const SpMat& s, const Vec& w, double sigma) {
  SpMat a = s;
  for (int i = 0; i < a.rows(); ++i) a.coeffRef(i, i) -= sigma * w[i];
  return a;
}

double w_norm(const Vec& x, const Vec& w) { return std::sqrt(w.dot(x.cwiseAbs2())); }

void orient_and_flag(EigenReport& rep, const Vec& w) {
  Vec& phi = rep.eigenfunction;
  if (w.dot(phi) < 0) phi = -phi;
  phi /= w_norm(phi, w);
  rep.c0_norm = phi.cwiseAbs().maxCoeff();
  rep.positive_eigenfunction = phi.maxCoeff() > 0 && phi.minCoeff() / phi.maxCoeff() > 0;
}

}  // namespace

int negative_inertia(const SpMat& a) {
  Eigen::SimplicialLDLT<SpMat> ldlt(a);
  if (ldlt.info() != Eigen::Success) return -1;
  const Vec d = ldlt.vectorD();
  int neg = 0;
  for (int i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) return -1;
    if (d[i] < 0) ++neg;
  }
  return neg;
}

EigenReport smallest_pencil_eig(const SpMat& s, const Vec& w, double rel_tol) {
  const int n = static_cast<int>(w.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.outerSize(); ++k) {
    double off = 0.0, diag = 0.0;
    for (SpMat::InnerIterator it(s, k); it; ++it) {
      if (it.row() == it.col()) diag = it.value();
      else off += std::abs(it.value()) / std::sqrt(w[it.row()] * w[it.col()]);
    }
    lo = std::min(lo, diag / w[k] - off);
    hi = std::min(hi, diag / w[k]);
  }
  Vec ones = Vec::Ones(n);
  hi = std::min(hi, ones.dot(s * ones) / w.sum());
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  for (int it = 0; it < 200 && hi - lo > 1e-9 * scale; ++it) {
    double mid = 0.5 * (lo + hi);
    int c = negative_inertia(shifted(s, w, mid));
    if (c < 0) {
      mid += 1e-12 * scale;
      c = negative_inertia(shifted(s, w, mid));
      if (c < 0) break;
    }
    if (c == 0) lo = mid; else hi = mid;
  }
  const double sigma = lo - std::max(hi - lo, 1e-12 * scale);
  Eigen::SimplicialLDLT<SpMat> solver(shifted(s, w, sigma));
  EigenReport rep;
  Vec x = ones;
  x /= w_norm(x, w);
  for (int it = 0; it < 200; ++it) {
    Vec y = solver.solve(w.cwiseProduct(x));
    x = y / w_norm(y, w);
    Vec sx = (s * x).cwiseQuotient(w);
    rep.eigenvalue = x.dot(s * x);
    double res = w_norm(sx - rep.eigenvalue * x, w);
    rep.residual_norm = res;
    // Relative to ‖Sx‖, floored by the operator scale so eigenvalues near
    // zero (folds, departures) still converge at the rounding level.
    if (res <= rel_tol * std::max(w_norm(sx, w), 1e-5 * scale)) {
      rep.converged = true;
      break;
    }
  }
  rep.eigenfunction = x;
  orient_and_flag(rep, w);
  return rep;
}

std::pair<EigenReport, EigenReport> principal_eigs_weighted(const ScalarField& m, double epsilon,
                                                            const ProblemParams& pr) {
  const Grid& g = pr.grid();
  const Vec& w = g.weights;
  const SpMat& K = pr.op().stiffness;
  if (!(epsilon > 0)) throw Error(ErrorCode::Domain, "epsilon must be positive");
  if (!(integrate(m, g) < 0)) throw Error(ErrorCode::Domain, "weight must have ∫m < 0");
  if (!(m.maxCoeff() > 0)) throw Error(ErrorCode::Domain, "weight must be positive somewhere");

  EigenReport zero;
  zero.eigenvalue = 0.0;
  zero.eigenfunction = Vec::Constant(g.size(), 1.0 / std::sqrt(w.sum()));
  zero.residual_norm = w_norm(pr.op().apply(zero.eigenfunction), w);
  zero.converged = true;
  orient_and_flag(zero, w);

  const Vec mw = w.cwiseProduct(m) * std::pow(epsilon, pr.q - 2.0);
  Vec trial = m.cwiseMax(0.0);
  double hi = trial.dot(K * trial) / trial.dot(mw.cwiseProduct(trial));
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    int c = negative_inertia(shifted(K, mw, mid));
    if (c < 0) {
      mid *= 1.0 + 1e-13;
      c = negative_inertia(shifted(K, mw, mid));
      if (c < 0) break;
    }
    if (c == 0) lo = mid; else hi = mid;
  }
  const double sigma = lo - std::max(hi - lo, 1e-14 * hi);
  Eigen::SimplicialLDLT<SpMat> solver(shifted(K, mw, sigma));
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NotConverged, "shifted weighted operator factorization failed");
  EigenReport pos;
  Vec x = trial / w_norm(trial, w);
  for (int it = 0; it < 100; ++it) {
    Vec y = solver.solve(mw.cwiseProduct(x));
    x = y / w_norm(y, w);
    Vec kx = K * x;
    pos.eigenvalue = x.dot(kx) / x.dot(mw.cwiseProduct(x));
    Vec lx = kx.cwiseQuotient(w);
    Vec res = lx - pos.eigenvalue * mw.cwiseQuotient(w).cwiseProduct(x);
    pos.residual_norm = w_norm(res, w);
    if (pos.residual_norm <= 1e-10 * w_norm(lx, w)) {
      pos.converged = true;
      break;
    }
  }
  pos.eigenfunction = x;
  orient_and_flag(pos, w);
  if (!pos.converged) throw Error(ErrorCode::NotConverged, "weighted inverse iteration stalled");
  return {zero, pos};
}

double dense_positive_principal(const ScalarField& m, double epsilon, const ProblemParams& pr) {
  const Vec& w = pr.grid().weights;
  Eigen::MatrixXd K = Eigen::MatrixXd(pr.op().stiffness);
  Vec mw = w.cwiseProduct(m) * std::pow(epsilon, pr.q - 2.0);
  Eigen::MatrixXd M = mw.asDiagonal();
  Vec trial = m.cwiseMax(0.0);
  double bound = trial.dot(K * trial) / trial.dot(mw.cwiseProduct(trial));
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(K, M, false);
  double best = std::numeric_limits<double>::infinity();
  const auto& al = ges.alphas();
  const auto& be = ges.betas();
  for (int i = 0; i < al.size(); ++i) {
    if (be[i] == 0.0) continue;
    std::complex<double> lam = al[i] / be[i];
    if (std::abs(lam.imag()) > 1e-8 * std::abs(lam)) continue;
    if (lam.real() > 1e-8 * bound) best = std::min(best, lam.real());
  }
  return best;
}

std::vector<EpsLambda> lambda_epsilon_curve(const ProblemParams& pr,
                                            const std::vector<double>& eps_list) {
  std::vector<EpsLambda> out;
  const double ib = integrate(pr.b, pr.grid());
  for (double eps : eps_list) {
    EpsLambda e;
    e.epsilon = eps;
    try {
      if (ib > 0) throw Error(ErrorCode::Domain, "requires ∫b ≤ 0");
      Vec m = pr.b.array() - eps;
      if (!(m.maxCoeff() > 0)) throw Error(ErrorCode::Domain, "b - epsilon has no positive part");
      auto [z, pos] = principal_eigs_weighted(m, eps, pr);
      e.lambda_eps = pos.eigenvalue;
      e.eig = pos;
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.push_back(e);
  }
  return out;
}

EigenReport gamma1(const ScalarField& u, const ProblemParams& pr) {
  DiscreteOperator j = jacobian(u, pr, false);
  return smallest_pencil_eig(j.stiffness, j.mass);
}

double dense_gamma1(const ScalarField& u, const ProblemParams& pr) {
  DiscreteOperator j = jacobian(u, pr, false);
  Vec is = j.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd a = is.asDiagonal() * Eigen::MatrixXd(j.stiffness) * is.asDiagonal();
  a = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Stability classify_stability(double g, double tol) {
  if (g > tol) return Stability::AsymptoticallyStable;
  if (g >= -tol) return Stability::WeaklyStable;
  return Stability::Unstable;
}

}  // namespace nehari
