#include "nehari/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "nehari/errors.hpp"
#include "nehari/random_fields.hpp"
#include "nehari/spectral.hpp"

namespace nehari {

namespace {

constexpr double kTrivialSup = 1e-8;
/// Converged fields whose residual is not small next to the equation's own
/// terms are near-trivial artifacts of an absolute tolerance.
constexpr double kMaxRelativeResidual = 1e-6;

bool genuine(const SolveReport& r, const ProblemParams& pr) {
  return r.converged && r.u.cwiseAbs().maxCoeff() > kTrivialSup &&
         relative_residual(r.u, pr) <= kMaxRelativeResidual;
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::AsymptoticallyStable: return "asymptotically_stable";
    case Stability::WeaklyStable: return "weakly_stable";
    case Stability::Unstable: return "unstable";
  }
  return "unstable";
}

const char* sign_name(NehariSign s) { return s == NehariSign::Plus ? "plus" : "minus"; }

std::string timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json metadata(const std::string& command, const RunConfig& c) {
  return {{"tool", "nehari"}, {"command", command}, {"seed", c.seed}, {"generated_at", timestamp()}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json verdict_json(const Verdict& v) {
  return {{"name", v.name}, {"pass", v.pass}, {"value", json_real(v.value)},
          {"threshold", json_real(v.threshold)}, {"note", v.note}};
}

Json verdicts_json(const std::vector<Verdict>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(verdict_json(v));
  return a;
}

Verdict le(std::string name, double value, double threshold, std::string note = "") {
  return {std::move(name), value <= threshold, value, threshold, std::move(note)};
}

Verdict failed(std::string name, std::string note) {
  return {std::move(name), false, std::nan(""), std::nan(""), std::move(note)};
}

struct Found {
  std::string label;
  SolveReport report;
};

Json solution_json(const Found& f, const ProblemParams& pr, const std::string& file) {
  const SolveReport& r = f.report;
  Json g1 = nullptr, stab = nullptr, g1_err = nullptr;
  try {
    EigenReport e = gamma1(r.u, pr);
    g1 = json_real(e.eigenvalue);
    stab = stability_name(classify_stability(e.eigenvalue));
  } catch (const Error& e) {
    g1_err = e.what();
  }
  return {{"label", f.label},
          {"file", file},
          {"iterations", r.iterations},
          {"final_residual_norm", json_real(r.final_residual_norm)},
          {"relative_residual", json_real(relative_residual(r.u, pr))},
          {"converged", r.converged},
          {"energies", {{"E", r.energies.E}, {"A", r.energies.A}, {"B", r.energies.B},
                        {"I", r.energies.I}}},
          {"nehari_class", nehari_class_name(r.nehari_class)},
          {"gamma1", g1},
          {"gamma1_error", g1_err},
          {"stability", stab},
          {"sup_norm", r.u.cwiseAbs().maxCoeff()},
          {"min", r.u.minCoeff()},
          {"solvability_identity", solvability_identity(r.u, pr)}};
}

/// nehari_minimize with its outcome classified: admissibility failures are
/// reported as "not_admissible", anything else as a failure with its code.
std::optional<SolveReport> try_minimize(const ProblemParams& pr, NehariSign sign, int starts,
                                        std::uint64_t seed, Json& notes) {
  try {
    SolveReport r = nehari_minimize(pr, sign, starts, seed);
    if (genuine(r, pr)) return r;
    notes.push_back({{"label", std::string("nehari_") + sign_name(sign)}, {"reason", "trivial"}});
  } catch (const Error& e) {
    std::string reason = e.code() == ErrorCode::NoAdmissibleDirection ? "not_admissible" : e.what();
    notes.push_back({{"label", std::string("nehari_") + sign_name(sign)}, {"reason", reason}});
  }
  return std::nullopt;
}

}  // namespace

CommandOutput cmd_solve(const RunConfig& c) {
  if (!c.solve) throw ConfigError("solve: config has no 'solve' block");
  const SolveBlock& s = *c.solve;
  ProblemParams pr = c.params(s.lambda, s.epsilon);
  CommandOutput out;
  std::vector<Found> found;
  Json notes = Json::array();

  if (s.epsilon == 0.0) {
    std::uint64_t k = 0;
    for (NehariSign sign : {NehariSign::Plus, NehariSign::Minus})
      if (auto r = try_minimize(pr, sign, s.nehari_starts, c.seed + k++, notes))
        found.push_back({std::string("nehari_") + sign_name(sign), *r});
  } else {
    notes.push_back({{"label", "nehari"}, {"reason", "requires epsilon = 0"}});
  }

  std::vector<std::pair<std::string, ScalarField>> starts;
  for (size_t i = 0; i < s.newton_starts.size(); ++i)
    starts.emplace_back("newton_" + std::to_string(i),
                        sample_coefficient(s.newton_starts[i], pr.grid()).values);
  Rng rng(c.seed);
  for (int i = 0; i < s.random_newton_starts; ++i)
    starts.emplace_back("newton_random_" + std::to_string(i),
                        random_trig_field(pr.grid(), rng, true));
  bool newton_failed = false;
  for (const auto& [label, u0] : starts) {
    NewtonOptions no;
    no.throw_on_failure = false;
    SolveReport r;
    try {
      r = newton_solve(u0, pr, s.tol, s.max_iter, no);
    } catch (const Error& e) {
      newton_failed = true;
      notes.push_back({{"label", label}, {"reason", e.what()}});
      continue;
    }
    if (!r.converged) {
      newton_failed = true;
      notes.push_back({{"label", label}, {"reason", "not converged"}});
    } else if (!genuine(r, pr)) {
      notes.push_back({{"label", label}, {"reason", "trivial"}});
    } else {
      found.push_back({label, r});
    }
  }

  Json sols = Json::array();
  for (size_t k = 0; k < found.size(); ++k) {
    std::string file = "u_" + std::to_string(k) + ".csv";
    sols.push_back(solution_json(found[k], pr, file));
    out.files.push_back({file, field_csv(pr.grid(), found[k].report.u)});
  }
  Json j = {{"metadata", metadata("solve", c)},
            {"audit", audit_json(audit_hypotheses(pr))},
            {"lambda", s.lambda},
            {"epsilon", s.epsilon},
            {"grid", grid_json(pr.grid())},
            {"solutions", sols},
            {"not_found", notes}};
  out.files.push_back({"solutions.json", dump(j)});
  out.exit_code = newton_failed ? kExitSolver : kExitOk;
  out.message = std::to_string(found.size()) + " nontrivial solution(s)";
  return out;
}

CommandOutput cmd_branch(const RunConfig& c) {
  if (!c.branch) throw ConfigError("branch: config has no 'branch' block");
  const BranchBlock& b = *c.branch;
  ProblemParams pr = c.params(0.0, b.epsilon);
  Departure d = b.origin == BranchOrigin::FromZero ? depart_from_zero(pr, b.settings)
                                                   : depart_from_lambda_eps(pr, b.settings);
  Branch br = trace_branch(d, b.origin, pr, b.settings);
  CommandOutput out;
  Json side = branch_sidecar(br, b.settings, pr.grid(), "branch.csv");
  side["departure"] = {{"s", d.s}, {"attempts", d.attempts},
                       {"predicted_lambda", d.predicted_lambda}};
  Json j = {{"metadata", metadata("branch", c)}, {"audit", audit_json(audit_hypotheses(pr))}};
  j.update(side);
  out.files.push_back({"branch.csv", branch_csv(br)});
  out.files.push_back({"branch.json", dump(j)});
  out.message = std::to_string(br.points.size()) + " points, " + br.termination;
  return out;
}

CommandOutput cmd_loop(const RunConfig& c) {
  if (!c.loop) throw ConfigError("loop: config has no 'loop' block");
  const LoopBlock& L = *c.loop;
  ProblemParams pr = c.params();
  HomotopyResult h = epsilon_homotopy(pr, L.eps_list, L.settings);
  const LoopDiagnostics& dg = h.diagnostics;
  CommandOutput out;

  Json branches = Json::array();
  bool solver_error = false;
  bool all_closed = true;
  double worst_gap = 0.0;
  for (size_t i = 0; i < h.branches.size(); ++i) {
    const auto& b = h.branches[i];
    if (!b) {
      solver_error = true;
      all_closed = false;
      branches.push_back({{"epsilon", L.eps_list[i]}, {"error", dg.errors[i]}});
      continue;
    }
    std::string csv = "branch_" + std::to_string(i) + ".csv";
    std::string side = "branch_" + std::to_string(i) + ".json";
    out.files.push_back({csv, branch_csv(*b)});
    out.files.push_back({side, dump(branch_sidecar(*b, L.settings, pr.grid(), csv))});
    bool closed = b->termination == "closed" && b->closed_loop_gap &&
                  *b->closed_loop_gap <= 2 * L.settings.ds_max;
    all_closed = all_closed && closed;
    if (b->closed_loop_gap) worst_gap = std::max(worst_gap, *b->closed_loop_gap);
    branches.push_back({{"epsilon", L.eps_list[i]},
                        {"csv", csv},
                        {"sidecar", side},
                        {"termination", b->termination},
                        {"folds", b->count(BranchEvent::Fold)},
                        {"lambda_zero_crossings", b->count(BranchEvent::LambdaZeroCrossing)},
                        {"closed_loop_gap", json_real(b->closed_loop_gap)}});
  }

  std::vector<Verdict> vs;
  vs.push_back({"loop_closes", all_closed, worst_gap, 2 * L.settings.ds_max,
                "every branch returns to u = 0 near lambda_eps"});
  vs.push_back({"lambda_eps_decreasing", dg.lambda_eps_decreasing, std::nan(""), std::nan(""), ""});
  vs.push_back({"hausdorff_decreasing", dg.hausdorff_decreasing, std::nan(""), std::nan(""),
                "consecutive branch distances"});
  double min_cross = HUGE_VAL;
  bool every_cross = true;
  for (const auto& cn : dg.crossing_norms) {
    if (!cn) every_cross = false;
    else min_cross = std::min(min_cross, *cn);
  }
  vs.push_back({"crossing_norm_floor", every_cross && min_cross >= L.crossing_floor,
                every_cross ? min_cross : std::nan(""), L.crossing_floor,
                "smallest sup norm at lambda = 0 over the epsilon list"});

  Json le_list = Json::array(), gaps = Json::array(), cross = Json::array();
  for (size_t i = 0; i < L.eps_list.size(); ++i) {
    le_list.push_back(json_real(dg.lambda_eps[i]));
    gaps.push_back(json_real(dg.gaps[i]));
    cross.push_back(json_real(dg.crossing_norms[i]));
  }
  Json j = {{"metadata", metadata("loop", c)},
            {"audit", audit_json(audit_hypotheses(pr))},
            {"grid", grid_json(pr.grid())},
            {"settings", settings_json(L.settings)},
            {"eps_list", L.eps_list},
            {"lambda_eps", le_list},
            {"closed_loop_gaps", gaps},
            {"hausdorff", dg.hausdorff},
            {"crossing_norms", cross},
            {"errors", dg.errors},
            {"branches", branches},
            {"verdicts", verdicts_json(vs)}};
  out.files.push_back({"loop_report.json", dump(j)});
  bool pass = std::all_of(vs.begin(), vs.end(), [](const Verdict& v) { return v.pass; });
  out.exit_code = solver_error ? kExitSolver : pass ? kExitOk : kExitVerify;
  out.message = std::to_string(L.eps_list.size()) + " branch(es), verdicts " + (pass ? "pass" : "fail");
  return out;
}

CommandOutput cmd_eigs(const RunConfig& c) {
  EigsBlock e = c.eigs.value_or(EigsBlock{});
  ProblemParams pr = c.params();
  const Grid& g = pr.grid();
  constexpr int kDenseLimit = 2500;
  if (g.size() > kDenseLimit)
    throw ConfigError("eigs: dense spectrum limited to " + std::to_string(kDenseLimit) + " nodes");
  CommandOutput out;
  const DiscreteOperator& op = pr.op();
  Vec is = op.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd a = is.asDiagonal() * Eigen::MatrixXd(op.stiffness) * is.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  Json neumann = Json::array();
  for (int k = 0; k < e.count; ++k) neumann.push_back(es.eigenvalues()[k]);

  Json items = Json::array();
  auto curve = lambda_epsilon_curve(pr, e.eps_list);
  for (size_t i = 0; i < curve.size(); ++i) {
    const EpsLambda& el = curve[i];
    Json item = {{"epsilon", el.epsilon}, {"lambda_eps", json_real(el.lambda_eps)},
                 {"error", el.error}};
    if (el.lambda_eps) {
      double dense = dense_positive_principal(pr.b.array() - el.epsilon, el.epsilon, pr);
      std::string file = "phi_" + std::to_string(i) + ".csv";
      item["dense_lambda_eps"] = dense;
      item["relative_difference"] = std::abs(*el.lambda_eps - dense) / std::abs(dense);
      item["positive_eigenfunction"] = el.eig.positive_eigenfunction;
      item["c0_norm"] = el.eig.c0_norm;
      item["file"] = file;
      out.files.push_back({file, field_csv(g, el.eig.eigenfunction)});
    }
    items.push_back(item);
  }
  Json j = {{"metadata", metadata("eigs", c)},
            {"grid", grid_json(g)},
            {"neumann_eigenvalues", neumann},
            {"lambda_eps", items}};
  out.files.push_back({"eigs.json", dump(j)});
  out.message = std::to_string(e.count) + " Neumann eigenvalues";
  return out;
}

CommandOutput cmd_verify(const RunConfig& c) {
  VerifyBlock v = c.verify.value_or(VerifyBlock{});
  ProblemParams pr = c.params(v.lambda, 0.0);
  if (v.corrupt_laplacian) {
    auto disc = std::make_shared<Discretization>(*pr.disc);
    disc->op.stiffness.coeffRef(0, 0) *= 1.0 + 1e-3;
    pr.disc = disc;
  }
  const Grid& g = pr.grid();
  const SpMat& k = pr.op().stiffness;
  BoundsReport rep;
  std::vector<Verdict>& vs = rep.verdicts;
  const double tol_id = 1e-12;

  vs.push_back(le("operator_row_sum", relative_row_sum_defect(k), 1e-14));
  vs.push_back(le("operator_symmetry", symmetry_defect(k), 0.0));
  vs.push_back(le("operator_constant_nullspace",
                  pr.op().stiffness_apply(Vec::Ones(g.size())).cwiseAbs().maxCoeff(), 0.0));

  Json solutions = Json::array();
  Json notes = Json::array();
  std::uint64_t seed = c.seed;
  for (NehariSign sign : {NehariSign::Plus, NehariSign::Minus}) {
    auto r = try_minimize(pr, sign, v.nehari_starts, seed++, notes);
    if (!r) continue;
    const std::string tag = sign_name(sign);
    double id = solvability_identity(r->u, pr);
    rep.identity_residuals.push_back(id);
    vs.push_back(le("identity_" + tag, id, l1_norm(residual(r->u, pr), g) + tol_id,
                    "bounded by the L1 residual"));
    vs.push_back(le("residual_" + tag, r->final_residual_norm, 1e-8));
    solutions.push_back(solution_json({"nehari_" + tag, *r}, pr, ""));
  }

  const double eps0 = v.epsilon0.value_or(0.0);
  try {
    LambdaBar lb = best_lambda_bar(pr, eps0);
    rep.lambda_bar = lb.value;
    ProblemParams at = pr.with_lambda(1.1 * lb.value).with_epsilon(eps0);
    Rng rng(c.seed);
    NewtonOptions no;
    no.nonnegative = true;
    no.throw_on_failure = false;
    int hits = 0;
    for (int i = 0; i < v.nonexistence_starts; ++i) {
      double scale = std::pow(10.0, uniform(rng, -2.0, 2.0));
      Vec u0 = scale * random_trig_field(g, rng, true);
      try {
        SolveReport r = newton_solve(u0, at, 1e-9 * std::max(1.0, scale), 60, no);
        if (genuine(r, at) && r.u.minCoeff() >= -1e-12) ++hits;
      } catch (const Error&) {
      }
    }
    vs.push_back({"nonexistence_above_lambda_bar", hits == 0, double(hits), 0.0,
                  "consistent: " + std::to_string(v.nonexistence_starts) +
                      " nonnegative Newton starts at 1.1 lambda_bar"});
  } catch (const Error& e) {
    rep.lambda_bar_reason = e.code() == ErrorCode::Domain ? "no_admissible_ball" : e.what();
  }

  if (!v.delta) {
    rep.Lambda0_reason = "delta_not_configured";
  } else {
    try {
      WindowReport w = subsupersolution_window(pr, *v.delta, 6, c.seed);
      rep.Lambda0 = w.Lambda0;
      rep.Lambda0_reason = w.reason;
      if (w.Lambda0) {
        double lam = 0.5 * *w.Lambda0;
        SolveReport u = nehari_minimize(pr.with_lambda(lam), NehariSign::Plus, v.nehari_starts, c.seed);
        Vec bound = std::pow(lam, 1.0 / (2.0 - pr.q)) * w.w_delta;
        vs.push_back(le("window_upper_barrier", (u.u - bound).maxCoeff(),
                        1e-9 * std::max(1.0, bound.maxCoeff()), "u <= lambda^{1/(2-q)} w_delta at Lambda0/2"));
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Domain) rep.Lambda0_reason = std::string("domain: ") + e.what();
      else vs.push_back(failed("window_upper_barrier", e.what()));
    }
  }

  Json floor_json = nullptr;
  if (v.floor) {
    try {
      FloorReport f = no_bifurcation_floor(pr, v.floor->lambda, v.floor->d);
      SolveReport u =
          nehari_minimize(pr.with_lambda(v.floor->lambda), NehariSign::Plus, v.nehari_starts, c.seed);
      if (!(u.energies.B > 0)) throw Error(ErrorCode::NotConverged, "plus minimizer has B <= 0");
      vs.push_back(le("positive_floor", (f.floor * f.phi1 - u.u).maxCoeff(), 1e-9,
                      "u >= c phi1 on the floor subinterval"));
      floor_json = {{"floor", f.floor}, {"b0", f.b0}, {"a0", f.a0}, {"lambda1", f.lambda1},
                    {"delta_bar", json_real(f.delta_bar)}};
    } catch (const Error& e) {
      vs.push_back(failed("positive_floor", e.what()));
    }
  }

  Json scaling = nullptr;
  if (v.sweep) {
    const SweepBlock& sw = *v.sweep;
    const double kappa = sw.law == ScalingLaw::Concave2mq ? 1.0 / (2.0 - pr.q) : 1.0 / (pr.p - pr.q);
    try {
      std::vector<double> lams = sw.lambdas;
      std::sort(lams.begin(), lams.end());
      std::vector<std::pair<double, ScalarField>> samples;
      for (double lam : lams) {
        // u scales like λ^κ, so the Newton tolerance follows it.
        MinimizeOptions mo;
        mo.newton_tol = 1e-10 * std::min(1.0, std::pow(lam, kappa));
        SolveReport r = nehari_minimize(pr.with_lambda(lam), sw.sign, v.nehari_starts, c.seed, mo);
        samples.emplace_back(lam, r.u);
      }
      ScalarField ref = sw.law == ScalingLaw::ConvexPmq
                            ? ScalarField::Constant(1, cstar(pr))
                            : ground_state(pr, GroundStateKind::PureB, 6, c.seed).u;
      ScalingFit fit = scaling_fit(samples, sw.law, pr.p, pr.q, ref);
      vs.push_back(le("scaling_exponent", std::abs(fit.exponent - kappa) / kappa, sw.tolerance,
                      "relative deviation from the predicted exponent"));
      double worst = *std::max_element(fit.profile_errors.begin(), fit.profile_errors.end());
      if (sw.law == ScalingLaw::ConvexPmq) {
        vs.push_back(le("scaling_profile", worst, sw.profile_tolerance,
                        "sup distance of the rescaled profile to c*"));
      } else {
        bool mono = true;
        for (size_t i = 1; i < fit.profile_errors.size(); ++i)
          mono = mono && fit.profile_errors[i - 1] < fit.profile_errors[i];
        vs.push_back({"scaling_profile_monotone", mono, worst, std::nan(""),
                      "distance to w0 decreases as lambda decreases"});
      }
      scaling = {{"lambdas", lams},
                 {"sign", sign_name(sw.sign)},
                 {"law", sw.law == ScalingLaw::ConvexPmq ? "pmq" : "2mq"},
                 {"predicted_exponent", kappa},
                 {"exponent", fit.exponent},
                 {"constant", fit.constant},
                 {"fit_residual", fit.fit_residual},
                 {"profile_errors", fit.profile_errors}};
    } catch (const Error& e) {
      vs.push_back(failed("scaling_exponent", e.what()));
    }
  }

  Json j = {{"metadata", metadata("verify", c)},
            {"audit", audit_json(audit_hypotheses(pr))},
            {"lambda", v.lambda},
            {"bounds",
             {{"lambda_bar", json_real(rep.lambda_bar)},
              {"lambda_bar_reason", rep.lambda_bar_reason},
              {"Lambda0", json_real(rep.Lambda0)},
              {"Lambda0_reason", rep.Lambda0_reason},
              {"identity_residuals", rep.identity_residuals},
              {"floor", floor_json}}},
            {"solutions", solutions},
            {"not_found", notes},
            {"scaling", scaling},
            {"verdicts", verdicts_json(vs)},
            {"all_pass", rep.all_pass()}};
  CommandOutput out;
  out.files.push_back({"verify_report.json", dump(j)});
  out.exit_code = rep.all_pass() ? kExitOk : kExitVerify;
  int fails = static_cast<int>(std::count_if(vs.begin(), vs.end(), [](const Verdict& x) { return !x.pass; }));
  out.message = std::to_string(vs.size()) + " gates, " + std::to_string(fails) + " failed";
  return out;
}

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::filesystem::path& out, std::optional<std::uint64_t> seed,
                std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  HypothesisAudit au = audit_hypotheses(cfg.params());
  log << "audit: int a = " << format_real(au.int_a) << ", int b = " << format_real(au.int_b) << '\n';
  for (const auto& f : au.flags) log << "audit: " << f << '\n';

  CommandOutput res;
  try {
    if (command == "solve") res = cmd_solve(cfg);
    else if (command == "branch") res = cmd_branch(cfg);
    else if (command == "loop") res = cmd_loop(cfg);
    else if (command == "eigs") res = cmd_eigs(cfg);
    else if (command == "verify") res = cmd_verify(cfg);
    else {
      log << "unknown command '" << command << "'\n";
      return kExitConfig;
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "solver error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? kExitConfig : kExitSolver;
  }

  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    log << "cannot create output directory '" << out.string() << "': " << ec.message() << '\n';
    return kExitConfig;
  }
  for (const auto& f : res.files) {
    std::ofstream os(out / f.name, std::ios::binary);
    os << f.content;
    if (!os) {
      log << "failed to write " << (out / f.name).string() << '\n';
      return kExitSolver;
    }
  }
  log << command << ": " << res.message << '\n';
  return res.exit_code;
}

}  // namespace nehari
