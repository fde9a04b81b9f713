#include "nehari/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

namespace nehari {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void allow_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where, "expected a table");
  for (const auto& [k, v] : obj.items()) {
    bool ok = std::any_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; });
    if (!ok) fail(where, "unknown key '" + k + "'");
  }
}

double real(const Json& obj, const char* key, const std::string& where,
            std::optional<double> def = std::nullopt) {
  if (!obj.contains(key)) {
    if (def) return *def;
    fail(where, std::string("missing '") + key + "'");
  }
  const Json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) fail(where + "." + key, "must be finite");
  return x;
}

int integer(const Json& obj, const char* key, const std::string& where, std::optional<int> def) {
  if (!obj.contains(key)) {
    if (def) return *def;
    fail(where, std::string("missing '") + key + "'");
  }
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

std::string text(const Json& obj, const char* key, const std::string& where,
                 const std::string& def) {
  if (!obj.contains(key)) return def;
  if (!obj.at(key).is_string()) fail(where + "." + key, "expected a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> real_list(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where, std::string("missing '") + key + "'");
  const Json& v = obj.at(key);
  if (!v.is_array() || v.empty()) fail(where + "." + key, "expected a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(where + "." + key, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CoeffTerm parse_term(const Json& t, const std::string& where) {
  if (!t.is_object() || !t.contains("kind")) fail(where, "term needs a 'kind'");
  const std::string kind = text(t, "kind", where, "");
  if (kind == "constant") {
    allow_keys(t, where, {"kind", "value"});
    return CoeffTerm::constant(real(t, "value", where));
  }
  if (kind == "cosine") {
    allow_keys(t, where, {"kind", "k", "amplitude", "ky"});
    return CoeffTerm::cosine(integer(t, "k", where, std::nullopt), real(t, "amplitude", where),
                             integer(t, "ky", where, 0));
  }
  if (kind == "bump") {
    allow_keys(t, where, {"kind", "center", "width", "height", "center_y"});
    double w = real(t, "width", where);
    if (!(w > 0)) fail(where + ".width", "must be positive");
    return CoeffTerm::bump(real(t, "center", where), w, real(t, "height", where),
                           real(t, "center_y", where, 0.0));
  }
  if (kind == "step") {
    allow_keys(t, where, {"kind", "breakpoint", "left", "right"});
    return CoeffTerm::step(real(t, "breakpoint", where), real(t, "left", where),
                           real(t, "right", where));
  }
  fail(where + ".kind", "unknown term kind '" + kind + "'");
}

CoeffSpec parse_spec(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "coefficient spec must be a non-empty term list");
  CoeffSpec s;
  for (size_t i = 0; i < v.size(); ++i)
    s.terms.push_back(parse_term(v[i], where + "[" + std::to_string(i) + "]"));
  return s;
}

ContinuationSettings parse_settings(const Json& obj, const std::string& where) {
  ContinuationSettings s;
  if (obj.is_null()) return s;
  allow_keys(obj, where,
             {"ds_init", "ds_min", "ds_max", "newton_tol", "max_steps", "direction",
              "newton_max_iter", "lambda_max", "sup_max", "compute_gamma1"});
  s.ds_init = real(obj, "ds_init", where, s.ds_init);
  s.ds_min = real(obj, "ds_min", where, s.ds_min);
  s.ds_max = real(obj, "ds_max", where, s.ds_max);
  s.newton_tol = real(obj, "newton_tol", where, s.newton_tol);
  s.max_steps = integer(obj, "max_steps", where, s.max_steps);
  s.direction = integer(obj, "direction", where, s.direction);
  s.newton_max_iter = integer(obj, "newton_max_iter", where, s.newton_max_iter);
  s.lambda_max = real(obj, "lambda_max", where, s.lambda_max);
  s.sup_max = real(obj, "sup_max", where, s.sup_max);
  if (obj.contains("compute_gamma1")) {
    if (!obj.at("compute_gamma1").is_boolean()) fail(where + ".compute_gamma1", "expected a bool");
    s.compute_gamma1 = obj.at("compute_gamma1").get<bool>();
  }
  try {
    s.validate();
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return s;
}

Subinterval parse_interval(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    fail(where, "expected [lo, hi]");
  Subinterval s{v[0].get<double>(), v[1].get<double>()};
  if (!(s.hi > s.lo)) fail(where, "requires lo < hi");
  return s;
}

NehariSign parse_sign(const std::string& s, const std::string& where) {
  if (s == "plus") return NehariSign::Plus;
  if (s == "minus") return NehariSign::Minus;
  fail(where, "sign must be 'plus' or 'minus'");
}

void check_eps_list(const std::vector<double>& eps, const std::string& where) {
  for (size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0)) fail(where, "epsilons must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) fail(where, "epsilons must strictly decrease");
  }
}

}  // namespace

ProblemParams RunConfig::params(double lambda, double epsilon) const {
  return make_params(grid, a, b, p, q, lambda, epsilon);
}

RunConfig parse_config(const Json& j) {
  allow_keys(j, "config",
             {"grid", "coefficients", "p", "q", "seed", "solve", "branch", "loop", "eigs", "verify"});
  RunConfig c;

  if (!j.contains("grid")) fail("config", "missing 'grid'");
  const Json& g = j.at("grid");
  allow_keys(g, "grid", {"dim", "n", "endpoints"});
  int dim = integer(g, "dim", "grid", 1);
  int n = integer(g, "n", "grid", std::nullopt);
  if (dim != 1 && dim != 2) fail("grid.dim", "must be 1 or 2");
  if (n < 3) fail("grid.n", "must be at least 3, got " + std::to_string(n));
  std::vector<std::pair<double, double>> ends;
  if (g.contains("endpoints")) {
    const Json& e = g.at("endpoints");
    if (!e.is_array() || static_cast<int>(e.size()) != dim) fail("grid.endpoints", "one [lo, hi] per axis");
    for (size_t i = 0; i < e.size(); ++i) {
      Subinterval s = parse_interval(e[i], "grid.endpoints[" + std::to_string(i) + "]");
      ends.emplace_back(s.lo, s.hi);
    }
  } else {
    ends.assign(dim, {0.0, 1.0});
  }
  c.grid = build_grid(dim, n, ends);

  if (!j.contains("coefficients")) fail("config", "missing 'coefficients'");
  const Json& co = j.at("coefficients");
  allow_keys(co, "coefficients", {"a", "b"});
  if (!co.contains("a") || !co.contains("b")) fail("coefficients", "needs both 'a' and 'b'");
  c.a = parse_spec(co.at("a"), "coefficients.a");
  c.b = parse_spec(co.at("b"), "coefficients.b");

  c.p = real(j, "p", "config");
  c.q = real(j, "q", "config");
  if (!(c.p > 2)) fail("p", "must be > 2, got " + format_real(c.p));
  if (!(c.q > 1 && c.q < 2)) fail("q", "must lie in (1, 2), got " + format_real(c.q));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }

  if (j.contains("solve")) {
    const Json& s = j.at("solve");
    const std::string w = "solve";
    allow_keys(s, w,
               {"lambda", "epsilon", "nehari_starts", "newton_starts", "random_newton_starts",
                "tol", "max_iter"});
    SolveBlock b;
    b.lambda = real(s, "lambda", w);
    b.epsilon = real(s, "epsilon", w, 0.0);
    if (b.epsilon < 0) fail("solve.epsilon", "must be non-negative");
    b.nehari_starts = integer(s, "nehari_starts", w, b.nehari_starts);
    b.random_newton_starts = integer(s, "random_newton_starts", w, 0);
    b.tol = real(s, "tol", w, b.tol);
    b.max_iter = integer(s, "max_iter", w, b.max_iter);
    if (b.nehari_starts < 1 || b.random_newton_starts < 0 || !(b.tol > 0) || b.max_iter < 1)
      fail(w, "counts and tolerances must be positive");
    if (s.contains("newton_starts")) {
      const Json& ns = s.at("newton_starts");
      if (!ns.is_array()) fail("solve.newton_starts", "expected a list of term lists");
      for (size_t i = 0; i < ns.size(); ++i)
        b.newton_starts.push_back(parse_spec(ns[i], "solve.newton_starts[" + std::to_string(i) + "]"));
    }
    c.solve = b;
  }

  if (j.contains("branch")) {
    const Json& s = j.at("branch");
    allow_keys(s, "branch", {"epsilon", "origin", "continuation"});
    BranchBlock b;
    b.epsilon = real(s, "epsilon", "branch");
    if (!(b.epsilon > 0)) fail("branch.epsilon", "must be positive");
    std::string o = text(s, "origin", "branch", "from_zero");
    if (o == "from_zero") b.origin = BranchOrigin::FromZero;
    else if (o == "from_lambda_eps") b.origin = BranchOrigin::FromLambdaEps;
    else fail("branch.origin", "must be 'from_zero' or 'from_lambda_eps'");
    b.settings = parse_settings(s.value("continuation", Json()), "branch.continuation");
    c.branch = b;
  }

  if (j.contains("loop")) {
    const Json& s = j.at("loop");
    allow_keys(s, "loop", {"eps_list", "continuation", "crossing_floor"});
    LoopBlock b;
    b.eps_list = real_list(s, "eps_list", "loop");
    check_eps_list(b.eps_list, "loop.eps_list");
    b.settings = parse_settings(s.value("continuation", Json()), "loop.continuation");
    b.crossing_floor = real(s, "crossing_floor", "loop", b.crossing_floor);
    if (!(b.crossing_floor > 0)) fail("loop.crossing_floor", "must be positive");
    c.loop = b;
  }

  if (j.contains("eigs")) {
    const Json& s = j.at("eigs");
    allow_keys(s, "eigs", {"eps_list", "count"});
    EigsBlock b;
    if (s.contains("eps_list")) b.eps_list = real_list(s, "eps_list", "eigs");
    for (double e : b.eps_list)
      if (!(e > 0)) fail("eigs.eps_list", "epsilons must be positive");
    b.count = integer(s, "count", "eigs", b.count);
    if (b.count < 1 || b.count > c.grid.size()) fail("eigs.count", "out of range");
    c.eigs = b;
  }

  if (j.contains("verify")) {
    const Json& s = j.at("verify");
    const std::string w = "verify";
    allow_keys(s, w,
               {"lambda", "nehari_starts", "epsilon0", "nonexistence_starts", "delta", "floor",
                "sweep", "test_hooks"});
    VerifyBlock b;
    b.lambda = real(s, "lambda", w, b.lambda);
    b.nehari_starts = integer(s, "nehari_starts", w, b.nehari_starts);
    b.nonexistence_starts = integer(s, "nonexistence_starts", w, b.nonexistence_starts);
    if (b.nehari_starts < 1 || b.nonexistence_starts < 1) fail(w, "start counts must be positive");
    if (s.contains("epsilon0")) {
      b.epsilon0 = real(s, "epsilon0", w);
      if (*b.epsilon0 < 0) fail("verify.epsilon0", "must be non-negative");
    }
    if (s.contains("delta")) {
      b.delta = real(s, "delta", w);
      if (!(*b.delta > 0)) fail("verify.delta", "must be positive");
    }
    if (s.contains("floor")) {
      const Json& f = s.at("floor");
      allow_keys(f, "verify.floor", {"subinterval", "lambda"});
      FloorBlock fb;
      if (!f.contains("subinterval")) fail("verify.floor", "missing 'subinterval'");
      fb.d = parse_interval(f.at("subinterval"), "verify.floor.subinterval");
      fb.lambda = real(f, "lambda", "verify.floor");
      if (!(fb.lambda > 0)) fail("verify.floor.lambda", "must be positive");
      b.floor = fb;
    }
    if (s.contains("sweep")) {
      const Json& f = s.at("sweep");
      const std::string ws = "verify.sweep";
      allow_keys(f, ws, {"lambdas", "lo", "hi", "count", "sign", "law", "tolerance", "profile_tolerance"});
      SweepBlock sb;
      if (f.contains("lambdas")) {
        sb.lambdas = real_list(f, "lambdas", ws);
      } else {
        double lo = real(f, "lo", ws), hi = real(f, "hi", ws);
        int n = integer(f, "count", ws, std::nullopt);
        if (!(lo > 0 && hi > lo) || n < 2) fail(ws, "requires 0 < lo < hi and count >= 2");
        for (int k = 0; k < n; ++k) sb.lambdas.push_back(lo * std::pow(hi / lo, double(k) / (n - 1)));
      }
      for (double l : sb.lambdas)
        if (!(l > 0)) fail(ws + ".lambdas", "must be positive");
      sb.sign = parse_sign(text(f, "sign", ws, "plus"), ws + ".sign");
      std::string law = text(f, "law", ws, "pmq");
      if (law == "pmq") sb.law = ScalingLaw::ConvexPmq;
      else if (law == "2mq") sb.law = ScalingLaw::Concave2mq;
      else fail(ws + ".law", "must be 'pmq' or '2mq'");
      sb.tolerance = real(f, "tolerance", ws, sb.tolerance);
      sb.profile_tolerance = real(f, "profile_tolerance", ws, sb.profile_tolerance);
      b.sweep = sb;
    }
    if (s.contains("test_hooks")) {
      const Json& h = s.at("test_hooks");
      allow_keys(h, "verify.test_hooks", {"corrupt_laplacian"});
      b.corrupt_laplacian = h.value("corrupt_laplacian", false);
    }
    c.verify = b;
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

namespace {

struct Run {
  int lo, hi;
};

/// Maximal runs of consecutive nodes satisfying `pred` (1D).
template <class Pred>
std::vector<Run> runs(int n, Pred pred) {
  std::vector<Run> out;
  for (int i = 0; i < n;) {
    if (!pred(i)) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && pred(j + 1)) ++j;
    out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

}  // namespace

HypothesisAudit audit_hypotheses(const ProblemParams& pr) {
  const Grid& g = pr.grid();
  const int n = pr.size();
  HypothesisAudit au;
  au.int_a = integrate(pr.a, g);
  au.int_b = integrate(pr.b, g);
  for (int i = 0; i < n; ++i) {
    au.a_plus += pr.a[i] > 0;
    au.a_minus += pr.a[i] < 0;
    au.b_plus += pr.b[i] > 0;
    au.b_minus += pr.b[i] < 0;
  }
  au.existence_condition = au.int_a < 0 || au.int_b < 0;
  au.loop_condition = au.a_plus > 0 && au.b_plus > 0 && au.int_b <= 0 && au.int_a < 0;
  if (!au.existence_condition) au.flags.push_back("neither integral of a nor of b is negative");
  if (!au.loop_condition) au.flags.push_back("loop condition fails");
  if (g.dim != 1) return au;

  auto interior_run_with = [&](auto pred) {
    for (const Run& r : runs(n, [&](int i) { return pr.a[i] >= 0 && pred(i); })) {
      if (r.lo == 0 || r.hi == n - 1) continue;
      for (int i = r.lo; i <= r.hi; ++i)
        if (pr.a[i] > 0) return true;
    }
    return false;
  };
  au.h0_b1 = interior_run_with([&](int i) { return pr.b[i] > 0; });
  au.h0_b2 = interior_run_with([&](int i) { return pr.b[i] < 0; });
  auto ap = runs(n, [&](int i) { return pr.a[i] > 0; });
  auto anp = runs(n, [&](int i) { return pr.a[i] <= 0; });
  bool a_off = true;
  for (const Run& r : anp)
    for (int i = r.lo; i <= r.hi; ++i) {
      bool next_to_plus = (i > 0 && pr.a[i - 1] > 0) || (i + 1 < n && pr.a[i + 1] > 0);
      if (!(pr.a[i] < 0) && !next_to_plus) a_off = false;
    }
  au.h1 = ap.size() == 1 && ap[0].lo > 0 && ap[0].hi < n - 1 && a_off;
  au.h3 = runs(n, [&](int i) { return pr.b[i] > 0; }).size() == 1 &&
          runs(n, [&](int i) { return pr.b[i] < 0; }).size() == 1;
  if (!*au.h0_b1) au.flags.push_back("no interior run with a >= 0, a != 0, b > 0");
  if (!*au.h0_b2) au.flags.push_back("no interior run with a >= 0, a != 0, b < 0");
  if (!*au.h1) au.flags.push_back("positive set of a is not a single interior run");
  if (!*au.h3) au.flags.push_back("sign sets of b are not single runs");
  return au;
}

Json audit_json(const HypothesisAudit& a) {
  auto opt = [](const std::optional<bool>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"int_a", a.int_a},
          {"int_b", a.int_b},
          {"nodes", {{"a_plus", a.a_plus}, {"a_minus", a.a_minus}, {"b_plus", a.b_plus},
                     {"b_minus", a.b_minus}}},
          {"existence_condition", a.existence_condition},
          {"loop_condition", a.loop_condition},
          {"h0_b1", opt(a.h0_b1)},
          {"h0_b2", opt(a.h0_b2)},
          {"h1", opt(a.h1)},
          {"h3", opt(a.h3)},
          {"flags", a.flags}};
}

}  // namespace nehari
