#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "nehari/commands.hpp"

using namespace nehari;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("nehari_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Json term_const(double c) { return {{"kind", "constant"}, {"value", c}}; }
Json term_cos(double amp) { return {{"kind", "cosine"}, {"k", 1}, {"amplitude", amp}}; }

Json constant_config() {
  return {{"grid", {{"dim", 1}, {"n", 101}}},
          {"coefficients", {{"a", {term_const(-1.0)}}, {"b", {term_const(1.0)}}}},
          {"p", 4.0},
          {"q", 1.5},
          {"solve", {{"lambda", 0.1}}},
          {"verify", {{"lambda", 0.1}}}};
}

Json loop_config(std::vector<double> eps) {
  return {{"grid", {{"dim", 1}, {"n", 201}}},
          {"coefficients",
           {{"a", {term_const(-1.0), {{"kind", "bump"}, {"center", 0.5}, {"width", 0.15}, {"height", 3.0}}}},
            {"b", {term_cos(1.0), term_const(-0.05)}}}},
          {"p", 4.0},
          {"q", 1.5},
          {"seed", 9},
          {"loop", {{"eps_list", eps}, {"crossing_floor", 0.5}}}};
}

struct Run {
  int code;
  std::string log;
  fs::path out;
};

Run run(const std::string& cmd, const Json& cfg, const std::string& name,
        std::optional<std::uint64_t> seed = std::nullopt) {
  fs::path d = scratch(name);
  fs::path c = d / "config.json";
  std::ofstream(c) << cfg.dump(2);
  std::ostringstream log;
  int code = run_command(cmd, c, d / "out", seed, log);
  return {code, log.str(), d / "out"};
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("solve on constant coefficients reports the constant Nplus solution") {
  Run r = run("solve", constant_config(), "solve_const");
  REQUIRE(r.code == kExitOk);
  Json j = read_json(r.out / "solutions.json");
  REQUIRE(j["solutions"].size() >= 1);
  bool found = false;
  for (const auto& s : j["solutions"]) {
    if (s["nehari_class"] != "Nplus") continue;
    double sup = s["sup_norm"];
    if (std::abs(sup - std::pow(0.1, 0.4)) > 1e-10) continue;
    CHECK(s["gamma1"].get<double>() > 0);
    CHECK(s["gamma1"].get<double>() == doctest::Approx(2.5 * std::pow(0.1, 0.8)).epsilon(1e-8));
    CHECK(fs::exists(r.out / s["file"].get<std::string>()));
    found = true;
  }
  CHECK(found);
  CHECK(j["metadata"].contains("generated_at"));
}

TEST_CASE("solve at lambda = 0 with nonnegative integral of a finds nothing") {
  Json c = constant_config();
  c["coefficients"]["a"] = {term_cos(1.0), term_const(0.2)};
  c["coefficients"]["b"] = {term_cos(1.0), term_const(-0.1)};
  c["solve"] = {{"lambda", 0.0}, {"random_newton_starts", 4}};
  Run r = run("solve", c, "solve_l0");
  Json j = read_json(r.out / "solutions.json");
  CHECK(j["solutions"].empty());
}

TEST_CASE("config validation exits 2 with a named bound") {
  Json c = constant_config();
  c["q"] = 2.5;
  Run r = run("solve", c, "bad_q");
  CHECK(r.code == kExitConfig);
  CHECK(r.log.find("q: must lie in (1, 2)") != std::string::npos);

  c = constant_config();
  c["p"] = 2.0;
  CHECK(run("solve", c, "bad_p").code == kExitConfig);
  c = constant_config();
  c["grid"]["n"] = 2;
  CHECK(run("solve", c, "bad_n").code == kExitConfig);
  c = constant_config();
  c["coefficients"]["a"] = Json::array();
  CHECK(run("solve", c, "bad_a").code == kExitConfig);
  c = constant_config();
  c["solvee"] = Json::object();
  Run typo = run("solve", c, "typo");
  CHECK(typo.code == kExitConfig);
  CHECK(typo.log.find("unknown key 'solvee'") != std::string::npos);
  CHECK(run("branch", constant_config(), "no_block").code == kExitConfig);
  CHECK(run("frobnicate", constant_config(), "bad_cmd").code == kExitConfig);
}

TEST_CASE("verify: pristine constant config passes, corrupted Laplacian fails with exit 4") {
  Run ok = run("verify", constant_config(), "verify_ok");
  CHECK(ok.code == kExitOk);
  CHECK(read_json(ok.out / "verify_report.json")["all_pass"] == true);

  Json c = constant_config();
  c["verify"]["test_hooks"] = {{"corrupt_laplacian", true}};
  Run bad = run("verify", c, "verify_bad");
  CHECK(bad.code == kExitVerify);
  Json j = read_json(bad.out / "verify_report.json");
  bool row_sum_failed = false;
  for (const auto& v : j["verdicts"])
    if (v["name"] == "operator_row_sum") row_sum_failed = !v["pass"].get<bool>();
  CHECK(row_sum_failed);
}

TEST_CASE("verify: lambda sweep with int a > 0 > int b reports the convex exponent") {
  Json c = constant_config();
  c["coefficients"]["a"] = {term_const(0.2), term_cos(1.0)};
  c["coefficients"]["b"] = {term_const(-0.2), term_cos(1.0)};
  c["verify"] = {{"lambda", 0.01},
                 {"sweep",
                  {{"lo", 1e-4}, {"hi", 1e-2}, {"count", 5}, {"sign", "minus"}, {"law", "pmq"},
                   {"profile_tolerance", 0.05}}}};
  Run r = run("verify", c, "verify_sweep");
  CHECK(r.code == kExitOk);
  Json s = read_json(r.out / "verify_report.json")["scaling"];
  CHECK(std::abs(s["exponent"].get<double>() - 0.4) <= 0.05 * 0.4);
}

TEST_CASE("loop: single epsilon gives an empty Hausdorff list") {
  Run r = run("loop", loop_config({0.1}), "loop_one");
  CHECK(r.code == kExitOk);
  Json j = read_json(r.out / "loop_report.json");
  CHECK(j["hausdorff"].empty());
  CHECK(j["branches"].size() == 1);
  CHECK(fs::exists(r.out / "branch_0.csv"));
  CHECK(fs::exists(r.out / "branch_0.json"));
}

TEST_CASE("loop: rerun with the same seed is byte identical") {
  Json c = loop_config({0.1, 0.05});
  Run a = run("loop", c, "loop_a", 42);
  Run b = run("loop", c, "loop_b", 42);
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  for (const char* f : {"branch_0.csv", "branch_1.csv", "branch_0.json", "branch_1.json"})
    CHECK(read_text(a.out / f) == read_text(b.out / f));
  Json ja = read_json(a.out / "loop_report.json"), jb = read_json(b.out / "loop_report.json");
  CHECK(ja["metadata"]["seed"] == 42);
  ja.erase("metadata");
  jb.erase("metadata");
  CHECK(ja == jb);
}

TEST_CASE("loop: a departure failure exits 3") {
  Json c = loop_config({0.1});
  c["coefficients"]["b"] = {term_const(0.1)};  // ∫(b - ε) = 0
  CHECK(run("loop", c, "loop_fail").code == kExitSolver);
}

TEST_CASE("branch from lambda_eps closes at the origin") {
  Json c = loop_config({0.1});
  c["branch"] = {{"epsilon", 0.1}, {"origin", "from_lambda_eps"}};
  Run r = run("branch", c, "branch");
  REQUIRE(r.code == kExitOk);
  Json j = read_json(r.out / "branch.json");
  CHECK(j["diagnostics"]["termination"] == "closed");
  CHECK(j["diagnostics"]["closed_loop_gap"].get<double>() <= 0.6);
}

TEST_CASE("eigs reports the Neumann spectrum and lambda_eps") {
  Json c = loop_config({0.1});
  c["eigs"] = {{"eps_list", {0.1}}, {"count", 3}};
  Run r = run("eigs", c, "eigs");
  REQUIRE(r.code == kExitOk);
  Json j = read_json(r.out / "eigs.json");
  CHECK(std::abs(j["neumann_eigenvalues"][0].get<double>()) < 1e-10);
  CHECK(std::abs(j["neumann_eigenvalues"][1].get<double>() - M_PI * M_PI) < 1e-3 * M_PI * M_PI);
  CHECK(j["lambda_eps"][0]["relative_difference"].get<double>() <= 1e-8);
}
