#include <cmath>
#include <limits>
#include <sstream>

#include "common.hpp"
#include "doctest.h"
#include "nehari/errors.hpp"
#include "nehari/io.hpp"
#include "nehari/random_fields.hpp"

using namespace nehari;

TEST_CASE("real formatting round-trips bit exactly") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    double x = uniform(rng, -1.0, 1.0) * std::pow(10.0, uniform(rng, -300.0, 300.0));
    CHECK(parse_real(format_real(x)) == x);
  }
  for (double x : {0.0, -0.0, 1.0 / 3.0, std::numeric_limits<double>::denorm_min(),
                   std::numeric_limits<double>::max()})
    CHECK(parse_real(format_real(x)) == x);
  CHECK(std::isnan(parse_real(format_real(std::nan("")))));
  CHECK(parse_real(format_real(HUGE_VAL)) == HUGE_VAL);
  CHECK_THROWS_AS(parse_real("1.0x"), Error);
  CHECK_THROWS_AS(parse_real(""), Error);
}

TEST_CASE("branch CSV header and round trip") {
  Branch b;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    BranchPoint p;
    p.arclength = 0.01 * i + uniform(rng, 0.0, 1e-3);
    p.lambda = uniform(rng, -3.0, 3.0);
    p.sup_norm = uniform(rng, 0.0, 2.0);
    p.l2_norm = p.sup_norm * uniform(rng, 0.5, 1.0);
    if (i % 7 != 3) p.gamma1 = uniform(rng, -1.0, 1.0);
    p.nehari_class = i % 2 ? NehariClass::Nplus : NehariClass::Nminus;
    p.event = i == 0 ? BranchEvent::Start : i == 20 ? BranchEvent::Fold : BranchEvent::None;
    b.points.push_back(p);
  }
  std::string csv = branch_csv(b);
  CHECK(csv.substr(0, csv.find('\n')) == "s,lambda,sup_norm,l2_norm,gamma1,class,event");
  std::istringstream is(csv);
  auto rows = read_branch_csv(is);
  REQUIRE(rows.size() == b.points.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& p = b.points[i];
    CHECK(rows[i].s == p.arclength);
    CHECK(rows[i].lambda == p.lambda);
    CHECK(rows[i].sup_norm == p.sup_norm);
    CHECK(rows[i].l2_norm == p.l2_norm);
    CHECK(rows[i].gamma1 == p.gamma1);
    CHECK(rows[i].nehari_class == nehari_class_name(p.nehari_class));
    CHECK(rows[i].event == branch_event_name(p.event));
  }
  std::ostringstream again;
  write_branch_csv(again, rows);
  CHECK(again.str() == csv);
}

TEST_CASE("branch CSV schema violations are named") {
  auto parse = [](const std::string& s) {
    std::istringstream is(s);
    return read_branch_csv(is);
  };
  CHECK_THROWS_WITH_AS(parse(""), doctest::Contains("empty"), Error);
  CHECK_THROWS_WITH_AS(parse("lambda,s\n"), doctest::Contains("header"), Error);
  CHECK_THROWS_WITH_AS(parse(std::string(kBranchCsvHeader) + "\n"), doctest::Contains("no rows"),
                       Error);
  CHECK_THROWS_WITH_AS(parse(std::string(kBranchCsvHeader) + "\n1,2,3\n"),
                       doctest::Contains("7 fields"), Error);
  CHECK_THROWS_WITH_AS(parse(std::string(kBranchCsvHeader) + "\n0,1,1,1,,Nplus,bogus\n"),
                       doctest::Contains("event"), Error);
  CHECK_THROWS_WITH_AS(parse(std::string(kBranchCsvHeader) + "\n0,x,1,1,,Nplus,\n"),
                       doctest::Contains("line 2"), Error);
}

TEST_CASE("field CSV columns") {
  Grid g = test::unit_grid(5);
  std::string s = field_csv(g, Vec::LinSpaced(5, 0.0, 1.0));
  CHECK(s.rfind("x,u\n0,0\n0.25,0.25\n", 0) == 0);
  Grid g2 = build_grid(2, 3, {{0.0, 1.0}, {0.0, 2.0}});
  std::string s2 = field_csv(g2, Vec::Zero(9));
  CHECK(s2.rfind("x,y,u\n0,0,0\n0.5,0,0\n", 0) == 0);
}

TEST_CASE("sidecar carries epsilon, settings, grid and diagnostics") {
  Branch b;
  b.epsilon = 0.1;
  b.termination = "closed";
  b.closed_loop_gap = 1e-4;
  BranchPoint p;
  p.event = BranchEvent::Fold;
  b.points.assign(3, p);
  ContinuationSettings st;
  Json j = branch_sidecar(b, st, test::unit_grid(11), "b.csv");
  CHECK(j["epsilon"] == 0.1);
  CHECK(j["origin"] == "from_zero");
  CHECK(j["settings"]["lambda_max"].is_null());
  CHECK(j["grid"]["n"] == 11);
  CHECK(j["diagnostics"]["events"]["fold"] == 3);
  CHECK(j["diagnostics"]["lambda_eps"].is_null());
}
