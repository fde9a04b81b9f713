#include "nehari/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "nehari/errors.hpp"

namespace nehari {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorCode::InvalidArgument, "not a real number: '" + s + "'");
  return v;
}

BranchRow branch_row(const BranchPoint& p) {
  return {p.arclength, p.lambda, p.sup_norm, p.l2_norm, p.gamma1, nehari_class_name(p.nehari_class),
          branch_event_name(p.event)};
}

void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows) {
  os << kBranchCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_real(r.s) << ',' << format_real(r.lambda) << ',' << format_real(r.sup_norm) << ','
       << format_real(r.l2_norm) << ',' << (r.gamma1 ? format_real(*r.gamma1) : "") << ','
       << r.nehari_class << ',' << r.event << '\n';
  }
}

std::string branch_csv(const Branch& b) {
  std::vector<BranchRow> rows;
  rows.reserve(b.points.size());
  for (const auto& p : b.points) rows.push_back(branch_row(p));
  std::ostringstream os;
  write_branch_csv(os, rows);
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool known_class(const std::string& c) {
  return c == "Nplus" || c == "Nminus" || c == "Nzero" || c == "NotOnNehari";
}

bool known_event(const std::string& e) {
  return e.empty() || e == "start" || e == "end" || e == "fold" || e == "lambda_zero_crossing";
}

}  // namespace

std::vector<BranchRow> read_branch_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::InvalidArgument, "branch CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kBranchCsvHeader)
    throw Error(ErrorCode::InvalidArgument,
                "branch CSV header must be '" + std::string(kBranchCsvHeader) + "'");
  std::vector<BranchRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line);
    const std::string where = "branch CSV line " + std::to_string(lineno);
    if (f.size() != 7) throw Error(ErrorCode::InvalidArgument, where + ": expected 7 fields");
    BranchRow r;
    try {
      r.s = parse_real(f[0]);
      r.lambda = parse_real(f[1]);
      r.sup_norm = parse_real(f[2]);
      r.l2_norm = parse_real(f[3]);
      if (!f[4].empty()) r.gamma1 = parse_real(f[4]);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidArgument, where + ": " + e.what());
    }
    if (!known_class(f[5])) throw Error(ErrorCode::InvalidArgument, where + ": unknown class");
    if (!known_event(f[6])) throw Error(ErrorCode::InvalidArgument, where + ": unknown event");
    r.nehari_class = f[5];
    r.event = f[6];
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "branch CSV has no rows");
  return rows;
}

std::string field_csv(const Grid& g, const ScalarField& u) {
  std::ostringstream os;
  os << (g.dim == 1 ? "x,u\n" : "x,y,u\n");
  for (int i = 0; i < g.size(); ++i) {
    os << format_real(g.coord(i, 0)) << ',';
    if (g.dim == 2) os << format_real(g.coord(i, 1)) << ',';
    os << format_real(u[i]) << '\n';
  }
  return os.str();
}

Json json_real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json json_real(const std::optional<double>& v) { return v ? json_real(*v) : Json(nullptr); }

Json grid_json(const Grid& g) {
  Json ends = Json::array();
  for (int a = 0; a < g.dim; ++a) ends.push_back({g.lo[a], g.hi[a]});
  return {{"dim", g.dim}, {"n", g.n}, {"endpoints", ends}, {"nodes", g.size()}};
}

Json settings_json(const ContinuationSettings& s) {
  return {{"ds_init", s.ds_init},          {"ds_min", s.ds_min},
          {"ds_max", s.ds_max},            {"newton_tol", s.newton_tol},
          {"max_steps", s.max_steps},      {"direction", s.direction},
          {"newton_max_iter", s.newton_max_iter}, {"lambda_max", json_real(s.lambda_max)},
          {"sup_max", json_real(s.sup_max)}, {"compute_gamma1", s.compute_gamma1}};
}

Json branch_sidecar(const Branch& b, const ContinuationSettings& s, const Grid& g,
                    const std::string& csv_file) {
  Json events = Json::object();
  for (auto e : {BranchEvent::Fold, BranchEvent::LambdaZeroCrossing})
    events[branch_event_name(e)] = b.count(e);
  return {{"csv", csv_file},
          {"epsilon", b.epsilon},
          {"origin", branch_origin_name(b.origin)},
          {"settings", settings_json(s)},
          {"grid", grid_json(g)},
          {"diagnostics",
           {{"points", b.points.size()},
            {"steps", b.steps},
            {"termination", b.termination},
            {"lambda_eps", json_real(b.lambda_eps)},
            {"closed_loop_gap", json_real(b.closed_loop_gap)},
            {"closure_lambda", json_real(b.closure_lambda)},
            {"events", events}}}};
}

}  // namespace nehari
