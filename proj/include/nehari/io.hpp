/**
 * @file io.hpp
 * Branch CSV and JSON sidecar serialization and nodal field CSVs.
 *
 * Branch CSV columns are fixed: s, lambda, sup_norm, l2_norm, gamma1, class,
 * event. Reals are printed with %.17g so a read-back is bit exact; an absent
 * gamma1 and an untagged event are empty fields.
 */
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nehari/continuation.hpp"

namespace nehari {

using Json = nlohmann::ordered_json;

/// Shortest-safe round-trip text for a double (%.17g; nan, inf, -inf spelled out).
std::string format_real(double v);
/// Inverse of format_real. Throws InvalidArgument on malformed text.
double parse_real(const std::string& s);

inline constexpr const char* kBranchCsvHeader = "s,lambda,sup_norm,l2_norm,gamma1,class,event";

struct BranchRow {
  double s = 0.0;
  double lambda = 0.0;
  double sup_norm = 0.0;
  double l2_norm = 0.0;
  std::optional<double> gamma1;
  std::string nehari_class;
  std::string event;
};

BranchRow branch_row(const BranchPoint& p);
void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows);
std::string branch_csv(const Branch& b);
/// Parses a branch CSV; InvalidArgument names the first schema violation.
std::vector<BranchRow> read_branch_csv(std::istream& is);

/// Nodal field CSV with columns x[,y],u.
std::string field_csv(const Grid& g, const ScalarField& u);

/// JSON number, or null for non-finite values.
Json json_real(double v);
Json json_real(const std::optional<double>& v);

Json grid_json(const Grid& g);
Json settings_json(const ContinuationSettings& s);
/// Sidecar: ε, origin, settings, grid metadata and branch diagnostics.
Json branch_sidecar(const Branch& b, const ContinuationSettings& s, const Grid& g,
                    const std::string& csv_file);

}  // namespace nehari
