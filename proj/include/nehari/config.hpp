/**
 * @file config.hpp
 * Run configuration: a single JSON file with grid, coefficient, exponent and
 * per-command blocks, plus the hypothesis audit of the sampled coefficients.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nehari/checks.hpp"
#include "nehari/continuation.hpp"
#include "nehari/io.hpp"
#include "nehari/solve.hpp"

namespace nehari {

/// Validation failure; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveBlock {
  double lambda = 0.0;
  double epsilon = 0.0;
  int nehari_starts = 4;
  std::vector<CoeffSpec> newton_starts;
  int random_newton_starts = 0;
  double tol = 1e-10;
  int max_iter = 100;
};

struct BranchBlock {
  double epsilon = 0.1;
  BranchOrigin origin = BranchOrigin::FromZero;
  ContinuationSettings settings;
};

struct LoopBlock {
  std::vector<double> eps_list;
  ContinuationSettings settings;
  double crossing_floor = 0.5;  ///< δ in the λ = 0 crossing-norm verdict
};

struct EigsBlock {
  std::vector<double> eps_list;
  int count = 5;  ///< Neumann eigenvalues reported
};

struct SweepBlock {
  std::vector<double> lambdas;
  NehariSign sign = NehariSign::Plus;
  ScalingLaw law = ScalingLaw::ConvexPmq;
  double tolerance = 0.05;          ///< relative exponent tolerance
  double profile_tolerance = 0.02;  ///< sup-distance bound to c* (pmq law)
};

struct FloorBlock {
  Subinterval d;
  double lambda = 0.0;  ///< λ̄ > 0 fed to the floor and the B⁺ solve
};

struct VerifyBlock {
  double lambda = 0.1;
  int nehari_starts = 4;
  std::optional<double> epsilon0;
  int nonexistence_starts = 50;
  std::optional<double> delta;
  std::optional<FloorBlock> floor;
  std::optional<SweepBlock> sweep;
  bool corrupt_laplacian = false;  ///< test hook: perturbs one stiffness entry
};

struct RunConfig {
  Grid grid;
  CoeffSpec a, b;
  double p = 4.0;
  double q = 1.5;
  std::uint64_t seed = 1;
  std::optional<SolveBlock> solve;
  std::optional<BranchBlock> branch;
  std::optional<LoopBlock> loop;
  std::optional<EigsBlock> eigs;
  std::optional<VerifyBlock> verify;

  ProblemParams params(double lambda = 0.0, double epsilon = 0.0) const;
};

/// Throws ConfigError naming the offending key or violated bound.
RunConfig parse_config(const Json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Sign and integral facts about the sampled (a, b). Interval-run flags are 1D only.
struct HypothesisAudit {
  double int_a = 0.0, int_b = 0.0;
  int a_plus = 0, a_minus = 0, b_plus = 0, b_minus = 0;  ///< node counts
  bool existence_condition = false;  ///< ∫a < 0 or ∫b < 0
  bool loop_condition = false;       ///< Ω^a_+, Ω^b_+ ≠ ∅, ∫b ≤ 0, ∫a < 0
  std::optional<bool> h0_b1;  ///< a run with a ≥ 0, a ≢ 0, b > 0 inside Ω
  std::optional<bool> h0_b2;  ///< a run with a ≥ 0, a ≢ 0, b < 0 inside Ω
  std::optional<bool> h1;     ///< Ω^a_+ one interior run, a < 0 off its closure
  std::optional<bool> h3;     ///< Ω^b_+ and Ω^b_- each one run
  std::vector<std::string> flags;  ///< human-readable violations
};

HypothesisAudit audit_hypotheses(const ProblemParams& params);
Json audit_json(const HypothesisAudit& a);

}  // namespace nehari
