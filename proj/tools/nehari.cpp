/**
 * @file nehari.cpp
 * Command-line driver: nehari solve|branch|loop|eigs|verify --config <path>
 * --out <dir> [--seed <u64>].
 */
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "nehari/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nehari-manifold solutions and regularized bifurcation branches"};
  app.require_subcommand(1, 1);
  std::string config, out;
  std::uint64_t seed = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Nehari minimizers and Newton solves at one lambda"},
      {"branch", "trace one regularized branch"},
      {"loop", "epsilon homotopy of the branch from (0,0)"},
      {"eigs", "weighted principal eigenvalues and lambda_eps"},
      {"verify", "operator, identity, bound and scaling gates"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "run configuration (JSON)")->required();
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", seed, "override the config seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : nehari::kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  std::optional<std::uint64_t> seed_override;
  if (sub->count("--seed")) seed_override = seed;
  return nehari::run_command(sub->get_name(), config, out, seed_override, std::cerr);
}
