// finsler_hj: solve | oracle | report for Finsler p-Laplace obstacle problems.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler_hj/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Maximal subsolutions of Hamilton-Jacobi obstacle problems via a Finsler p-Laplace ladder"};
  std::vector<std::string> commands;
  finsler_hj::RunConfig cfg;
  std::string config;
  std::string out = "out";
  int p_max = 0;
  int grid = 0;
  app.add_option("commands", commands, "one or more of: solve oracle report (run in that order)")
      ->required()
      ->check(CLI::IsMember({"solve", "oracle", "report"}));
  app.add_option("--config", config, "problem description (JSON)")->required();
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--p-max", p_max, "drop ladder exponents above this value")->check(CLI::PositiveNumber);
  app.add_option("--grid", grid, "override nodes per axis (extents kept)")->check(CLI::Range(3, 1 << 14));
  app.add_flag("--plots", cfg.plots, "write PPM previews of u, |Theta|, theta and the oracle");
  app.add_option("--seed", cfg.seed, "seed for sampled checks")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every usage error shares the pipeline's error code.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto& c : commands) {
    cfg.commands.push_back(c == "solve"    ? finsler_hj::Command::Solve
                           : c == "oracle" ? finsler_hj::Command::Oracle
                                           : finsler_hj::Command::Report);
  }
  cfg.config = config;
  cfg.out = out;
  if (p_max > 0) cfg.overrides.p_max = p_max;
  if (grid > 0) cfg.overrides.grid = grid;

  const auto t0 = std::chrono::steady_clock::now();
  const auto outcome = finsler_hj::run_pipeline(cfg, std::cout);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::fprintf(stderr, "elapsed %.2f s\n", secs);
  if (outcome.exit_code == 2) std::cerr << outcome.report.dump() << "\n";
  return outcome.exit_code;
}
