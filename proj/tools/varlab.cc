/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "varlab/Commands.h"
#include "varlab/Config.h"
#include "varlab/Exceptions.h"
#include "varlab/Version.h"

int main(int argc, char ** argv) {
  CLI::App app{"varlab: cycled 4D-Var twin experiments on a desk-scale grid"};
  app.set_version_flag("--version", std::string(varlab::kVersion));
  app.require_subcommand(1, 1);

  std::string configPath;
  std::string outDir;
  std::optional<int> members;
  std::optional<std::uint64_t> seed;
  std::string suite = "all";

  auto common = [&](CLI::App * cmd) {
    cmd->add_option("--config", configPath, "JSON run configuration")->required();
    cmd->add_option("--out", outDir, "output directory (overrides output_dir)");
    cmd->add_option("--members", members, "ensemble size (overrides lab.members)");
    cmd->add_option("--seed", seed, "master seed (overrides master_seed)");
  };
  common(app.add_subcommand("truth", "simulate the hidden truth, write truth.csv"));
  common(app.add_subcommand("observe", "sample observations, write observations.csv"));
  common(app.add_subcommand("assimilate", "cycle the analysis, write analyses.csv"));
  common(app.add_subcommand("ensemble", "run the ensemble, write moments.csv"));
  auto * verify = app.add_subcommand("verify", "check properties, write verify.csv");
  common(verify);
  verify->add_option("--suite", suite, "affine | shift | neighborhood | errors | covariance | all");
  common(app.add_subcommand("report", "write all ensemble reports"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(varlab::ExitCode::ConfigOrIo);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  varlab::RunConfig cfg;
  try {
    cfg = varlab::RunConfig::fromFile(configPath);
    if (!outDir.empty()) cfg.outputDir = outDir;
    if (members) cfg.lab.members = *members;
    if (seed) cfg.masterSeed = *seed;
    cfg.validate();
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(varlab::exitCodeFor(e));
  }
  return static_cast<int>(varlab::runCommand(command, cfg, suite, std::cout, std::cerr));
}
