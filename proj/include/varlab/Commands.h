/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "varlab/Config.h"
#include "varlab/Exceptions.h"

namespace varlab {

/// Property groups checked by `verify`.
inline const std::vector<std::string> kVerifySuites = {"affine", "shift", "neighborhood",
                                                       "errors", "covariance"};

// -----------------------------------------------------------------------------
/// Subcommands.  Each writes its CSV files and meta.json into cfg.outputDir,
/// prints a short summary to `out`, and returns the exit code.  Exceptions
/// propagate; runCommand maps them onto exit codes.

ExitCode cmdTruth(const RunConfig & cfg, std::ostream & out);
ExitCode cmdObserve(const RunConfig & cfg, std::ostream & out);
ExitCode cmdAssimilate(const RunConfig & cfg, std::ostream & out);
ExitCode cmdEnsemble(const RunConfig & cfg, std::ostream & out);
ExitCode cmdVerify(const RunConfig & cfg, const std::string & suite, std::ostream & out);
ExitCode cmdReport(const RunConfig & cfg, std::ostream & out);

/// Dispatches by name, catching errors: diagnostics go to `err`.
ExitCode runCommand(const std::string & name, const RunConfig & cfg, const std::string & suite,
                    std::ostream & out, std::ostream & err);

}  // namespace varlab
