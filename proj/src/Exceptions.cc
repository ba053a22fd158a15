/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Exceptions.h"

namespace varlab {

ExitCode exitCodeFor(const std::exception & err) {
  if (dynamic_cast<const ConfigError *>(&err) || dynamic_cast<const IoError *>(&err)) {
    return ExitCode::ConfigOrIo;
  }
  if (dynamic_cast<const NumericError *>(&err)) return ExitCode::NumericFailure;
  // Domain violations reaching the top level come from bad inputs.
  if (dynamic_cast<const DomainError *>(&err)) return ExitCode::ConfigOrIo;
  return ExitCode::NumericFailure;
}

}  // namespace varlab
