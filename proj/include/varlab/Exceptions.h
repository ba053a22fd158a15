/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace varlab {

// -----------------------------------------------------------------------------
/// Index, dimension or time-alignment precondition violated.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Factorization or linear solve failed.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state became non-finite while being evolved.
class OverflowError : public NumericError {
 public:
  OverflowError(const std::string & what, int step)
    : NumericError(what), step_(step) {}
  int step() const {return step_;}
 private:
  int step_;
};

/// Iterative solver ran out of iterations.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string & what, double gradNorm, int iterations)
    : NumericError(what), gradNorm_(gradNorm), iterations_(iterations) {}
  double gradientNorm() const {return gradNorm_;}
  int iterations() const {return iterations_;}
 private:
  double gradNorm_;
  int iterations_;
};

/// A cycle was asked for before its predecessor exists.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Process exit codes shared by the command-line driver.
enum class ExitCode : int {
  Pass = 0,
  PropertyFailure = 1,
  ConfigOrIo = 2,
  NumericFailure = 3,
};

/// Maps an in-flight exception to the exit code contract.
ExitCode exitCodeFor(const std::exception & err);

// -----------------------------------------------------------------------------

}  // namespace varlab
