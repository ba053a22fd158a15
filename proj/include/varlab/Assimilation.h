/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "varlab/Cost.h"
#include "varlab/Dynamics.h"
#include "varlab/GridState.h"
#include "varlab/ObsOperator.h"

namespace varlab {

/// Realized observations at one model step.
struct ObservationRecord {
  int step;
  Eigen::VectorXd y;
  ObsOperator H;
};

/// All observations available to one window [k W, (k + 1) W], endpoints included.
using ObservationSet = std::vector<ObservationRecord>;

struct CycleConfig {
  int windowSteps;   ///< window length in model steps
  double dt;         ///< model step
  int nCycles;
  StateVector initialGuess;

  double windowLength() const {return windowSteps * dt;}
};

/// The fixed parts of the data-assimilation system.
struct AssimilationSystem {
  Covariance B;
  TangentLinearModel M;
  double sigmaR;  ///< R = sigmaR^2 I for every observation time
};

struct AnalysisSeries {
  std::vector<AnalysisResult> analyses;
  std::vector<StateVector> backgrounds;
};

// -----------------------------------------------------------------------------
/// Shares WindowOperators between cycles and ensemble members whose observation
/// geometry is identical.  Safe to use from several threads.
class OperatorCache {
 public:
  std::shared_ptr<const WindowOperators> get(const AssimilationSystem & system, int windowSteps,
                                             std::vector<ObservationOperatorBlock> blocks);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<const WindowOperators>> entries_;
};

// -----------------------------------------------------------------------------

/// k == 0: the configured guess.  k >= 1: M^W x^A_{k-1}.
StateVector makeBackground(int k, const AnalysisResult * previous, const StateVector & guess,
                           const TangentLinearModel & M, int windowSteps);
StateVector makeBackground(int k, const AnalysisResult * previous, const StateVector & guess,
                           const TangentLinearModel & M, double windowLength, double dt);

/// Cost function for cycle k from its background and window observations.
WindowProblem buildWindowProblem(int k, const StateVector & background,
                                 const ObservationSet & observations,
                                 const AssimilationSystem & system, int windowSteps,
                                 OperatorCache * cache = nullptr);

/// Closed form up to this state size, conjugate gradients above it.
inline constexpr int kClosedFormLimit = 512;

AnalysisResult solveWindow(const WindowProblem & problem);

/// Cycles K windows: background chaining, one solve per window.
AnalysisSeries runReanalysis(const CycleConfig & cfg, const AssimilationSystem & system,
                             const std::vector<ObservationSet> & windows,
                             OperatorCache * cache = nullptr);

}  // namespace varlab
