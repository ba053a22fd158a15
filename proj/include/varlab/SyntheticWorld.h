/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "varlab/Assimilation.h"
#include "varlab/Dynamics.h"
#include "varlab/GridState.h"
#include "varlab/ObsOperator.h"
#include "varlab/Random.h"

namespace varlab {

using Trajectory = std::vector<StateVector>;

// -----------------------------------------------------------------------------
/// Hidden truth:  x_{j+1} = m_true(x_j) + w_j  with w_j ~ N(0, sigma_w^2 C),
/// C = exp(-d / length) within each composition and zero across compositions.
class HiddenProcess {
 public:
  HiddenProcess(const GridGeometry & grid, const Layout & layout, NonlinearModel truthModel,
                double sigmaW, double lengthS);

  const NonlinearModel & model() const {return model_;}
  const Layout & layout() const {return layout_;}
  double sigmaW() const {return sigmaW_;}
  double lengthS() const {return lengthS_;}

  /// Unit-variance field with the spatial correlation C.
  Eigen::VectorXd correlatedField(RandomStream & rng) const;

 private:
  Layout layout_;
  NonlinearModel model_;
  double sigmaW_;
  double lengthS_;
  Eigen::MatrixXd factor_;  ///< lower Cholesky factor of C
};

/// level + amplitude * correlatedField, drawn from the member's truth stream.
StateVector initialTruth(const HiddenProcess & process, double level, double amplitude,
                         const SeedPlan & seeds, std::uint32_t member);

/// States at steps 0..steps (steps + 1 entries).  The innovation of step j is
/// drawn from substream (member, j, TruthInnovation).
Trajectory simulateTruth(const HiddenProcess & process, const StateVector & initial, int steps,
                         const SeedPlan & seeds, std::uint32_t member);

// -----------------------------------------------------------------------------

/// True observation error: R_true = sigmaR^2 I (sigmaR may be zero).
struct NoiseSpec {
  double sigmaR = 0.0;
};

struct ScheduledOperator {
  int step;
  ObsOperator H;
  std::vector<ObservationSite> sites;  ///< rows of H, when known
};

/// Observation operators by global model step, ascending.
using ObservationSchedule = std::vector<ScheduledOperator>;

/// y = H truth + eps for every scheduled step of window [k W, (k + 1) W].
/// Noise at a step comes from substream (member, step, ObservationNoise), so an
/// observation on a shared window endpoint is the same in both windows.
ObservationSet sampleObservations(const Trajectory & truth, const ObservationSchedule & schedule,
                                  const NoiseSpec & noise, const SeedPlan & seeds,
                                  std::uint32_t member, int window, int windowSteps);

}  // namespace varlab
