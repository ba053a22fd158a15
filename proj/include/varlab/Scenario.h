/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "varlab/Assimilation.h"
#include "varlab/Config.h"
#include "varlab/Cost.h"
#include "varlab/Dynamics.h"
#include "varlab/GridState.h"
#include "varlab/ObsOperator.h"
#include "varlab/Random.h"
#include "varlab/SyntheticWorld.h"

namespace varlab {

/// Everything one ensemble member produces.
struct MemberRun {
  Trajectory truth;
  std::vector<ObservationSet> windows;   ///< the realized omega, one per cycle
  StateVector guess;
  AnalysisSeries series;
};

// -----------------------------------------------------------------------------
/// A twin experiment assembled from a RunConfig: grid, hidden world, DA system
/// and the observation schedule.  Immutable once built, shareable across threads.
class Scenario {
 public:
  explicit Scenario(const RunConfig & config);

  const RunConfig & config() const {return config_;}
  const GridGeometry & grid() const {return grid_;}
  const CompositionSet & compositions() const {return compositions_;}
  const Layout & layout() const {return layout_;}
  const NonlinearModel & dynamics() const {return model_;}
  const HiddenProcess & world() const {return *world_;}
  const AssimilationSystem & system() const {return system_;}
  const ObservationSchedule & schedule() const {return schedule_;}
  const SeedPlan & seeds() const {return seeds_;}
  NoiseSpec noise() const {return noise_;}
  int windowSteps() const {return config_.cycle.windowSteps;}
  int nCycles() const {return config_.cycle.nCycles;}
  int totalSteps() const {return windowSteps() * nCycles();}
  CycleConfig cycleConfig(const StateVector & guess) const;

  /// Truth of a member; identical across members unless world.vary_truth.
  Trajectory truth(std::uint32_t member) const;
  std::vector<ObservationSet> observations(std::uint32_t member, const Trajectory & truth) const;
  StateVector guess(std::uint32_t member, const Trajectory & truth) const;

  MemberRun runMember(std::uint32_t member, OperatorCache * cache = nullptr) const;

 private:
  RunConfig config_;
  GridGeometry grid_;
  CompositionSet compositions_;
  Layout layout_;
  NonlinearModel model_;
  std::unique_ptr<HiddenProcess> world_;
  AssimilationSystem system_;
  ObservationSchedule schedule_;
  SeedPlan seeds_;
  NoiseSpec noise_;
};

}  // namespace varlab
