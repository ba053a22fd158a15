/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Scenario.h"

#include <set>
#include <string>
#include <utility>

#include "varlab/Exceptions.h"

namespace varlab {

namespace {

GridGeometry makeGrid(const GridConfig & g) {
  if (g.dim == 1) {
    return GridGeometry::line(g.nCells[0], g.spacing, g.origin.empty() ? 0.0 : g.origin[0]);
  }
  Coordinate origin = Coordinate::Zero();
  if (!g.origin.empty()) origin = Coordinate(g.origin[0], g.origin[1]);
  return GridGeometry::plane(g.nCells[0], g.nCells[1], g.spacing, origin);
}

NonlinearModel makeModel(const RunConfig & cfg, const GridGeometry & grid, const Layout & layout) {
  const DynamicsConfig & d = cfg.dynamics;
  const ModelKind kind = modelKindFromString(d.kind);
  if (d.matrix) {
    const int n = layout.size();
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = (*d.matrix)[i][j];
    }
    return NonlinearModel::fromMatrix(std::move(A), d.dt, kind, d.quadraticGain, d.diffusion);
  }
  NonlinearModel::StencilParams params;
  params.advection = d.advection;
  params.diffusion = d.diffusion;
  params.decay = d.decay;
  return NonlinearModel::advectionDiffusion(grid, layout, params, d.dt, kind, d.quadraticGain);
}

int compositionIndex(const CompositionSet & comps, const std::string & name) {
  try {
    return comps.index(name);
  } catch (const std::exception &) {
    throw ConfigError("unknown composition '" + name + "'");
  }
}

}  // namespace

// -----------------------------------------------------------------------------

Scenario::Scenario(const RunConfig & config)
  : config_(config),
    grid_(makeGrid(config.grid)),
    compositions_(config.grid.compositions),
    layout_(grid_.size(), compositions_.size()),
    model_(makeModel(config, grid_, layout_)),
    system_{Covariance::exponentialBackground(grid_, layout_, config.covariances.sigmaB,
                                              config.covariances.lengthB.value_or(
                                                2.0 * config.grid.spacing)),
            tangentLinearAtZero(model_), config.covariances.sigmaR},
    seeds_(config.masterSeed),
    noise_{config.world.sigmaR.value_or(config.covariances.sigmaR)}
{
  config_.validate();

  NonlinearModel truthModel = model_;
  if (config_.world.truthDynamics == "tangent_linear") {
    truthModel = NonlinearModel::fromMatrix(system_.M.matrix(), model_.dt());
  }
  world_ = std::make_unique<HiddenProcess>(grid_, layout_, std::move(truthModel),
                                           config_.world.sigmaW,
                                           config_.world.lengthS.value_or(
                                             2.0 * config_.grid.spacing));

  // Observation schedule.
  const ObservationsConfig & oc = config_.observations;
  PlacementSpec spec;
  if (oc.placement == "centroid") {
    spec.kind = PlacementKind::Centroid;
  } else if (oc.placement == "uniform_random") {
    spec.kind = PlacementKind::UniformRandom;
  } else {
    spec.kind = PlacementKind::Fixed;
  }
  spec.count = oc.count;
  for (const auto & name : oc.compositions) {
    spec.compositions.push_back(compositionIndex(compositions_, name));
  }
  for (const auto & s : oc.sites) {
    ObservationSite site;
    site.location[0] = s.location[0];
    if (grid_.dim() == 2) site.location[1] = s.location[1];
    site.composition = s.composition.empty() ? 0 : compositionIndex(compositions_, s.composition);
    spec.fixedSites.push_back(site);
  }

  std::vector<int> offsets = oc.offsets;
  if (offsets.empty()) {
    for (int j = 0; j <= windowSteps(); ++j) offsets.push_back(j);
  }
  std::set<int> steps;
  for (int k = 0; k < nCycles(); ++k) {
    for (int off : offsets) steps.insert(k * windowSteps() + off);
  }

  std::optional<ScheduledOperator> shared;
  if (spec.kind != PlacementKind::UniformRandom) {
    try {
      auto sites = placeSites(grid_, layout_, spec, nullptr);
      shared = ScheduledOperator{0, buildH(grid_, layout_, sites), sites};
    } catch (const DomainError & e) {
      throw ConfigError(std::string("observations: ") + e.what());
    }
  }
  for (int step : steps) {
    if (shared) {
      schedule_.push_back({step, shared->H, shared->sites});
    } else {
      RandomStream rng = seeds_.stream(0, static_cast<std::uint32_t>(step),
                                       StreamPurpose::ObservationPlacement);
      auto sites = placeSites(grid_, layout_, spec, &rng);
      schedule_.push_back({step, buildH(grid_, layout_, sites), sites});
    }
  }
}

CycleConfig Scenario::cycleConfig(const StateVector & guess) const {
  return CycleConfig{windowSteps(), model_.dt(), nCycles(), guess};
}

Trajectory Scenario::truth(std::uint32_t member) const {
  const std::uint32_t m = config_.world.varyTruth ? member : 0;
  const StateVector x0 = initialTruth(*world_, config_.world.initialLevel,
                                      config_.world.initialAmplitude, seeds_, m);
  return simulateTruth(*world_, x0, totalSteps(), seeds_, m);
}

std::vector<ObservationSet> Scenario::observations(std::uint32_t member,
                                                   const Trajectory & truth) const {
  std::vector<ObservationSet> out;
  out.reserve(nCycles());
  for (int k = 0; k < nCycles(); ++k) {
    out.push_back(sampleObservations(truth, schedule_, noise_, seeds_, member, k, windowSteps()));
  }
  return out;
}

StateVector Scenario::guess(std::uint32_t member, const Trajectory & truth) const {
  const GuessConfig & g = config_.cycle.guess;
  if (g.kind == "zeros") return StateVector::zeros(layout_, 0);
  if (g.kind == "truth") return truth.front();
  if (g.kind == "values") {
    if (static_cast<int>(g.values.size()) != layout_.size()) {
      throw ConfigError("cycle.initial_guess must list " + std::to_string(layout_.size())
                        + " values");
    }
    return StateVector(layout_, Eigen::Map<const Eigen::VectorXd>(g.values.data(),
                                                                  layout_.size()), 0);
  }
  Eigen::VectorXd v = truth.front().values();
  if (g.sigma > 0.0) {
    RandomStream rng = seeds_.stream(member, 0, StreamPurpose::Guess);
    v += g.sigma * rng.normals(layout_.size());
  }
  return StateVector(layout_, std::move(v), 0);
}

MemberRun Scenario::runMember(std::uint32_t member, OperatorCache * cache) const {
  Trajectory x = truth(member);
  std::vector<ObservationSet> windows = observations(member, x);
  StateVector g = guess(member, x);
  AnalysisSeries series = runReanalysis(cycleConfig(g), system_, windows, cache);
  return MemberRun{std::move(x), std::move(windows), std::move(g), std::move(series)};
}

}  // namespace varlab
