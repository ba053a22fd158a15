/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/SyntheticWorld.h"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

#include "varlab/Exceptions.h"

namespace varlab {

HiddenProcess::HiddenProcess(const GridGeometry & grid, const Layout & layout,
                             NonlinearModel truthModel, double sigmaW, double lengthS)
  : layout_(layout), model_(std::move(truthModel)), sigmaW_(sigmaW), lengthS_(lengthS)
{
  if (layout_.locations() != grid.size()) throw DomainError("layout does not match grid");
  if (model_.size() != layout_.size()) throw DomainError("truth model does not match layout");
  if (!(sigmaW_ >= 0.0)) throw DomainError("innovation sigma must be nonnegative");
  if (!(lengthS_ > 0.0)) throw DomainError("spatial correlation length must be positive");

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(layout_.size(), layout_.size());
  for (int a = 0; a < grid.size(); ++a) {
    for (int b = 0; b < grid.size(); ++b) {
      const double rho = std::exp(-grid.distance(a, b) / lengthS_);
      for (int c = 0; c < layout_.compositions(); ++c) {
        C(layout_.flatIndex(a, c), layout_.flatIndex(b, c)) = rho;
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success) throw NumericError("spatial correlation is not positive definite");
  factor_ = llt.matrixL();
}

Eigen::VectorXd HiddenProcess::correlatedField(RandomStream & rng) const {
  return factor_ * rng.normals(layout_.size());
}

StateVector initialTruth(const HiddenProcess & process, double level, double amplitude,
                         const SeedPlan & seeds, std::uint32_t member) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(process.layout().size(), level);
  if (amplitude != 0.0) {
    RandomStream rng = seeds.stream(member, 0, StreamPurpose::TruthInitial);
    v += amplitude * process.correlatedField(rng);
  }
  return StateVector(process.layout(), std::move(v), 0);
}

Trajectory simulateTruth(const HiddenProcess & process, const StateVector & initial, int steps,
                         const SeedPlan & seeds, std::uint32_t member) {
  if (steps < 1) throw DomainError("truth simulation needs at least one step");
  Trajectory out;
  out.reserve(steps + 1);
  out.push_back(initial);
  for (int j = 0; j < steps; ++j) {
    Eigen::VectorXd next = process.model().step(out.back().values());
    if (process.sigmaW() > 0.0) {
      RandomStream rng = seeds.stream(member, static_cast<std::uint32_t>(j),
                                      StreamPurpose::TruthInnovation);
      next += process.sigmaW() * process.correlatedField(rng);
    }
    if (!next.allFinite()) {
      throw OverflowError("truth became non-finite at step " + std::to_string(j + 1), j + 1);
    }
    out.push_back(out.back().with(std::move(next), out.back().step() + 1));
  }
  return out;
}

ObservationSet sampleObservations(const Trajectory & truth, const ObservationSchedule & schedule,
                                  const NoiseSpec & noise, const SeedPlan & seeds,
                                  std::uint32_t member, int window, int windowSteps) {
  if (window < 0 || windowSteps < 1) throw DomainError("invalid observation window");
  if (!(noise.sigmaR >= 0.0)) throw DomainError("observation noise sigma must be nonnegative");
  const int start = window * windowSteps;
  const int end = start + windowSteps;
  if (truth.empty() || truth.front().step() > start || truth.back().step() < end) {
    throw DomainError("window " + std::to_string(window) + " [" + std::to_string(start) + ", "
                      + std::to_string(end) + "] is not covered by the truth trajectory");
  }
  const int first = truth.front().step();
  ObservationSet out;
  for (const auto & entry : schedule) {
    if (entry.step < start || entry.step > end || entry.H.rows() == 0) continue;
    const StateVector & x = truth[entry.step - first];
    Eigen::VectorXd y = predictObservations(entry.H, x);
    if (noise.sigmaR > 0.0) {
      RandomStream rng = seeds.stream(member, static_cast<std::uint32_t>(entry.step),
                                      StreamPurpose::ObservationNoise);
      y += noise.sigmaR * rng.normals(static_cast<int>(y.size()));
    }
    out.push_back({entry.step, std::move(y), entry.H});
  }
  return out;
}

}  // namespace varlab
