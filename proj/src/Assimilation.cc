/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Assimilation.h"

#include <cmath>
#include <string>
#include <utility>

#include "varlab/Exceptions.h"

namespace varlab {

namespace {

bool sameOperator(const ObsOperator & a, const ObsOperator & b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const auto & A = a.matrix();
  const auto & B = b.matrix();
  if (A.nonZeros() != B.nonZeros()) return false;
  for (int r = 0; r < A.outerSize(); ++r) {
    ObsOperator::Matrix::InnerIterator ia(A, r);
    ObsOperator::Matrix::InnerIterator ib(B, r);
    for (; ia && ib; ++ia, ++ib) {
      if (ia.col() != ib.col() || ia.value() != ib.value()) return false;
    }
    if (ia || ib) return false;
  }
  return true;
}

bool sameBlocks(const std::vector<ObservationOperatorBlock> & a,
                const std::vector<ObservationOperatorBlock> & b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].offset != b[i].offset || !sameOperator(a[i].H, b[i].H)) return false;
    if (a[i].R.matrix() != b[i].R.matrix()) return false;
  }
  return true;
}

}  // namespace

// -----------------------------------------------------------------------------

std::shared_ptr<const WindowOperators> OperatorCache::get(
    const AssimilationSystem & system, int windowSteps,
    std::vector<ObservationOperatorBlock> blocks) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto & entry : entries_) {
    if (entry->windowSteps() == windowSteps && entry->B().matrix() == system.B.matrix()
        && entry->M().matrix() == system.M.matrix() && sameBlocks(entry->blocks(), blocks)) {
      return entry;
    }
  }
  auto ops = std::make_shared<const WindowOperators>(system.B, system.M, windowSteps,
                                                     std::move(blocks));
  entries_.push_back(ops);
  return ops;
}

std::size_t OperatorCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

// -----------------------------------------------------------------------------

StateVector makeBackground(int k, const AnalysisResult * previous, const StateVector & guess,
                           const TangentLinearModel & M, int windowSteps) {
  if (k < 0) throw DomainError("cycle index must be nonnegative");
  if (windowSteps < 1) throw DomainError("window must span at least one step");
  if (k == 0) return guess.with(guess.values(), 0);
  if (previous == nullptr) {
    throw StateError("cycle " + std::to_string(k) + " needs the analysis of cycle "
                     + std::to_string(k - 1));
  }
  const Eigen::VectorXd xB = propagatorPower(M, windowSteps) * previous->xA.values();
  return previous->xA.with(xB, k * windowSteps);
}

StateVector makeBackground(int k, const AnalysisResult * previous, const StateVector & guess,
                           const TangentLinearModel & M, double windowLength, double dt) {
  const double ratio = windowLength / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw DomainError("window length must be a positive multiple of dt");
  }
  if (std::abs(dt - M.dt()) > 1e-12 * dt) throw DomainError("dt does not match the propagator");
  return makeBackground(k, previous, guess, M, static_cast<int>(steps));
}

WindowProblem buildWindowProblem(int k, const StateVector & background,
                                 const ObservationSet & observations,
                                 const AssimilationSystem & system, int windowSteps,
                                 OperatorCache * cache) {
  const int start = k * windowSteps;
  if (background.step() != start) {
    throw DomainError("background for cycle " + std::to_string(k) + " is at step "
                      + std::to_string(background.step()) + ", expected " + std::to_string(start));
  }
  std::vector<ObservationOperatorBlock> blocks;
  std::vector<Eigen::VectorXd> ys;
  for (const auto & rec : observations) {
    if (rec.step < start || rec.step > start + windowSteps) {
      throw DomainError("observation at step " + std::to_string(rec.step)
                        + " does not belong to window " + std::to_string(k));
    }
    if (rec.H.rows() == 0) continue;
    blocks.push_back({rec.step - start, rec.H,
                      Covariance::diagonalObservation(rec.H.rows(), system.sigmaR)});
    ys.push_back(rec.y);
  }
  auto ops = cache ? cache->get(system, windowSteps, std::move(blocks))
                   : std::make_shared<const WindowOperators>(system.B, system.M, windowSteps,
                                                             std::move(blocks));
  return WindowProblem(std::move(ops), background, std::move(ys));
}

AnalysisResult solveWindow(const WindowProblem & problem) {
  if (problem.size() <= kClosedFormLimit) return solveClosedForm(problem);
  const double tol = 1e-10 * (1.0 + problem.normalRhs().norm());
  return solveIterative(problem, tol, 10 * problem.size());
}

AnalysisSeries runReanalysis(const CycleConfig & cfg, const AssimilationSystem & system,
                             const std::vector<ObservationSet> & windows, OperatorCache * cache) {
  if (cfg.nCycles < 1) throw DomainError("need at least one cycle");
  if (cfg.windowSteps < 1) throw DomainError("window must span at least one step");
  if (static_cast<int>(windows.size()) < cfg.nCycles) {
    throw DomainError("observations supplied for " + std::to_string(windows.size())
                      + " windows, need " + std::to_string(cfg.nCycles));
  }
  AnalysisSeries series;
  series.analyses.reserve(cfg.nCycles);
  series.backgrounds.reserve(cfg.nCycles);
  for (int k = 0; k < cfg.nCycles; ++k) {
    const AnalysisResult * previous = k > 0 ? &series.analyses.back() : nullptr;
    StateVector background = makeBackground(k, previous, cfg.initialGuess, system.M,
                                            cfg.windowSteps);
    const WindowProblem problem = buildWindowProblem(k, background, windows[k], system,
                                                     cfg.windowSteps, cache);
    try {
      series.analyses.push_back(solveWindow(problem));
    } catch (const NumericError & err) {
      throw NumericError("cycle " + std::to_string(k) + ": " + err.what());
    }
    series.backgrounds.push_back(std::move(background));
  }
  return series;
}

}  // namespace varlab
