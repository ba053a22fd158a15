/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "varlab/Assimilation.h"
#include "varlab/Cost.h"
#include "varlab/Scenario.h"
#include "varlab/Statistics.h"

namespace varlab {

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 -> hardware).
/// The first exception thrown by any call is rethrown after all workers stop.
void parallelFor(int n, int threads, const std::function<void(int)> & body);

// -----------------------------------------------------------------------------
/// Member-aggregated moments of the analyses, one entry per cycle.
struct EnsembleResult {
  int members = 0;
  std::vector<Eigen::VectorXd> mean;
  std::vector<Eigen::MatrixXd> covariance;

  Eigen::VectorXd variance(int k) const {return covariance.at(k).diagonal();}
  Eigen::MatrixXd correlation(int k) const {return correlationFromCovariance(covariance.at(k));}
};

/// Members differ only in their seeds.  Results are reduced in member order, so
/// the outcome does not depend on the number of threads.  `runs`, if given,
/// receives every member's run.
EnsembleResult ensembleAnalysis(const Scenario & scenario, int members, int threads = 0,
                                std::vector<MemberRun> * runs = nullptr);

// -----------------------------------------------------------------------------

/// Sum_i K_i R_i K_i^T for the true observation error covariances R_i.
Eigen::MatrixXd analyticAnalysisCovariance(const GainOperators & gains,
                                           const std::vector<Eigen::MatrixXd> & Rtrue);
/// R_true = sigma^2 I at every observation time of the window.
Eigen::MatrixXd analyticAnalysisCovariance(const WindowProblem & p, double sigmaRTrue);

/// Sample covariance of x^A over `members` noise draws around p's observations.
SampleMoments monteCarloAnalysisMoments(const WindowProblem & p, double sigmaRTrue, int members,
                                        const SeedPlan & seeds, int threads = 0);

// -----------------------------------------------------------------------------

struct AffineReport {
  bool pass = false;
  double offsetResidual = 0.0;         ///< |x^A(0) - L x^B|
  double gainResidual = 0.0;           ///< |probed K - K|
  double superpositionResidual = 0.0;
  double scalingResidual = 0.0;
  int probes = 0;

  double worst() const;
};

/// Probes y -> x^A(y) with the zero vector, unit vectors, `trials` random
/// superpositions and a scaling by 3.  Residuals are in the max norm, relative
/// to max(1, size of the compared terms).
AffineReport verifyAffine(const WindowProblem & p, int trials, const SeedPlan & seeds,
                          double tol = 1e-10);

// -----------------------------------------------------------------------------
/// The stored sample elements of one run, one observation set per window.
class OmegaSequence {
 public:
  explicit OmegaSequence(std::vector<ObservationSet> windows) : windows_(std::move(windows)) {}

  int size() const {return static_cast<int>(windows_.size());}
  const ObservationSet & operator[](int k) const {return windows_.at(k);}
  /// Left shift by `k` windows.
  OmegaSequence shifted(int k) const;
  /// Global window index of the head element.
  int head() const {return head_;}

 private:
  std::vector<ObservationSet> windows_;
  int head_ = 0;
};

struct ShiftCheck {
  int k;
  bool pass;
  double maxAbsDifference;
};

/// Replays every cycle from the stored omega sequence: cycle k is the window
/// map applied to the head of T^k omega, with the background chained from the
/// replayed cycle k - 1.  Each replayed analysis must equal the stored one bit
/// for bit.
std::vector<ShiftCheck> shiftMapDemo(const AnalysisSeries & series, const OmegaSequence & omega,
                                     const CycleConfig & cfg, const AssimilationSystem & system);

struct NeighborCheck {
  int location;
  int neighbor;
  bool pass;
};

/// Per-location sample elements omega_s = (s, window data).  1-D grids use the
/// ordered left shift, j = 0..N-2; 2-D grids use the directional shift along
/// every ordered first-order neighbour pair.
std::vector<NeighborCheck> neighborhoodShiftDemo(const GridGeometry & grid,
                                                 const WindowProblem & window,
                                                 const AnalysisResult & analysis);

// -----------------------------------------------------------------------------

enum class ErrorComponent {InputError, ModelDiscrepancy, ObservationError};
std::string toString(ErrorComponent c);

/// Error components of one member at one cycle.
struct ErrorSample {
  Eigen::VectorXd inputError;
  Eigen::VectorXd discrepancy;
  Eigen::VectorXd observationError;
};

/// inputError = x^B_k - truth; discrepancy = sum_{j < W} [m_true(x_j) - M x_j]
/// along x_0 = x^B_k, x_{j+1} = M x_j; observationError = y - H truth stacked.
ErrorSample dissectCycle(const Scenario & scenario, const MemberRun & run, int k);

struct PairCorrelation {
  int k;
  ErrorComponent a;
  ErrorComponent b;
  CorrelationEstimate estimate;
  /// Expected: k = 0 all pairs, and both observation-error pairs, |rho| <= threshold;
  /// input error vs discrepancy for k >= 1, |rho| > threshold.
  bool expectDependent;
  bool pass;
};

struct LedgerRow {
  int k;
  ErrorComponent component;
  double norm;  ///< ensemble mean of the per-member 2-norm
};

struct ErrorDissection {
  int members = 0;
  double threshold = 0.0;
  std::vector<LedgerRow> ledger;
  std::vector<PairCorrelation> correlations;
  int reportCycle = 0;
  /// Correlation of the analysis error at reportCycle, full n x n; the grid-wise
  /// and composition-wise blocks are read off with the layout.
  Eigen::MatrixXd analysisErrorCorrelation;

  bool pass() const;
};

/// Requires at least 200 members.
ErrorDissection errorDissection(const Scenario & scenario, int members, int threads = 0);

}  // namespace varlab
