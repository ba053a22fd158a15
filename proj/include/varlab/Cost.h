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
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "varlab/Dynamics.h"
#include "varlab/GridState.h"
#include "varlab/ObsOperator.h"

namespace varlab {

enum class CovarianceRole {Background, Observation};

// -----------------------------------------------------------------------------
/// Symmetric positive-definite error covariance with its Cholesky factor.
///
/// Positivity is checked through the smallest eigenvalue for n <= 64 and
/// through Cholesky success above that.  A background covariance must also be
/// block diagonal across compositions.
class Covariance {
 public:
  static Covariance background(Eigen::MatrixXd matrix, const Layout & layout);
  static Covariance observation(Eigen::MatrixXd matrix);

  /// sigma^2 exp(-d / length) within each composition, zero across compositions.
  static Covariance exponentialBackground(const GridGeometry & grid, const Layout & layout,
                                          double sigma, double length);
  static Covariance diagonalObservation(int size, double sigma);

  CovarianceRole role() const {return role_;}
  const Eigen::MatrixXd & matrix() const {return matrix_;}
  int size() const {return static_cast<int>(matrix_.rows());}

  Eigen::VectorXd solve(const Eigen::VectorXd & v) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd & v) const;
  Eigen::MatrixXd inverse() const;
  /// v^T C^{-1} v, computed as a squared norm so it is never negative.
  double inverseQuadratic(const Eigen::VectorXd & v) const;

  Covariance scaled(double factor) const;

 private:
  Covariance(CovarianceRole role, Eigen::MatrixXd matrix);

  CovarianceRole role_;
  Eigen::MatrixXd matrix_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// -----------------------------------------------------------------------------
/// Observation operator and error covariance for observations taken `offset`
/// steps after the window start.
struct ObservationOperatorBlock {
  int offset;
  ObsOperator H;
  Covariance R;
};

/// Everything in the window cost that does not depend on x^B or y:
/// B, M, the observation blocks and the derived G = H M^offset.
class WindowOperators {
 public:
  WindowOperators(Covariance B, TangentLinearModel M, int windowSteps,
                  std::vector<ObservationOperatorBlock> blocks);

  const Covariance & B() const {return B_;}
  const TangentLinearModel & M() const {return M_;}
  int windowSteps() const {return windowSteps_;}
  int size() const {return B_.size();}
  const std::vector<ObservationOperatorBlock> & blocks() const {return blocks_;}

  /// G_i = H_i M^{offset_i}.
  const std::vector<Eigen::MatrixXd> & G() const {return G_;}
  /// R_i^{-1} G_i.
  const std::vector<Eigen::MatrixXd> & weightedG() const {return RinvG_;}

  /// B^{-1} + sum_i G_i^T R_i^{-1} G_i, assembled on first use.
  const Eigen::MatrixXd & hessian() const;
  const Eigen::LLT<Eigen::MatrixXd> & hessianFactor() const;

  Eigen::VectorXd applyHessian(const Eigen::VectorXd & v) const;

 private:
  void assemble() const;

  Covariance B_;
  TangentLinearModel M_;
  int windowSteps_;
  std::vector<ObservationOperatorBlock> blocks_;
  std::vector<Eigen::MatrixXd> G_;
  std::vector<Eigen::MatrixXd> RinvG_;

  mutable std::once_flag assembled_;
  mutable Eigen::MatrixXd hessian_;
  mutable Eigen::LLT<Eigen::MatrixXd> hessianLlt_;
};

// -----------------------------------------------------------------------------
/// One assimilation window: operators plus the background and observation values.
class WindowProblem {
 public:
  WindowProblem(std::shared_ptr<const WindowOperators> ops, StateVector background,
                std::vector<Eigen::VectorXd> observations);

  const WindowOperators & operators() const {return *ops_;}
  std::shared_ptr<const WindowOperators> sharedOperators() const {return ops_;}
  const StateVector & background() const {return background_;}
  const std::vector<Eigen::VectorXd> & observations() const {return y_;}
  int size() const {return ops_->size();}
  int windowStart() const {return background_.step();}

  /// Same operators and background, different observation values.
  WindowProblem withObservations(std::vector<Eigen::VectorXd> observations) const;

  /// B^{-1} x^B + sum_i G_i^T R_i^{-1} y_i.
  Eigen::VectorXd normalRhs() const;

 private:
  std::shared_ptr<const WindowOperators> ops_;
  StateVector background_;
  std::vector<Eigen::VectorXd> y_;
};

enum class Solver {ClosedForm, ConjugateGradient};
std::string toString(Solver solver);

struct AnalysisResult {
  StateVector xA;
  double costAtMin;
  double gradientNorm;
  Solver solver;
  int iterations;
};

struct GainOperators {
  Eigen::MatrixXd L;
  std::vector<Eigen::MatrixXd> K;
};

// -----------------------------------------------------------------------------

double evalJ(const WindowProblem & p, const Eigen::VectorXd & x);
double evalJ(const WindowProblem & p, const StateVector & x);

Eigen::VectorXd gradJ(const WindowProblem & p, const Eigen::VectorXd & x);
Eigen::VectorXd gradJ(const WindowProblem & p, const StateVector & x);

AnalysisResult solveClosedForm(const WindowProblem & p);

/// Conjugate gradients on the normal equations, started from x^B unless a
/// start is given.  Stops when the gradient 2-norm drops to `tol`.
AnalysisResult solveIterative(const WindowProblem & p, double tol, int maxIter,
                              const std::optional<Eigen::VectorXd> & start = std::nullopt);

GainOperators gainOperators(const WindowOperators & ops);
GainOperators gainOperators(const WindowProblem & p);

}  // namespace varlab
