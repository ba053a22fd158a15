/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>

#include <Eigen/Core>

#include "varlab/GridState.h"

namespace varlab {

enum class ModelKind {
  LinearAdvectionDiffusion,
  QuadraticPerturbed,
};

std::string toString(ModelKind kind);
ModelKind modelKindFromString(const std::string & name);

// -----------------------------------------------------------------------------
/// One model step  m(x) = A x + eps * (x .* x).
///
/// A is either the upwind advection-diffusion stencil on a periodic grid
/// (applied to every composition independently) or an explicit matrix.  The
/// spectral radius of A is checked against 1 + 10 * diffusion on construction.
class NonlinearModel {
 public:
  struct StencilParams {
    double advection = 0.0;
    double diffusion = 0.0;
    /// Uniform relaxation: the stencil is scaled by (1 - decay).
    double decay = 0.0;
  };

  static NonlinearModel advectionDiffusion(const GridGeometry & grid, const Layout & layout,
                                           const StencilParams & params, double dt,
                                           ModelKind kind = ModelKind::LinearAdvectionDiffusion,
                                           double quadraticGain = 0.0);

  static NonlinearModel fromMatrix(Eigen::MatrixXd linearPart, double dt,
                                   ModelKind kind = ModelKind::LinearAdvectionDiffusion,
                                   double quadraticGain = 0.0, double diffusion = 0.0);

  ModelKind kind() const {return kind_;}
  const Eigen::MatrixXd & linearPart() const {return A_;}
  double quadraticGain() const {return eps_;}
  double diffusion() const {return diffusion_;}
  double dt() const {return dt_;}
  int size() const {return static_cast<int>(A_.rows());}

  Eigen::VectorXd step(const Eigen::VectorXd & x) const;

  /// Analytic Jacobian of one step at x:  A + 2 eps diag(x).
  Eigen::MatrixXd jacobian(const Eigen::VectorXd & x) const;

 private:
  NonlinearModel(Eigen::MatrixXd A, double dt, ModelKind kind, double eps, double diffusion);

  Eigen::MatrixXd A_;
  double dt_;
  ModelKind kind_;
  double eps_;
  double diffusion_;
};

// -----------------------------------------------------------------------------
/// Time-invariant linear propagator for one step of length dt.
class TangentLinearModel {
 public:
  TangentLinearModel(Eigen::MatrixXd M, double dt);

  const Eigen::MatrixXd & matrix() const {return M_;}
  double dt() const {return dt_;}
  int size() const {return static_cast<int>(M_.rows());}

  /// Number of steps between two times; throws unless both are multiples of
  /// dt and toTime >= fromTime.
  int stepsBetween(double fromTime, double toTime) const;

  /// x advanced by `steps` applications of M (vector recursion).
  Eigen::VectorXd propagate(const Eigen::VectorXd & x, int steps) const;

 private:
  Eigen::MatrixXd M_;
  double dt_;
};

// -----------------------------------------------------------------------------

/// Applies m exactly `steps` times; the result carries step + steps.
StateVector evolveNonlinear(const NonlinearModel & model, const StateVector & x, int steps);

/// Jacobian of m at the zero state.
TangentLinearModel tangentLinearAtZero(const NonlinearModel & model);

/// M^k for k = (toTime - fromTime) / dt; the identity when k == 0.
Eigen::MatrixXd propagatorProduct(const TangentLinearModel & M, double fromTime, double toTime);
Eigen::MatrixXd propagatorPower(const TangentLinearModel & M, int steps);

/// Largest eigenvalue modulus.
double spectralRadius(const Eigen::MatrixXd & A);

}  // namespace varlab
