/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Dynamics.h"

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "varlab/Exceptions.h"

namespace varlab {

std::string toString(ModelKind kind) {
  switch (kind) {
    case ModelKind::LinearAdvectionDiffusion: return "linear_advection_diffusion";
    case ModelKind::QuadraticPerturbed: return "quadratic_perturbed";
  }
  return "unknown";
}

ModelKind modelKindFromString(const std::string & name) {
  if (name == "linear_advection_diffusion") return ModelKind::LinearAdvectionDiffusion;
  if (name == "quadratic_perturbed") return ModelKind::QuadraticPerturbed;
  throw ConfigError("unknown dynamics kind '" + name + "'");
}

double spectralRadius(const Eigen::MatrixXd & A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue computation failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// -----------------------------------------------------------------------------

NonlinearModel::NonlinearModel(Eigen::MatrixXd A, double dt, ModelKind kind, double eps,
                               double diffusion)
  : A_(std::move(A)), dt_(dt), kind_(kind), eps_(eps), diffusion_(diffusion)
{
  if (A_.rows() != A_.cols() || A_.rows() == 0) {
    throw DomainError("model matrix must be square and non-empty");
  }
  if (!A_.allFinite()) throw DomainError("model matrix must be finite");
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw DomainError("model step dt must be positive");
  if (!(diffusion_ >= 0.0)) throw DomainError("diffusion must be nonnegative");
  if (!std::isfinite(eps_)) throw DomainError("quadratic gain must be finite");
  if (kind_ == ModelKind::LinearAdvectionDiffusion && eps_ != 0.0) {
    throw DomainError("linear model cannot carry a quadratic gain");
  }

  // Cheap norm bounds first; eigenvalues only when they are inconclusive.
  const double bound = 1.0 + 10.0 * diffusion_ + 1e-12;
  const double normInf = A_.cwiseAbs().rowwise().sum().maxCoeff();
  const double norm1 = A_.cwiseAbs().colwise().sum().maxCoeff();
  if (std::min(normInf, norm1) > bound) {
    const double rho = spectralRadius(A_);
    if (rho > bound) {
      throw DomainError("model matrix spectral radius " + std::to_string(rho)
                        + " exceeds stability bound " + std::to_string(bound));
    }
  }
}

NonlinearModel NonlinearModel::fromMatrix(Eigen::MatrixXd linearPart, double dt, ModelKind kind,
                                          double quadraticGain, double diffusion) {
  return NonlinearModel(std::move(linearPart), dt, kind, quadraticGain, diffusion);
}

NonlinearModel NonlinearModel::advectionDiffusion(const GridGeometry & grid, const Layout & layout,
                                                  const StencilParams & params, double dt,
                                                  ModelKind kind, double quadraticGain) {
  if (layout.locations() != grid.size()) {
    throw DomainError("layout and grid disagree on the number of locations");
  }
  if (!(params.diffusion >= 0.0)) throw DomainError("diffusion must be nonnegative");
  if (!(params.decay >= 0.0 && params.decay < 1.0)) throw DomainError("decay must lie in [0, 1)");
  if (!(dt > 0.0)) throw DomainError("model step dt must be positive");

  const double h = grid.spacing();
  const double courant = std::abs(params.advection) * dt / h;
  const double diff = params.diffusion * dt / (h * h);
  const auto [nx, ny] = grid.shape();

  // Per-location weights of the scalar stencil, periodic in each axis.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(grid.size(), grid.size());
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const int row = grid.locationAt(ix, iy);
      const int west = grid.locationAt((ix - 1 + nx) % nx, iy);
      const int east = grid.locationAt((ix + 1) % nx, iy);
      const int upwind = params.advection >= 0.0 ? west : east;
      S(row, row) += 1.0 - courant;
      S(row, upwind) += courant;
      S(row, west) += diff;
      S(row, east) += diff;
      S(row, row) -= 2.0 * diff;
      if (grid.dim() == 2) {
        const int south = grid.locationAt(ix, (iy - 1 + ny) % ny);
        const int north = grid.locationAt(ix, (iy + 1) % ny);
        S(row, south) += diff;
        S(row, north) += diff;
        S(row, row) -= 2.0 * diff;
      }
    }
  }
  S *= (1.0 - params.decay);

  const int P = layout.compositions();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(layout.size(), layout.size());
  for (int i = 0; i < grid.size(); ++i) {
    for (int j = 0; j < grid.size(); ++j) {
      if (S(i, j) == 0.0) continue;
      for (int c = 0; c < P; ++c) A(layout.flatIndex(i, c), layout.flatIndex(j, c)) = S(i, j);
    }
  }
  return NonlinearModel(std::move(A), dt, kind, quadraticGain, params.diffusion);
}

Eigen::VectorXd NonlinearModel::step(const Eigen::VectorXd & x) const {
  if (x.size() != A_.cols()) throw DomainError("state size does not match model");
  Eigen::VectorXd out = A_ * x;
  if (eps_ != 0.0) out += eps_ * x.cwiseProduct(x);
  return out;
}

Eigen::MatrixXd NonlinearModel::jacobian(const Eigen::VectorXd & x) const {
  if (x.size() != A_.cols()) throw DomainError("state size does not match model");
  Eigen::MatrixXd J = A_;
  J.diagonal() += 2.0 * eps_ * x;
  return J;
}

// -----------------------------------------------------------------------------

TangentLinearModel::TangentLinearModel(Eigen::MatrixXd M, double dt) : M_(std::move(M)), dt_(dt) {
  if (M_.rows() != M_.cols() || M_.rows() == 0) throw DomainError("propagator must be square");
  if (!M_.allFinite()) throw DomainError("propagator must be finite");
  if (!(dt_ > 0.0)) throw DomainError("propagator step dt must be positive");
}

int TangentLinearModel::stepsBetween(double fromTime, double toTime) const {
  if (!(toTime >= fromTime)) {
    throw DomainError("propagation end time precedes start time");
  }
  const double ratio = (toTime - fromTime) / dt_;
  const double k = std::round(ratio);
  const double tol = 1e-9 * std::max(1.0, std::abs(ratio));
  auto aligned = [&](double t) {
    const double r = t / dt_;
    return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
  };
  if (std::abs(ratio - k) > tol || !aligned(fromTime) || !aligned(toTime)) {
    throw DomainError("times " + std::to_string(fromTime) + " and " + std::to_string(toTime)
                      + " are not multiples of dt = " + std::to_string(dt_));
  }
  return static_cast<int>(k);
}

Eigen::VectorXd TangentLinearModel::propagate(const Eigen::VectorXd & x, int steps) const {
  if (steps < 0) throw DomainError("negative propagation step count");
  if (x.size() != M_.cols()) throw DomainError("state size does not match propagator");
  Eigen::VectorXd out = x;
  for (int k = 0; k < steps; ++k) out = M_ * out;
  return out;
}

// -----------------------------------------------------------------------------

StateVector evolveNonlinear(const NonlinearModel & model, const StateVector & x, int steps) {
  if (steps < 1) throw DomainError("evolve needs at least one step");
  Eigen::VectorXd v = x.values();
  for (int k = 1; k <= steps; ++k) {
    v = model.step(v);
    if (!v.allFinite()) {
      throw OverflowError("state became non-finite at step " + std::to_string(k), k);
    }
  }
  return x.with(std::move(v), x.step() + steps);
}

TangentLinearModel tangentLinearAtZero(const NonlinearModel & model) {
  // d/dx (eps x.*x) vanishes at 0, so the Jacobian is the linear part.
  return TangentLinearModel(model.jacobian(Eigen::VectorXd::Zero(model.size())), model.dt());
}

Eigen::MatrixXd propagatorPower(const TangentLinearModel & M, int steps) {
  if (steps < 0) throw DomainError("negative propagation step count");
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(M.size(), M.size());
  for (int k = 0; k < steps; ++k) out = M.matrix() * out;
  return out;
}

Eigen::MatrixXd propagatorProduct(const TangentLinearModel & M, double fromTime, double toTime) {
  return propagatorPower(M, M.stepsBetween(fromTime, toTime));
}

}  // namespace varlab
