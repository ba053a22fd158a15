/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Cost.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>

#include "varlab/Exceptions.h"

namespace varlab {

namespace {

std::string roleName(CovarianceRole role) {
  return role == CovarianceRole::Background ? "background covariance" : "observation covariance";
}

}  // namespace

// -----------------------------------------------------------------------------

Covariance::Covariance(CovarianceRole role, Eigen::MatrixXd matrix)
  : role_(role), matrix_(std::move(matrix))
{
  const std::string name = roleName(role_);
  if (matrix_.rows() != matrix_.cols()) throw DomainError(name + " must be square");
  if (!matrix_.allFinite()) throw NumericError(name + " has non-finite entries");
  const double scale = std::max(1.0, matrix_.size() ? matrix_.cwiseAbs().maxCoeff() : 0.0);
  if (matrix_.size() && (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericError(name + " is not symmetric");
  }
  if (matrix_.rows() > 0 && matrix_.rows() <= 64) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix_, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
      throw NumericError(name + " is not positive definite");
    }
  }
  llt_.compute(matrix_);
  if (llt_.info() != Eigen::Success) throw NumericError("Cholesky factorization of " + name + " failed");
}

Covariance Covariance::background(Eigen::MatrixXd matrix, const Layout & layout) {
  if (matrix.rows() != layout.size()) throw DomainError("background covariance has wrong size");
  for (int i = 0; i < layout.size(); ++i) {
    for (int j = 0; j < layout.size(); ++j) {
      if (layout.composition(i) != layout.composition(j) && matrix(i, j) != 0.0) {
        throw DomainError("background covariance couples different compositions");
      }
    }
  }
  return Covariance(CovarianceRole::Background, std::move(matrix));
}

Covariance Covariance::observation(Eigen::MatrixXd matrix) {
  return Covariance(CovarianceRole::Observation, std::move(matrix));
}

Covariance Covariance::exponentialBackground(const GridGeometry & grid, const Layout & layout,
                                             double sigma, double length) {
  if (!(sigma > 0.0) || !(length > 0.0)) {
    throw DomainError("background sigma and correlation length must be positive");
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(layout.size(), layout.size());
  for (int a = 0; a < grid.size(); ++a) {
    for (int b = 0; b < grid.size(); ++b) {
      const double v = sigma * sigma * std::exp(-grid.distance(a, b) / length);
      for (int c = 0; c < layout.compositions(); ++c) {
        B(layout.flatIndex(a, c), layout.flatIndex(b, c)) = v;
      }
    }
  }
  return background(std::move(B), layout);
}

Covariance Covariance::diagonalObservation(int size, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("observation sigma must be positive");
  return observation(Eigen::MatrixXd::Identity(size, size) * (sigma * sigma));
}

Eigen::VectorXd Covariance::solve(const Eigen::VectorXd & v) const {
  if (v.size() != size()) throw DomainError("vector does not match covariance size");
  return llt_.solve(v);
}

Eigen::MatrixXd Covariance::solve(const Eigen::MatrixXd & v) const {
  if (v.rows() != size()) throw DomainError("matrix does not match covariance size");
  return llt_.solve(v);
}

Eigen::MatrixXd Covariance::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
}

double Covariance::inverseQuadratic(const Eigen::VectorXd & v) const {
  if (v.size() != size()) throw DomainError("vector does not match covariance size");
  return llt_.matrixL().solve(v).squaredNorm();
}

Covariance Covariance::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("covariance scale factor must be positive");
  return Covariance(role_, matrix_ * factor);
}

// -----------------------------------------------------------------------------

WindowOperators::WindowOperators(Covariance B, TangentLinearModel M, int windowSteps,
                                 std::vector<ObservationOperatorBlock> blocks)
  : B_(std::move(B)), M_(std::move(M)), windowSteps_(windowSteps), blocks_(std::move(blocks))
{
  if (B_.role() != CovarianceRole::Background) throw DomainError("B must be a background covariance");
  if (M_.size() != B_.size()) throw DomainError("propagator and background sizes differ");
  if (windowSteps_ < 1) throw DomainError("window must span at least one step");

  // Powers of M are formed once in offset order.
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(size(), size());
  int powerOffset = 0;
  std::vector<std::size_t> order(blocks_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return blocks_[a].offset < blocks_[b].offset;
  });
  G_.resize(blocks_.size());
  RinvG_.resize(blocks_.size());
  for (std::size_t i : order) {
    const auto & blk = blocks_[i];
    if (blk.offset < 0 || blk.offset > windowSteps_) {
      throw DomainError("observation offset " + std::to_string(blk.offset) + " outside window [0, "
                        + std::to_string(windowSteps_) + "]");
    }
    if (blk.H.cols() != size()) throw DomainError("observation operator does not match state size");
    if (blk.R.role() != CovarianceRole::Observation || blk.R.size() != blk.H.rows()) {
      throw DomainError("observation covariance does not match observation count");
    }
    while (powerOffset < blk.offset) {
      power = M_.matrix() * power;
      ++powerOffset;
    }
    G_[i] = blk.H.matrix() * power;
    RinvG_[i] = blk.R.solve(G_[i]);
  }
}

void WindowOperators::assemble() const {
  std::call_once(assembled_, [this] {
    Eigen::MatrixXd H = B_.inverse();
    for (std::size_t i = 0; i < G_.size(); ++i) H.noalias() += G_[i].transpose() * RinvG_[i];
    // Symmetrize away round-off before factorizing.
    hessian_ = 0.5 * (H + H.transpose());
    hessianLlt_.compute(hessian_);
  });
  if (hessianLlt_.info() != Eigen::Success) {
    throw NumericError("Cholesky factorization of the cost Hessian failed");
  }
}

const Eigen::MatrixXd & WindowOperators::hessian() const {
  assemble();
  return hessian_;
}

const Eigen::LLT<Eigen::MatrixXd> & WindowOperators::hessianFactor() const {
  assemble();
  return hessianLlt_;
}

Eigen::VectorXd WindowOperators::applyHessian(const Eigen::VectorXd & v) const {
  Eigen::VectorXd out = B_.solve(v);
  for (std::size_t i = 0; i < G_.size(); ++i) out.noalias() += RinvG_[i].transpose() * (G_[i] * v);
  return out;
}

// -----------------------------------------------------------------------------

WindowProblem::WindowProblem(std::shared_ptr<const WindowOperators> ops, StateVector background,
                             std::vector<Eigen::VectorXd> observations)
  : ops_(std::move(ops)), background_(std::move(background)), y_(std::move(observations))
{
  if (!ops_) throw DomainError("window problem needs operators");
  if (background_.size() != ops_->size()) throw DomainError("background does not match operators");
  if (y_.size() != ops_->blocks().size()) {
    throw DomainError("expected " + std::to_string(ops_->blocks().size())
                      + " observation vectors, got " + std::to_string(y_.size()));
  }
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (y_[i].size() != ops_->blocks()[i].H.rows()) {
      throw DomainError("observation vector " + std::to_string(i) + " has wrong length");
    }
    if (!y_[i].allFinite()) throw DomainError("observation values must be finite");
  }
}

WindowProblem WindowProblem::withObservations(std::vector<Eigen::VectorXd> observations) const {
  return WindowProblem(ops_, background_, std::move(observations));
}

Eigen::VectorXd WindowProblem::normalRhs() const {
  Eigen::VectorXd rhs = ops_->B().solve(background_.values());
  for (std::size_t i = 0; i < y_.size(); ++i) {
    rhs.noalias() += ops_->weightedG()[i].transpose() * y_[i];
  }
  return rhs;
}

std::string toString(Solver solver) {
  return solver == Solver::ClosedForm ? "closed_form" : "conjugate_gradient";
}

// -----------------------------------------------------------------------------

double evalJ(const WindowProblem & p, const Eigen::VectorXd & x) {
  if (x.size() != p.size()) throw DomainError("state does not match window problem");
  const auto & ops = p.operators();
  double J = 0.5 * ops.B().inverseQuadratic(p.background().values() - x);
  for (std::size_t i = 0; i < ops.blocks().size(); ++i) {
    const Eigen::VectorXd innovation = p.observations()[i] - ops.G()[i] * x;
    J += 0.5 * ops.blocks()[i].R.inverseQuadratic(innovation);
  }
  return J;
}

double evalJ(const WindowProblem & p, const StateVector & x) {return evalJ(p, x.values());}

Eigen::VectorXd gradJ(const WindowProblem & p, const Eigen::VectorXd & x) {
  if (x.size() != p.size()) throw DomainError("state does not match window problem");
  const auto & ops = p.operators();
  const Eigen::VectorXd d = p.background().values() - x;
  Eigen::VectorXd g = -ops.B().solve(d);
  for (std::size_t i = 0; i < ops.blocks().size(); ++i) {
    const Eigen::VectorXd innovation = p.observations()[i] - ops.G()[i] * x;
    g.noalias() -= ops.weightedG()[i].transpose() * innovation;
  }
  return g;
}

Eigen::VectorXd gradJ(const WindowProblem & p, const StateVector & x) {return gradJ(p, x.values());}

AnalysisResult solveClosedForm(const WindowProblem & p) {
  const Eigen::VectorXd x = p.operators().hessianFactor().solve(p.normalRhs());
  if (!x.allFinite()) throw NumericError("closed-form analysis is not finite");
  return AnalysisResult{p.background().with(x, p.windowStart()), evalJ(p, x), gradJ(p, x).norm(),
                        Solver::ClosedForm, 0};
}

AnalysisResult solveIterative(const WindowProblem & p, double tol, int maxIter,
                              const std::optional<Eigen::VectorXd> & start) {
  if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
  if (maxIter < 0) throw DomainError("iteration limit must be nonnegative");
  const auto & ops = p.operators();
  Eigen::VectorXd x = start ? *start : p.background().values();
  if (x.size() != p.size()) throw DomainError("start state does not match window problem");

  const Eigen::VectorXd rhs = p.normalRhs();
  Eigen::VectorXd r = rhs - ops.applyHessian(x);
  Eigen::VectorXd d = r;
  double rr = r.squaredNorm();
  int it = 0;
  while (std::sqrt(rr) > tol) {
    if (it == maxIter) {
      throw ConvergenceError("conjugate gradient did not converge in " + std::to_string(maxIter)
                             + " iterations", std::sqrt(rr), it);
    }
    const Eigen::VectorXd Hd = ops.applyHessian(d);
    const double curvature = d.dot(Hd);
    if (!(curvature > 0.0)) throw NumericError("non-positive curvature in conjugate gradient");
    const double step = rr / curvature;
    x.noalias() += step * d;
    r.noalias() -= step * Hd;
    const double rrNext = r.squaredNorm();
    d = r + (rrNext / rr) * d;
    rr = rrNext;
    ++it;
  }
  if (!x.allFinite()) throw NumericError("iterative analysis is not finite");
  return AnalysisResult{p.background().with(x, p.windowStart()), evalJ(p, x), gradJ(p, x).norm(),
                        Solver::ConjugateGradient, it};
}

GainOperators gainOperators(const WindowOperators & ops) {
  const auto & llt = ops.hessianFactor();
  GainOperators out;
  out.L = llt.solve(ops.B().inverse());
  out.K.reserve(ops.blocks().size());
  for (const auto & RinvG : ops.weightedG()) {
    out.K.push_back(llt.solve(Eigen::MatrixXd(RinvG.transpose())));
  }
  return out;
}

GainOperators gainOperators(const WindowProblem & p) {return gainOperators(p.operators());}

}  // namespace varlab
