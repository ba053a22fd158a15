/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "varlab/Cost.h"
#include "varlab/Dynamics.h"
#include "varlab/GridState.h"
#include "varlab/ObsOperator.h"

namespace varlab {
namespace test {

// -----------------------------------------------------------------------------
/// Single-cell, single-composition geometry for hand cases.
inline GridGeometry scalarGrid() {return GridGeometry::line(1, 1.0);}
inline Layout scalarLayout() {return Layout(1, 1);}

inline ObsOperator scalarH() {
  return buildH(scalarGrid(), scalarLayout(), {ObservationSite{Coordinate::Zero(), 0}});
}

/// Scalar window problem: B, R, M are numbers; one observation per offset.
inline WindowProblem scalarProblem(double b, double r, double m, double xb,
                                   const std::vector<int> & offsets,
                                   const std::vector<double> & ys, int windowSteps = 1) {
  const Layout layout = scalarLayout();
  std::vector<ObservationOperatorBlock> blocks;
  std::vector<Eigen::VectorXd> y;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    blocks.push_back({offsets[i], scalarH(),
                      Covariance::observation(Eigen::MatrixXd::Constant(1, 1, r))});
    y.push_back(Eigen::VectorXd::Constant(1, ys[i]));
  }
  auto ops = std::make_shared<const WindowOperators>(
    Covariance::background(Eigen::MatrixXd::Constant(1, 1, b), layout),
    TangentLinearModel(Eigen::MatrixXd::Constant(1, 1, m), 1.0), windowSteps, std::move(blocks));
  return WindowProblem(ops, StateVector(layout, Eigen::VectorXd::Constant(1, xb), 0), y);
}

/// Random symmetric positive-definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd randomSpd(int n, std::mt19937_64 & gen, double lo = 0.2, double hi = 2.0) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) for (int j = 0; j < n; ++j) A(i, j) = z(gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = u(gen);
  Eigen::MatrixXd S = Q * d.asDiagonal() * Q.transpose();
  return 0.5 * (S + S.transpose());
}

/// Random window problem on a 1-D grid with `nComp` compositions: random
/// exponential B, random contractive M, random sites and times, random SPD R.
struct RandomProblemOptions {
  int nCells = 6;
  int nComp = 1;
  int windowSteps = 3;
  int maxSitesPerTime = 4;
};

inline WindowProblem randomProblem(std::mt19937_64 & gen, const RandomProblemOptions & opt = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z;
  const GridGeometry grid = GridGeometry::line(opt.nCells, 1.0);
  const Layout layout(opt.nCells, opt.nComp);
  const int n = layout.size();

  const Covariance B = Covariance::exponentialBackground(grid, layout, 0.5 + u(gen),
                                                         0.5 + 2.0 * u(gen));
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i) for (int j = 0; j < n; ++j) A(i, j) = z(gen);
  A *= 0.9 / A.operatorNorm();
  const TangentLinearModel M(A, 1.0);

  std::vector<ObservationOperatorBlock> blocks;
  std::vector<Eigen::VectorXd> ys;
  for (int off = 0; off <= opt.windowSteps; ++off) {
    if (off > 0 && u(gen) < 0.3) continue;
    const int m = 1 + static_cast<int>(u(gen) * opt.maxSitesPerTime);
    std::vector<ObservationSite> sites;
    for (int i = 0; i < m; ++i) {
      sites.push_back({Coordinate(u(gen) * (opt.nCells - 1), 0.0),
                       static_cast<int>(u(gen) * opt.nComp)});
    }
    blocks.push_back({off, buildH(grid, layout, sites), Covariance::observation(randomSpd(m, gen))});
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) y[i] = z(gen);
    ys.push_back(y);
  }
  Eigen::VectorXd xb(n);
  for (int i = 0; i < n; ++i) xb[i] = z(gen);
  auto ops = std::make_shared<const WindowOperators>(B, M, opt.windowSteps, std::move(blocks));
  return WindowProblem(ops, StateVector(layout, xb, 0), ys);
}

inline double maxAbs(const Eigen::MatrixXd & m) {return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;}

}  // namespace test
}  // namespace varlab
