/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "varlab/GridState.h"
#include "varlab/Random.h"

namespace varlab {

/// A scalar observation of one composition at an arbitrary point of the grid hull.
struct ObservationSite {
  Coordinate location = Coordinate::Zero();
  int composition = 0;
};

struct ObservationTime {
  int step = 0;
  std::vector<ObservationSite> sites;
};

// -----------------------------------------------------------------------------
/// Where and when observations are taken inside one window [start, start + steps].
/// Both window endpoints are included.
class ObservationGeometry {
 public:
  ObservationGeometry(const GridGeometry & grid, const Layout & layout,
                      std::vector<ObservationTime> times, int windowStart, int windowSteps);

  const std::vector<ObservationTime> & times() const {return times_;}
  int windowStart() const {return windowStart_;}
  int windowSteps() const {return windowSteps_;}

  /// Sites observed at `step`; empty when nothing is observed then.
  const std::vector<ObservationSite> & sitesAt(int step) const;

 private:
  std::vector<ObservationTime> times_;
  int windowStart_;
  int windowSteps_;
};

// -----------------------------------------------------------------------------
/// Row-stochastic interpolation matrix from state space to observation space.
class ObsOperator {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  /// Checks every row: entries in [0, 1], at most 2^dim nonzeros inside the
  /// observed composition, sum within 1e-12 of one.
  ObsOperator(Matrix H, const Layout & layout, int gridDim);

  const Matrix & matrix() const {return H_;}
  Eigen::MatrixXd dense() const {return Eigen::MatrixXd(H_);}
  int rows() const {return static_cast<int>(H_.rows());}
  int cols() const {return static_cast<int>(H_.cols());}

 private:
  Matrix H_;
};

/// Bilinear (tensor product of 1-D linear) weights for each site.
ObsOperator buildH(const GridGeometry & grid, const Layout & layout,
                   const std::vector<ObservationSite> & sites);

/// Operator for the observations taken at `step` of the window geometry.
ObsOperator buildH(const GridGeometry & grid, const Layout & layout,
                   const ObservationGeometry & geometry, int step);

Eigen::VectorXd predictObservations(const ObsOperator & H, const StateVector & x);

// -----------------------------------------------------------------------------
/// How observation sites are chosen at each observed step.
enum class PlacementKind {Centroid, UniformRandom, Fixed};

struct PlacementSpec {
  PlacementKind kind = PlacementKind::Centroid;
  /// Sites per observed step for UniformRandom.
  int count = 0;
  std::vector<ObservationSite> fixedSites;
  /// Observed compositions; empty means all.
  std::vector<int> compositions;
};

/// Centroid: every cell for each observed composition.  UniformRandom: `count`
/// points drawn uniformly over the hull, composition drawn uniformly.  Fixed:
/// the listed sites.  `rng` is only read for UniformRandom.
std::vector<ObservationSite> placeSites(const GridGeometry & grid, const Layout & layout,
                                        const PlacementSpec & spec, RandomStream * rng);
Eigen::VectorXd predictObservations(const ObsOperator & H, const Eigen::VectorXd & x);

}  // namespace varlab
