/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace varlab {

/// Point in the plane; the second component is zero on 1-D grids.
using Coordinate = Eigen::Vector2d;

// -----------------------------------------------------------------------------
/// Uniform 1-D line or 2-D rectangular lattice of cell centroids.
///
/// Centroids are numbered in lexicographic order of (x, y): on a 2-D lattice
/// of shape (nx, ny) the cell (ix, iy) has location index ix * ny + iy.
class GridGeometry {
 public:
  static GridGeometry line(int nCells, double spacing, double origin = 0.0);
  static GridGeometry plane(int nx, int ny, double spacing,
                            const Coordinate & origin = Coordinate::Zero());

  int dim() const {return dim_;}
  int size() const {return shape_[0] * shape_[1];}
  double spacing() const {return spacing_;}
  const std::array<int, 2> & shape() const {return shape_;}
  const Coordinate & origin() const {return origin_;}

  Coordinate centroid(int location) const;
  std::vector<Coordinate> centroids() const;
  double distance(int a, int b) const;

  int locationAt(int ix, int iy = 0) const;
  std::array<int, 2> cellIndex(int location) const;

  /// First-order neighbourhood: the cells one spacing away along an axis.
  /// No wrap-around at the boundary.
  std::vector<int> neighbours(int location) const;

  /// True when `point` lies in the closed bounding box of the centroids.
  bool contains(const Coordinate & point) const;

  bool operator==(const GridGeometry &) const = default;

 private:
  GridGeometry(int dim, std::array<int, 2> shape, double spacing, Coordinate origin);
  void checkLocation(int location) const;

  int dim_;
  std::array<int, 2> shape_;
  double spacing_;
  Coordinate origin_;
};

// -----------------------------------------------------------------------------
class CompositionSet {
 public:
  explicit CompositionSet(std::vector<std::string> names);

  int size() const {return static_cast<int>(names_.size());}
  const std::vector<std::string> & names() const {return names_;}
  const std::string & name(int composition) const;
  int index(const std::string & name) const;

  /// newOrder[i] is the current index of the composition placed at slot i.
  CompositionSet reordered(std::span<const int> newOrder) const;

  bool operator==(const CompositionSet &) const = default;

 private:
  std::vector<std::string> names_;
};

// -----------------------------------------------------------------------------
/// Location-major layout: the P composition values of a cell are contiguous.
class Layout {
 public:
  Layout(int nLocations, int nCompositions);

  int locations() const {return nLocations_;}
  int compositions() const {return nCompositions_;}
  int size() const {return nLocations_ * nCompositions_;}

  int flatIndex(int location, int composition) const;
  int location(int flat) const;
  int composition(int flat) const;

  /// perm[j] is the location-major index of the j-th entry in composition-major
  /// order, so covariance blocks per composition become contiguous.
  std::vector<int> compositionMajorOrder() const;

  bool operator==(const Layout &) const = default;

 private:
  int nLocations_;
  int nCompositions_;
};

// -----------------------------------------------------------------------------
/// Field values at one model step.  Time is kept as an integer step count so
/// window arithmetic stays exact.
class StateVector {
 public:
  StateVector(const Layout & layout, Eigen::VectorXd values, int step = 0);

  static StateVector zeros(const Layout & layout, int step = 0);

  const Layout & layout() const {return layout_;}
  const Eigen::VectorXd & values() const {return values_;}
  int size() const {return static_cast<int>(values_.size());}
  int step() const {return step_;}
  double time(double dt) const {return step_ * dt;}

  double at(int location, int composition) const;

  /// Same layout, new values and step.
  StateVector with(Eigen::VectorXd values, int step) const;

 private:
  Layout layout_;
  Eigen::VectorXd values_;
  int step_;
};

/// Applies a composition reordering to every cell block of a state.
StateVector reorderCompositions(const StateVector & state, std::span<const int> newOrder);

/// Same reordering as a flat index permutation: result[i] = old flat index.
std::vector<int> compositionReorderIndex(const Layout & layout, std::span<const int> newOrder);

}  // namespace varlab
