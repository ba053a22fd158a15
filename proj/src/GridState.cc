/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/GridState.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "varlab/Exceptions.h"

namespace varlab {

// -----------------------------------------------------------------------------

GridGeometry::GridGeometry(int dim, std::array<int, 2> shape, double spacing, Coordinate origin)
  : dim_(dim), shape_(shape), spacing_(spacing), origin_(std::move(origin))
{
  if (shape_[0] < 1 || shape_[1] < 1) {
    throw DomainError("grid needs at least one cell along each axis");
  }
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw DomainError("grid spacing must be positive and finite, got " + std::to_string(spacing_));
  }
  if (!origin_.allFinite()) throw DomainError("grid origin must be finite");
}

GridGeometry GridGeometry::line(int nCells, double spacing, double origin) {
  return GridGeometry(1, {nCells, 1}, spacing, Coordinate(origin, 0.0));
}

GridGeometry GridGeometry::plane(int nx, int ny, double spacing, const Coordinate & origin) {
  return GridGeometry(2, {nx, ny}, spacing, origin);
}

void GridGeometry::checkLocation(int location) const {
  if (location < 0 || location >= size()) {
    throw DomainError("location index " + std::to_string(location) + " outside [0, "
                      + std::to_string(size()) + ")");
  }
}

std::array<int, 2> GridGeometry::cellIndex(int location) const {
  checkLocation(location);
  return {location / shape_[1], location % shape_[1]};
}

int GridGeometry::locationAt(int ix, int iy) const {
  if (ix < 0 || ix >= shape_[0] || iy < 0 || iy >= shape_[1]) {
    throw DomainError("cell (" + std::to_string(ix) + ", " + std::to_string(iy)
                      + ") outside grid");
  }
  return ix * shape_[1] + iy;
}

Coordinate GridGeometry::centroid(int location) const {
  const auto [ix, iy] = cellIndex(location);
  Coordinate c = origin_;
  c[0] += ix * spacing_;
  if (dim_ == 2) c[1] += iy * spacing_;
  return c;
}

std::vector<Coordinate> GridGeometry::centroids() const {
  std::vector<Coordinate> out;
  out.reserve(size());
  for (int loc = 0; loc < size(); ++loc) out.push_back(centroid(loc));
  return out;
}

double GridGeometry::distance(int a, int b) const {
  return (centroid(a) - centroid(b)).norm();
}

std::vector<int> GridGeometry::neighbours(int location) const {
  const auto [ix, iy] = cellIndex(location);
  std::vector<int> out;
  if (ix > 0) out.push_back(locationAt(ix - 1, iy));
  if (ix + 1 < shape_[0]) out.push_back(locationAt(ix + 1, iy));
  if (dim_ == 2) {
    if (iy > 0) out.push_back(locationAt(ix, iy - 1));
    if (iy + 1 < shape_[1]) out.push_back(locationAt(ix, iy + 1));
  }
  return out;
}

bool GridGeometry::contains(const Coordinate & point) const {
  if (!point.allFinite()) return false;
  const double slack = 1e-12 * spacing_;
  const Coordinate hi = centroid(size() - 1);
  if (point[0] < origin_[0] - slack || point[0] > hi[0] + slack) return false;
  if (dim_ == 2) {
    if (point[1] < origin_[1] - slack || point[1] > hi[1] + slack) return false;
  } else if (point[1] != 0.0) {
    return false;
  }
  return true;
}

// -----------------------------------------------------------------------------

CompositionSet::CompositionSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw DomainError("composition set must not be empty");
  std::set<std::string> seen;
  for (const auto & n : names_) {
    if (n.empty()) throw DomainError("composition names must be non-empty");
    if (!seen.insert(n).second) throw DomainError("duplicate composition name '" + n + "'");
  }
}

const std::string & CompositionSet::name(int composition) const {
  if (composition < 0 || composition >= size()) {
    throw DomainError("composition index " + std::to_string(composition) + " out of range");
  }
  return names_[composition];
}

int CompositionSet::index(const std::string & name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw DomainError("unknown composition '" + name + "'");
  return static_cast<int>(it - names_.begin());
}

namespace {

void checkPermutation(std::span<const int> order, int n) {
  if (static_cast<int>(order.size()) != n) {
    throw DomainError("composition reordering has wrong length");
  }
  std::vector<bool> hit(n, false);
  for (int c : order) {
    if (c < 0 || c >= n || hit[c]) throw DomainError("composition reordering is not a permutation");
    hit[c] = true;
  }
}

}  // namespace

CompositionSet CompositionSet::reordered(std::span<const int> newOrder) const {
  checkPermutation(newOrder, size());
  std::vector<std::string> out;
  for (int c : newOrder) out.push_back(names_[c]);
  return CompositionSet(std::move(out));
}

// -----------------------------------------------------------------------------

Layout::Layout(int nLocations, int nCompositions)
  : nLocations_(nLocations), nCompositions_(nCompositions)
{
  if (nLocations_ < 1 || nCompositions_ < 1) {
    throw DomainError("layout needs at least one location and one composition");
  }
}

int Layout::flatIndex(int location, int composition) const {
  if (location < 0 || location >= nLocations_) {
    throw DomainError("location index " + std::to_string(location) + " out of range");
  }
  if (composition < 0 || composition >= nCompositions_) {
    throw DomainError("composition index " + std::to_string(composition) + " out of range");
  }
  return location * nCompositions_ + composition;
}

int Layout::location(int flat) const {
  if (flat < 0 || flat >= size()) throw DomainError("flat index out of range");
  return flat / nCompositions_;
}

int Layout::composition(int flat) const {
  if (flat < 0 || flat >= size()) throw DomainError("flat index out of range");
  return flat % nCompositions_;
}

std::vector<int> Layout::compositionMajorOrder() const {
  std::vector<int> perm;
  perm.reserve(size());
  for (int c = 0; c < nCompositions_; ++c) {
    for (int loc = 0; loc < nLocations_; ++loc) perm.push_back(flatIndex(loc, c));
  }
  return perm;
}

// -----------------------------------------------------------------------------

StateVector::StateVector(const Layout & layout, Eigen::VectorXd values, int step)
  : layout_(layout), values_(std::move(values)), step_(step)
{
  if (values_.size() != layout_.size()) {
    throw DomainError("state has " + std::to_string(values_.size()) + " values, layout needs "
                      + std::to_string(layout_.size()));
  }
  if (!values_.allFinite()) throw DomainError("state values must be finite");
  if (step_ < 0) throw DomainError("state step must be nonnegative");
}

StateVector StateVector::zeros(const Layout & layout, int step) {
  return StateVector(layout, Eigen::VectorXd::Zero(layout.size()), step);
}

double StateVector::at(int location, int composition) const {
  return values_[layout_.flatIndex(location, composition)];
}

StateVector StateVector::with(Eigen::VectorXd values, int step) const {
  return StateVector(layout_, std::move(values), step);
}

std::vector<int> compositionReorderIndex(const Layout & layout, std::span<const int> newOrder) {
  checkPermutation(newOrder, layout.compositions());
  std::vector<int> index(layout.size());
  for (int loc = 0; loc < layout.locations(); ++loc) {
    for (int c = 0; c < layout.compositions(); ++c) {
      index[layout.flatIndex(loc, c)] = layout.flatIndex(loc, newOrder[c]);
    }
  }
  return index;
}

StateVector reorderCompositions(const StateVector & state, std::span<const int> newOrder) {
  const auto index = compositionReorderIndex(state.layout(), newOrder);
  Eigen::VectorXd out(state.size());
  for (int i = 0; i < state.size(); ++i) out[i] = state.values()[index[i]];
  return state.with(std::move(out), state.step());
}

}  // namespace varlab
