/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/ObsOperator.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "varlab/Exceptions.h"

namespace varlab {

namespace {

std::string describe(const Coordinate & c, int dim) {
  std::ostringstream os;
  os.precision(17);
  if (dim == 1) {
    os << c[0];
  } else {
    os << "(" << c[0] << ", " << c[1] << ")";
  }
  return os.str();
}

void checkSite(const GridGeometry & grid, const Layout & layout, const ObservationSite & site) {
  if (site.composition < 0 || site.composition >= layout.compositions()) {
    throw DomainError("observation composition " + std::to_string(site.composition)
                      + " out of range");
  }
  if (!grid.contains(site.location)) {
    throw DomainError("observation location " + describe(site.location, grid.dim())
                      + " lies outside the grid hull");
  }
}

/// Weights of the bracketing centroids along one axis: (cell index, weight).
/// A coordinate on a centroid gives a single unit weight.
std::vector<std::pair<int, double>> axisWeights(double coord, double origin, double spacing,
                                                int nCells) {
  const double u = (coord - origin) / spacing;
  const double tol = 1e-12;
  const int nearest = static_cast<int>(std::lround(u));
  if (std::abs(u - nearest) <= tol) {
    return {{std::clamp(nearest, 0, nCells - 1), 1.0}};
  }
  const int lo = std::clamp(static_cast<int>(std::floor(u)), 0, nCells - 2);
  const double x2 = origin + lo * spacing;
  const double x3 = origin + (lo + 1) * spacing;
  const double alpha = (x3 - coord) / (x3 - x2);
  const double beta = (coord - x2) / (x3 - x2);
  return {{lo, alpha}, {lo + 1, beta}};
}

}  // namespace

// -----------------------------------------------------------------------------

ObservationGeometry::ObservationGeometry(const GridGeometry & grid, const Layout & layout,
                                         std::vector<ObservationTime> times, int windowStart,
                                         int windowSteps)
  : times_(std::move(times)), windowStart_(windowStart), windowSteps_(windowSteps)
{
  if (windowStart_ < 0 || windowSteps_ < 1) throw DomainError("invalid observation window");
  std::sort(times_.begin(), times_.end(),
            [](const ObservationTime & a, const ObservationTime & b) {return a.step < b.step;});
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const auto & t = times_[i];
    if (t.step < windowStart_ || t.step > windowStart_ + windowSteps_) {
      throw DomainError("observation step " + std::to_string(t.step) + " outside window ["
                        + std::to_string(windowStart_) + ", "
                        + std::to_string(windowStart_ + windowSteps_) + "]");
    }
    if (i > 0 && times_[i - 1].step == t.step) {
      throw DomainError("observation step " + std::to_string(t.step) + " listed twice");
    }
    for (const auto & site : t.sites) checkSite(grid, layout, site);
  }
}

const std::vector<ObservationSite> & ObservationGeometry::sitesAt(int step) const {
  static const std::vector<ObservationSite> none;
  for (const auto & t : times_) {
    if (t.step == step) return t.sites;
  }
  return none;
}

// -----------------------------------------------------------------------------

ObsOperator::ObsOperator(Matrix H, const Layout & layout, int gridDim) : H_(std::move(H)) {
  if (H_.cols() != layout.size()) throw DomainError("observation operator has wrong column count");
  H_.makeCompressed();
  const int maxNonZeros = gridDim == 2 ? 4 : 2;
  for (int r = 0; r < H_.rows(); ++r) {
    double sum = 0.0;
    int nnz = 0;
    int composition = -1;
    for (Matrix::InnerIterator it(H_, r); it; ++it) {
      const double w = it.value();
      if (!(w >= 0.0 && w <= 1.0)) {
        throw DomainError("observation operator entry outside [0, 1] in row " + std::to_string(r));
      }
      if (w == 0.0) continue;
      const int c = layout.composition(static_cast<int>(it.col()));
      if (composition >= 0 && c != composition) {
        throw DomainError("observation operator row " + std::to_string(r)
                          + " mixes compositions");
      }
      composition = c;
      sum += w;
      ++nnz;
    }
    if (nnz == 0 || nnz > maxNonZeros) {
      throw DomainError("observation operator row " + std::to_string(r) + " has "
                        + std::to_string(nnz) + " nonzeros");
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw DomainError("observation operator row " + std::to_string(r) + " does not sum to one");
    }
  }
}

ObsOperator buildH(const GridGeometry & grid, const Layout & layout,
                   const std::vector<ObservationSite> & sites) {
  if (layout.locations() != grid.size()) {
    throw DomainError("layout and grid disagree on the number of locations");
  }
  std::vector<Eigen::Triplet<double>> entries;
  const auto [nx, ny] = grid.shape();
  for (std::size_t row = 0; row < sites.size(); ++row) {
    const auto & site = sites[row];
    checkSite(grid, layout, site);
    const auto wx = axisWeights(site.location[0], grid.origin()[0], grid.spacing(), nx);
    const auto wy = grid.dim() == 2
        ? axisWeights(site.location[1], grid.origin()[1], grid.spacing(), ny)
        : std::vector<std::pair<int, double>>{{0, 1.0}};
    for (const auto & [ix, ax] : wx) {
      for (const auto & [iy, ay] : wy) {
        const double w = ax * ay;
        if (w == 0.0) continue;
        const int col = layout.flatIndex(grid.locationAt(ix, iy), site.composition);
        entries.emplace_back(static_cast<int>(row), col, w);
      }
    }
  }
  ObsOperator::Matrix H(static_cast<Eigen::Index>(sites.size()), layout.size());
  H.setFromTriplets(entries.begin(), entries.end());
  return ObsOperator(std::move(H), layout, grid.dim());
}

ObsOperator buildH(const GridGeometry & grid, const Layout & layout,
                   const ObservationGeometry & geometry, int step) {
  if (step < geometry.windowStart() || step > geometry.windowStart() + geometry.windowSteps()) {
    throw DomainError("step " + std::to_string(step) + " outside the observation window");
  }
  return buildH(grid, layout, geometry.sitesAt(step));
}

Eigen::VectorXd predictObservations(const ObsOperator & H, const Eigen::VectorXd & x) {
  if (x.size() != H.cols()) {
    throw DomainError("state of size " + std::to_string(x.size())
                      + " does not match observation operator with "
                      + std::to_string(H.cols()) + " columns");
  }
  return H.matrix() * x;
}

Eigen::VectorXd predictObservations(const ObsOperator & H, const StateVector & x) {
  return predictObservations(H, x.values());
}

std::vector<ObservationSite> placeSites(const GridGeometry & grid, const Layout & layout,
                                        const PlacementSpec & spec, RandomStream * rng) {
  std::vector<int> comps = spec.compositions;
  if (comps.empty()) {
    for (int c = 0; c < layout.compositions(); ++c) comps.push_back(c);
  }
  for (int c : comps) {
    if (c < 0 || c >= layout.compositions()) throw DomainError("observed composition out of range");
  }
  std::vector<ObservationSite> sites;
  switch (spec.kind) {
    case PlacementKind::Centroid:
      for (int loc = 0; loc < grid.size(); ++loc) {
        for (int c : comps) sites.push_back({grid.centroid(loc), c});
      }
      break;
    case PlacementKind::UniformRandom: {
      if (spec.count < 0) throw DomainError("observation count must be nonnegative");
      if (spec.count > 0 && rng == nullptr) throw DomainError("random placement needs a stream");
      const Coordinate lo = grid.origin();
      const Coordinate hi = grid.centroid(grid.size() - 1);
      for (int i = 0; i < spec.count; ++i) {
        Coordinate p = lo;
        p[0] += rng->uniform() * (hi[0] - lo[0]);
        if (grid.dim() == 2) p[1] += rng->uniform() * (hi[1] - lo[1]);
        const int c = comps[rng->below(static_cast<std::uint32_t>(comps.size()))];
        sites.push_back({p, c});
      }
      break;
    }
    case PlacementKind::Fixed:
      for (const auto & site : spec.fixedSites) {
        checkSite(grid, layout, site);
        sites.push_back(site);
      }
      break;
  }
  return sites;
}

}  // namespace varlab
