/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <vector>

#include "doctest.h"

#include "varlab/Assimilation.h"
#include "varlab/Exceptions.h"
#include "varlab/GridState.h"
#include "varlab/ObsOperator.h"

using namespace varlab;

// -----------------------------------------------------------------------------

TEST_CASE("flat index examples") {
  const Layout layout(4, 3);
  CHECK(layout.flatIndex(0, 0) == 0);
  CHECK(layout.flatIndex(2, 1) == 7);
  CHECK(layout.flatIndex(3, 2) == layout.size() - 1);
  CHECK_THROWS_AS(layout.flatIndex(4, 0), DomainError);
  CHECK_THROWS_AS(layout.flatIndex(0, 3), DomainError);
  CHECK_THROWS_AS(layout.flatIndex(-1, 0), DomainError);
}

TEST_CASE("flat index and its inverse round trip") {
  for (int N : {1, 2, 7}) {
    for (int P : {1, 3}) {
      const Layout layout(N, P);
      std::vector<bool> hit(layout.size(), false);
      for (int loc = 0; loc < N; ++loc) {
        for (int c = 0; c < P; ++c) {
          const int f = layout.flatIndex(loc, c);
          CHECK(layout.location(f) == loc);
          CHECK(layout.composition(f) == c);
          CHECK_FALSE(hit[f]);
          hit[f] = true;
        }
      }
    }
  }
}

TEST_CASE("grid geometry") {
  const GridGeometry line = GridGeometry::line(5, 0.5, 1.0);
  CHECK(line.size() == 5);
  CHECK(line.centroid(0)[0] == doctest::Approx(1.0));
  CHECK(line.centroid(4)[0] == doctest::Approx(3.0));
  CHECK(line.distance(1, 3) == doctest::Approx(1.0));
  for (int i = 1; i < line.size(); ++i) {
    CHECK(line.centroid(i)[0] > line.centroid(i - 1)[0]);
    CHECK(line.distance(i, i - 1) == doctest::Approx(line.spacing()));
  }
  CHECK(line.contains(Coordinate(2.2, 0.0)));
  CHECK_FALSE(line.contains(Coordinate(3.5, 0.0)));
  CHECK_FALSE(line.contains(Coordinate(2.0, 1.0)));

  const GridGeometry plane = GridGeometry::plane(3, 3, 1.0);
  CHECK(plane.size() == 9);
  CHECK(plane.neighbours(plane.locationAt(1, 1)).size() == 4);
  CHECK(plane.neighbours(plane.locationAt(0, 0)).size() == 2);
  CHECK(plane.distance(0, 8) == doctest::Approx(std::sqrt(8.0)));
  // lexicographic order
  const auto c = plane.centroids();
  for (std::size_t i = 1; i < c.size(); ++i) {
    CHECK((c[i][0] > c[i - 1][0] || (c[i][0] == c[i - 1][0] && c[i][1] > c[i - 1][1])));
  }

  CHECK_THROWS_AS(GridGeometry::line(0, 1.0), DomainError);
  CHECK_THROWS_AS(GridGeometry::line(3, 0.0), DomainError);
  CHECK_THROWS_AS(GridGeometry::line(3, -1.0), DomainError);
}

TEST_CASE("state vector invariants") {
  const Layout layout(3, 2);
  CHECK_THROWS_AS(StateVector(layout, Eigen::VectorXd::Zero(5)), DomainError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(6);
  bad[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(StateVector(layout, bad), DomainError);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(StateVector(layout, bad), DomainError);
  CHECK_THROWS_AS(StateVector(layout, Eigen::VectorXd::Zero(6), -1), DomainError);

  Eigen::VectorXd v(6);
  v << 0, 1, 2, 3, 4, 5;
  const StateVector x(layout, v, 4);
  CHECK(x.at(1, 1) == 3);
  CHECK(x.time(0.5) == doctest::Approx(2.0));
}

TEST_CASE("composition set") {
  const CompositionSet comps({"PM25", "BC", "SU"});
  CHECK(comps.index("BC") == 1);
  CHECK_THROWS_AS(comps.index("NO2"), DomainError);
  CHECK_THROWS_AS(CompositionSet({"PM25", "PM25"}), DomainError);
  CHECK_THROWS_AS(CompositionSet({}), DomainError);
  const std::vector<int> order = {2, 0, 1};
  const CompositionSet r = comps.reordered(order);
  CHECK(r.name(0) == "SU");
  CHECK(r.name(1) == "PM25");
}

TEST_CASE("reordering compositions round trips") {
  const Layout layout(4, 3);
  Eigen::VectorXd v(layout.size());
  for (int i = 0; i < v.size(); ++i) v[i] = 10.0 * layout.location(i) + layout.composition(i);
  const StateVector x(layout, v, 2);
  const std::vector<int> order = {2, 0, 1};
  const std::vector<int> inverse = {1, 2, 0};
  const StateVector y = reorderCompositions(x, order);
  for (int loc = 0; loc < 4; ++loc) {
    for (int c = 0; c < 3; ++c) CHECK(y.at(loc, c) == x.at(loc, order[c]));
  }
  const StateVector back = reorderCompositions(y, inverse);
  CHECK(back.values() == x.values());
  CHECK(back.step() == 2);
  const std::vector<int> notPerm = {0, 0, 1};
  CHECK_THROWS_AS(reorderCompositions(x, notPerm), DomainError);
}

TEST_CASE("reordering compositions commutes with the analysis") {
  // Same twin built in both composition orders; the analyses must agree after
  // the state permutation.
  const GridGeometry grid = GridGeometry::line(5, 1.0);
  const Layout layout(5, 2);
  const std::vector<int> order = {1, 0};
  const auto index = compositionReorderIndex(layout, order);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(10, 10);
  for (int i = 0; i < 10; ++i) {
    A(i, i) = 0.6 + 0.05 * layout.composition(i);
    if (layout.location(i) + 1 < 5) A(i, i + 2) = 0.2;
  }
  Eigen::MatrixXd Ar(10, 10);
  for (int i = 0; i < 10; ++i) for (int j = 0; j < 10; ++j) Ar(i, j) = A(index[i], index[j]);

  const Covariance B = Covariance::exponentialBackground(grid, layout, 1.3, 1.7);
  Eigen::MatrixXd Br(10, 10);
  for (int i = 0; i < 10; ++i) for (int j = 0; j < 10; ++j) Br(i, j) = B.matrix()(index[i], index[j]);

  std::vector<ObservationSite> sites = {{Coordinate(0.3, 0), 0}, {Coordinate(2.5, 0), 1},
                                        {Coordinate(4.0, 0), 0}};
  std::vector<ObservationSite> sitesR;
  for (auto s : sites) {
    s.composition = s.composition == 0 ? 1 : 0;
    sitesR.push_back(s);
  }
  Eigen::VectorXd xbv(10);
  for (int i = 0; i < 10; ++i) xbv[i] = 0.1 * i - 0.3;
  const StateVector xb(layout, xbv, 0);

  auto solve = [&](const Eigen::MatrixXd & Am, const Covariance & Bc,
                   const std::vector<ObservationSite> & s, const StateVector & bg) {
    std::vector<ObservationOperatorBlock> blocks;
    std::vector<Eigen::VectorXd> ys;
    for (int off : {0, 2}) {
      blocks.push_back({off, buildH(grid, layout, s), Covariance::diagonalObservation(3, 0.4)});
      ys.push_back(Eigen::Vector3d(0.5 + off, -0.2, 1.1));
    }
    auto ops = std::make_shared<const WindowOperators>(Bc, TangentLinearModel(Am, 1.0), 2, blocks);
    return solveClosedForm(WindowProblem(ops, bg, ys)).xA;
  };
  const StateVector xa = solve(A, B, sites, xb);
  const StateVector xaR = solve(Ar, Covariance::background(Br, layout), sitesR,
                                reorderCompositions(xb, order));
  const StateVector mapped = reorderCompositions(xa, order);
  CHECK((mapped.values() - xaR.values()).cwiseAbs().maxCoeff() <= 1e-12);
}
