/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <vector>

#include "doctest.h"

#include "varlab/Exceptions.h"
#include "varlab/Statistics.h"

using namespace varlab;

// -----------------------------------------------------------------------------

TEST_CASE("moments of a small sample") {
  Eigen::MatrixXd s(4, 2);
  s << 1, 2, 2, 4, 3, 6, 4, 8.5;
  const SampleMoments m = sampleMoments(s);
  CHECK(m.mean[0] == doctest::Approx(2.5));
  CHECK(m.mean[1] == doctest::Approx(5.125));
  // two-pass oracle
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double c = 0;
      for (int r = 0; r < 4; ++r) c += (s(r, i) - m.mean[i]) * (s(r, j) - m.mean[j]);
      CHECK(m.covariance(i, j) == doctest::Approx(c / 3.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("moments survive a large offset") {
  Eigen::MatrixXd s(1000, 1);
  for (int r = 0; r < 1000; ++r) s(r, 0) = 1e9 + (r % 2 ? 1.0 : -1.0);
  const SampleMoments m = sampleMoments(s);
  CHECK(m.mean[0] == 1e9);
  CHECK(m.covariance(0, 0) == doctest::Approx(1000.0 / 999.0).epsilon(1e-12));
}

TEST_CASE("constant samples have zero variance and no correlation") {
  const std::vector<double> c(50, 3.0);
  std::vector<double> x(50);
  for (int i = 0; i < 50; ++i) x[i] = i;
  CHECK_FALSE(sampleCorrelation(c, x).has_value());
  CHECK(*sampleCorrelation(x, x) == doctest::Approx(1.0));
  std::vector<double> neg(x);
  for (auto & e : neg) e = -2.0 * e + 1.0;
  CHECK(*sampleCorrelation(x, neg) == doctest::Approx(-1.0));

  Eigen::MatrixXd cov(2, 2);
  cov << 0.0, 0.0, 0.0, 2.0;
  const Eigen::MatrixXd r = correlationFromCovariance(cov);
  CHECK(std::isnan(r(0, 0)));
  CHECK(r(1, 1) == 1.0);
}

TEST_CASE("bootstrap interval brackets the estimate") {
  RandomStream g(1, 0, 0, StreamPurpose::Bootstrap);
  std::vector<double> x(400), y(400);
  for (int i = 0; i < 400; ++i) {
    x[i] = g.normal();
    y[i] = 0.6 * x[i] + 0.8 * g.normal();
  }
  RandomStream b(1, 0, 1, StreamPurpose::Bootstrap);
  const CorrelationEstimate e = bootstrapCorrelation(x, y, 500, 0.95, b);
  REQUIRE(e.rho.has_value());
  CHECK(*e.ciLow <= *e.rho);
  CHECK(*e.rho <= *e.ciHigh);
  CHECK(*e.ciLow < 0.6);
  CHECK(*e.ciHigh > 0.6);
  CHECK(*e.ciHigh - *e.ciLow < 0.25);

  const std::vector<double> c(400, 1.0);
  RandomStream b2(1, 0, 2, StreamPurpose::Bootstrap);
  const CorrelationEstimate none = bootstrapCorrelation(x, c, 100, 0.95, b2);
  CHECK_FALSE(none.rho.has_value());
  CHECK_FALSE(none.ciLow.has_value());
}

TEST_CASE("variogram of a linear trend") {
  // z = x on a line: semivariance at lag h is h^2 / 2
  const GridGeometry grid = GridGeometry::line(10, 0.5);
  std::vector<double> z(10);
  for (int i = 0; i < 10; ++i) z[i] = grid.centroid(i)[0];
  const Variogram v = empiricalVariogram(grid, z, 0.5, 4);
  for (int b = 0; b < 4; ++b) {
    const double h = 0.5 * (b + 1);
    CHECK(v.lags[b] == doctest::Approx(h));
    CHECK(v.semivariance[b] == doctest::Approx(0.5 * h * h));
    CHECK(v.pairs[b] == 10 - (b + 1));
  }
  CHECK_THROWS_AS(empiricalVariogram(grid, std::vector<double>(3), 0.5, 4), DomainError);
}
