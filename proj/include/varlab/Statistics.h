/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "varlab/GridState.h"
#include "varlab/Random.h"

namespace varlab {

/// Neumaier-compensated running sum of a fixed-size array.
class CompensatedSum {
 public:
  explicit CompensatedSum(Eigen::Index size = 0)
    : sum_(Eigen::ArrayXd::Zero(size)), carry_(Eigen::ArrayXd::Zero(size)) {}

  void add(const Eigen::ArrayXd & v);
  Eigen::ArrayXd value() const {return sum_ + carry_;}

 private:
  Eigen::ArrayXd sum_;
  Eigen::ArrayXd carry_;
};

/// Sample mean and covariance of the rows of `samples` (one row per member),
/// accumulated in row order with compensation around the first row.
struct SampleMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
SampleMoments sampleMoments(const Eigen::MatrixXd & samples);

/// Pearson correlation; nullopt when either sample has zero spread.
std::optional<double> sampleCorrelation(std::span<const double> x, std::span<const double> y);

struct CorrelationEstimate {
  std::optional<double> rho;
  std::optional<double> ciLow;
  std::optional<double> ciHigh;
};

/// Correlation with a percentile bootstrap interval (resampling members).
CorrelationEstimate bootstrapCorrelation(std::span<const double> x, std::span<const double> y,
                                         int resamples, double level, RandomStream & rng);

/// Correlation matrix from a covariance; zero-variance rows/columns are NaN.
Eigen::MatrixXd correlationFromCovariance(const Eigen::MatrixXd & covariance);

struct Variogram {
  std::vector<double> lags;
  std::vector<double> semivariance;
  std::vector<int> pairs;
};

/// Semivariance 0.5 * mean((z_i - z_j)^2) over centroid pairs, bin b holding
/// distances within half a width of (b + 1) * binWidth.
Variogram empiricalVariogram(const GridGeometry & grid, std::span<const double> values,
                             double binWidth, int nBins);

}  // namespace varlab
