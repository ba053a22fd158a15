/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Statistics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "varlab/Exceptions.h"

namespace varlab {

void CompensatedSum::add(const Eigen::ArrayXd & v) {
  if (v.size() != sum_.size()) throw DomainError("compensated sum size mismatch");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double t = sum_[i] + v[i];
    if (std::abs(sum_[i]) >= std::abs(v[i])) {
      carry_[i] += (sum_[i] - t) + v[i];
    } else {
      carry_[i] += (v[i] - t) + sum_[i];
    }
    sum_[i] = t;
  }
}

SampleMoments sampleMoments(const Eigen::MatrixXd & samples) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index n = samples.cols();
  if (m < 2) throw DomainError("sample moments need at least two members");
  const Eigen::ArrayXd ref = samples.row(0).transpose().array();
  CompensatedSum first(n);
  CompensatedSum second(n * n);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::VectorXd d = samples.row(r).transpose() - ref.matrix();
    first.add(d.array());
    const Eigen::MatrixXd outer = d * d.transpose();
    second.add(Eigen::Map<const Eigen::ArrayXd>(outer.data(), n * n));
  }
  const Eigen::VectorXd meanShift = first.value().matrix() / static_cast<double>(m);
  const Eigen::ArrayXd s2 = second.value();
  Eigen::MatrixXd cov = Eigen::Map<const Eigen::MatrixXd>(s2.data(), n, n);
  cov = (cov - static_cast<double>(m) * meanShift * meanShift.transpose()) / static_cast<double>(m - 1);
  cov = 0.5 * (cov + cov.transpose());
  for (Eigen::Index i = 0; i < n; ++i) cov(i, i) = std::max(cov(i, i), 0.0);
  return {ref.matrix() + meanShift, cov};
}

std::optional<double> sampleCorrelation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("correlation samples differ in length");
  if (x.size() < 2) throw DomainError("correlation needs at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  // Spread at round-off level of the mean counts as degenerate.
  const double eps = std::numeric_limits<double>::epsilon();
  const double tinyX = n * std::pow(eps * std::max(1.0, std::abs(mx)), 2);
  const double tinyY = n * std::pow(eps * std::max(1.0, std::abs(my)), 2);
  if (sxx <= tinyX || syy <= tinyY) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationEstimate bootstrapCorrelation(std::span<const double> x, std::span<const double> y,
                                         int resamples, double level, RandomStream & rng) {
  CorrelationEstimate out;
  out.rho = sampleCorrelation(x, y);
  if (!out.rho || resamples < 2) return out;
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  const std::size_t n = x.size();
  std::vector<double> bx(n), by(n), stats;
  stats.reserve(resamples);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t j = rng.below(static_cast<std::uint32_t>(n));
      bx[i] = x[j];
      by[i] = y[j];
    }
    if (const auto r = sampleCorrelation(bx, by)) stats.push_back(*r);
  }
  if (stats.size() < 2) return out;
  std::sort(stats.begin(), stats.end());
  const double alpha = 0.5 * (1.0 - level);
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  out.ciLow = quantile(alpha);
  out.ciHigh = quantile(1.0 - alpha);
  return out;
}

Eigen::MatrixXd correlationFromCovariance(const Eigen::MatrixXd & covariance) {
  const Eigen::Index n = covariance.rows();
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double denom = std::sqrt(covariance(i, i) * covariance(j, j));
      out(i, j) = denom > 0.0 ? std::clamp(covariance(i, j) / denom, -1.0, 1.0)
                              : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

Variogram empiricalVariogram(const GridGeometry & grid, std::span<const double> values,
                             double binWidth, int nBins) {
  if (static_cast<int>(values.size()) != grid.size()) {
    throw DomainError("variogram needs one value per grid location");
  }
  if (!(binWidth > 0.0) || nBins < 1) throw DomainError("invalid variogram binning");
  Variogram v;
  v.lags.resize(nBins);
  v.semivariance.assign(nBins, 0.0);
  v.pairs.assign(nBins, 0);
  for (int i = 0; i < grid.size(); ++i) {
    for (int j = i + 1; j < grid.size(); ++j) {
      // bins centred on multiples of the width, so lattice lags fall mid-bin
      const long bin = std::lround(grid.distance(i, j) / binWidth) - 1;
      if (bin < 0 || bin >= nBins) continue;
      const double diff = values[i] - values[j];
      v.semivariance[bin] += diff * diff;
      ++v.pairs[bin];
    }
  }
  for (int b = 0; b < nBins; ++b) {
    v.lags[b] = (b + 1) * binWidth;
    if (v.pairs[b] > 0) v.semivariance[b] /= 2.0 * v.pairs[b];
  }
  return v;
}

}  // namespace varlab
