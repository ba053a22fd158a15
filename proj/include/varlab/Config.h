/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace varlab {

// -----------------------------------------------------------------------------
/// Run configuration.  Parsed from a single JSON document; every block is
/// optional and falls back to the defaults below, unknown keys are rejected.

struct GridConfig {
  int dim = 1;
  std::vector<int> nCells = {16};
  double spacing = 1.0;
  std::vector<double> origin;  ///< empty -> zeros
  std::vector<std::string> compositions = {"PM25"};
};

struct DynamicsConfig {
  std::string kind = "linear_advection_diffusion";
  double advection = 0.0;
  double diffusion = 0.0;
  double decay = 0.0;
  double quadraticGain = 0.0;
  double dt = 1.0;
  /// Explicit linear part A; replaces the stencil when present.
  std::optional<std::vector<std::vector<double>>> matrix;
};

struct SiteConfig {
  std::vector<double> location;
  std::string composition;
};

struct ObservationsConfig {
  std::string placement = "centroid";
  int count = 0;
  std::vector<SiteConfig> sites;
  std::vector<std::string> compositions;  ///< empty -> all
  std::vector<int> offsets;               ///< empty -> 0..window_steps
};

struct CovariancesConfig {
  double sigmaB = 1.0;
  std::optional<double> lengthB;  ///< default 2 * spacing
  double sigmaR = 0.5;
};

struct GuessConfig {
  std::string kind = "zeros";   ///< zeros | truth | perturbed_truth | values
  double sigma = 0.0;
  std::vector<double> values;
};

struct CycleSection {
  int windowSteps = 4;
  int nCycles = 5;
  GuessConfig guess;
};

struct WorldConfig {
  std::string truthDynamics = "nonlinear";  ///< nonlinear | tangent_linear
  double sigmaW = 0.0;
  std::optional<double> lengthS;       ///< default 2 * spacing
  std::optional<double> sigmaR;        ///< default covariances.sigma_r
  double initialLevel = 0.0;
  double initialAmplitude = 1.0;
  bool varyTruth = false;              ///< members draw their own truth
};

struct LabConfig {
  int members = 200;
  double significance = 3.0;   ///< threshold = significance / sqrt(members)
  int bootstrap = 500;
  double confidence = 0.95;
  int affineTrials = 5;
  int threads = 0;             ///< 0 -> hardware concurrency
  int variogramBins = 8;
};

struct RunConfig {
  GridConfig grid;
  DynamicsConfig dynamics;
  ObservationsConfig observations;
  CovariancesConfig covariances;
  CycleSection cycle;
  WorldConfig world;
  LabConfig lab;
  std::uint64_t masterSeed = 1;
  std::string outputDir = "out";

  /// Parse and validate; throws ConfigError naming the offending key.
  static RunConfig fromJson(const nlohmann::json & doc);
  static RunConfig fromFile(const std::string & path);

  /// Fully resolved configuration, defaults included.
  nlohmann::json toJson() const;
  /// FNV-1a of the canonical dump of toJson(), hex.
  std::string hash() const;

  void validate() const;
};

}  // namespace varlab
