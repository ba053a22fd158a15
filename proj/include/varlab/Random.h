/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace varlab {

/// Philox4x32-10 block cipher (Salmon et al., SC'11 counter-based generators).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

inline constexpr std::string_view kRngAlgorithm = "philox4x32-10";

enum class StreamPurpose : std::uint32_t {
  TruthInitial = 1,
  TruthInnovation = 2,
  ObservationNoise = 3,
  ObservationPlacement = 4,
  Guess = 5,
  Bootstrap = 6,
};

// -----------------------------------------------------------------------------
/// Sequential draws from one substream.  The stream id occupies three counter
/// words and the fourth counts blocks, so streams never overlap.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t member, std::uint32_t index,
               StreamPurpose purpose);

  std::uint32_t nextU32();
  std::uint64_t nextU64();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; both variates of a pair are used.
  double normal();
  Eigen::VectorXd normals(int n);
  /// Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::optional<double> spare_;
};

// -----------------------------------------------------------------------------
/// Maps (member, index, purpose) triples to independent substreams of one
/// master seed.  Stateless: the same triple always yields the same stream.
class SeedPlan {
 public:
  explicit SeedPlan(std::uint64_t masterSeed) : masterSeed_(masterSeed) {}

  std::uint64_t masterSeed() const {return masterSeed_;}
  RandomStream stream(std::uint32_t member, std::uint32_t index, StreamPurpose purpose) const {
    return RandomStream(masterSeed_, member, index, purpose);
  }

 private:
  std::uint64_t masterSeed_;
};

}  // namespace varlab
