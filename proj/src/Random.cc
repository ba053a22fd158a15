/*
 * (C) Copyright 2026 The varlab Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "varlab/Random.h"

#include <cmath>
#include <numbers>

#include "varlab/Exceptions.h"

namespace varlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t & hi, std::uint32_t & lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// -----------------------------------------------------------------------------

RandomStream::RandomStream(std::uint64_t seed, std::uint32_t member, std::uint32_t index,
                           StreamPurpose purpose)
  : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
    counter_{0u, index, member, static_cast<std::uint32_t>(purpose)}
{}

void RandomStream::refill() {
  if (counter_[0] == 0xFFFFFFFFu) throw NumericError("random substream exhausted");
  block_ = philox4x32(counter_, key_);
  ++counter_[0];
  used_ = 0;
}

std::uint32_t RandomStream::nextU32() {
  if (used_ == 4) refill();
  return block_[used_++];
}

std::uint64_t RandomStream::nextU64() {
  const std::uint64_t hi = nextU32();
  return (hi << 32) | nextU32();
}

double RandomStream::uniform() {
  return (static_cast<double>(nextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Eigen::VectorXd RandomStream::normals(int n) {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = normal();
  return out;
}

std::uint32_t RandomStream::below(std::uint32_t n) {
  if (n == 0) throw DomainError("empty range");
  // Rejection keeps the draw unbiased.
  const std::uint32_t limit = static_cast<std::uint32_t>(-n) % n;
  for (;;) {
    const std::uint32_t r = nextU32();
    if (r >= limit) return r % n;
  }
}

}  // namespace varlab
