// Copyright 2026 The ecvr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef ECVR_RNG_HPP_
#define ECVR_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace ecvr {

/// What a random stream is used for. Streams with different purposes never
/// share state, so e.g. an EC run and its uncompressed twin draw identical
/// sample indices even though only one of them consumes compressor randomness.
enum class StreamPurpose : std::uint64_t {
  kSample = 1,
  kCoin = 2,
  kCompressQ = 3,
  kCompressQ1 = 4,
  kData = 5,
  kVerify = 6,
  kShuffle = 7,
};

/// A seeded 64-bit random stream. Uniform index and real draws are
/// implemented here rather than through <random> distributions so traces are
/// reproducible across standard library implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  /// Derives an independent stream for (node, purpose) from a master seed.
  static RngStream Split(std::uint64_t master_seed, std::uint64_t node,
                         StreamPurpose purpose);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double Uniform();
  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t Index(std::size_t n);
  bool Bernoulli(double p);
  /// Standard normal (Marsaglia polar method).
  double Normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t MixSeed(std::uint64_t x);

}  // namespace ecvr

#endif  // ECVR_RNG_HPP_
