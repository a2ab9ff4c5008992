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

// Contraction and unbiased compressors.
//
// A contraction compressor Q with parameter delta in (0, 1] satisfies
//   E||x - Q(x)||^2 <= (1 - delta) ||x||^2,
// an unbiased compressor Q~ with parameter omega satisfies
//   E[Q~(x)] = x,  E||Q~(x)||^2 <= (omega + 1) ||x||^2.
// Q~ / (omega + 1) is a contraction with delta = 1 / (omega + 1), and
// composing an unbiased compressor after a contraction (restricted to the
// contraction's support) is a contraction with delta_c / (omega + 1).
//
// Bit costs are analytic accounting numbers, not the size of a real encoding.

#ifndef ECVR_COMPRESSORS_HPP_
#define ECVR_COMPRESSORS_HPP_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecvr/rng.hpp"
#include "ecvr/vec.hpp"

namespace ecvr {

enum class CompressorKind {
  kIdentity,
  kTopK,
  kRandK,
  kRandKUnbiased,  // RandK rescaled by d/K
  kRandomDithering,
  kNaturalCompression,
  kScaledUnbiased,  // inner / (omega + 1)
  kCompose,         // unbiased applied on the support of a contraction
};

/// Immutable descriptor of a (possibly composed) compressor.
class CompressorSpec {
 public:
  static CompressorSpec Identity();
  static CompressorSpec TopK(std::size_t k);
  static CompressorSpec RandK(std::size_t k);
  static CompressorSpec RandKUnbiased(std::size_t k);
  /// QSGD-style dithering with `levels` uniform levels; unset means
  /// sqrt(dimension of the vector being compressed).
  static CompressorSpec RandomDithering(std::optional<double> levels = std::nullopt);
  static CompressorSpec NaturalCompression();
  static CompressorSpec ScaledUnbiased(CompressorSpec inner);
  static CompressorSpec Compose(CompressorSpec unbiased, CompressorSpec contraction);

  /// Shorthands used in the experiments.
  static CompressorSpec RTopK(std::size_t k);  // dithering after TopK
  static CompressorSpec NTopK(std::size_t k);  // natural compression after TopK

  /// Parses config strings: identity, top_k:K, rand_k:K, rand_k_unbiased:K,
  /// dither (scaled), natural (scaled), ntop_k:K, rtop_k:K,
  /// unbiased_dither[:s], unbiased_natural, scaled(<spec>),
  /// compose(<unbiased>,<contraction>).
  static CompressorSpec Parse(std::string_view text);
  std::string ToString() const;

  CompressorKind kind() const { return kind_; }
  std::size_t k() const { return k_; }
  std::optional<double> levels() const { return levels_; }
  /// ScaledUnbiased: the wrapped compressor. Compose: the unbiased part.
  const CompressorSpec& inner() const { return *inner_; }
  /// Compose only.
  const CompressorSpec& contraction() const { return *contraction_; }

  bool IsUnbiased() const;
  bool IsContraction() const;
  /// E[Q(x)] = delta * x holds (RandK, or a scaled unbiased compressor).
  bool HasMeanScaling() const;
  bool IsDeterministic() const;

  /// Throws std::invalid_argument if the spec is not usable at dimension d.
  void Validate(std::size_t d) const;

  friend bool operator==(const CompressorSpec& a, const CompressorSpec& b);

 private:
  CompressorSpec() = default;

  CompressorKind kind_ = CompressorKind::kIdentity;
  std::size_t k_ = 0;
  std::optional<double> levels_;
  std::shared_ptr<const CompressorSpec> inner_;
  std::shared_ptr<const CompressorSpec> contraction_;
};

struct CompressedVector {
  Vec values;                        // dense, zero outside support
  std::vector<std::size_t> support;  // sorted indices of nonzero entries
  double nominal_bits = 0.0;
};

CompressedVector Compress(const CompressorSpec& spec, std::span<const double> x,
                          RngStream& rng);

/// Contraction parameter of a contraction-kind spec at dimension d.
double DeltaOf(const CompressorSpec& spec, std::size_t d);

/// Variance parameter of an unbiased-kind spec for vectors of dimension
/// `dim`. Dithering is only supported at s = sqrt(dim), where omega = 1.
double OmegaOf(const CompressorSpec& spec, std::size_t dim);

double BitCost(const CompressorSpec& spec, std::size_t d);

/// ceil(log2(d)), with CeilLog2(1) = 0.
int CeilLog2(std::size_t d);

struct ContractionReport {
  std::size_t trials = 0;
  double mean_ratio = 0.0;  // mean of ||x - Q(x)||^2 / ||x||^2
  double std_error = 0.0;
  double max_ratio = 0.0;
  double bound = 0.0;  // 1 - delta
  bool deterministic = false;
  /// Deterministic specs: max_ratio <= bound. Random: mean <= bound + 3 SE.
  bool passed = false;
};

/// Samples standard-normal vectors and measures the contraction ratio.
ContractionReport VerifyContraction(const CompressorSpec& spec, std::size_t d,
                                    std::size_t trials, RngStream& rng);

struct MomentReport {
  std::size_t trials = 0;
  Vec mean;
  Vec std_error;                // per coordinate
  double max_deviation = 0.0;   // max_i |mean_i - target_i|
  double max_z = 0.0;           // max_i |mean_i - target_i| / SE_i
  double second_moment = 0.0;   // mean of ||Q(x)||^2
  double second_moment_se = 0.0;
  double second_moment_bound = 0.0;
  bool mean_ok = false;
  bool second_moment_ok = false;
};

/// Checks E[Q(x)] = delta * x for specs with HasMeanScaling().
MomentReport VerifyMeanScaling(const CompressorSpec& spec, std::span<const double> x,
                               std::size_t trials, RngStream& rng);
/// Same, on a standard-normal vector of dimension d drawn from rng.
MomentReport VerifyMeanScaling(const CompressorSpec& spec, std::size_t d,
                               std::size_t trials, RngStream& rng);

/// Checks E[Q~(x)] = x and E||Q~(x)||^2 <= (omega + 1)||x||^2 + 3 SE.
MomentReport VerifyUnbiased(const CompressorSpec& spec, std::span<const double> x,
                            std::size_t trials, RngStream& rng);

}  // namespace ecvr

#endif  // ECVR_COMPRESSORS_HPP_
