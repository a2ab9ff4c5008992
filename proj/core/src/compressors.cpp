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

#include "ecvr/compressors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ecvr {

namespace {

std::shared_ptr<const CompressorSpec> Share(CompressorSpec s) {
  return std::make_shared<const CompressorSpec>(std::move(s));
}

std::string FormatReal(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Indices of the k largest magnitudes; ties go to the lower index.
std::vector<std::size_t> TopKIndices(std::span<const double> x, std::size_t k) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  };
  if (k < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                     idx.end(), before);
    idx.resize(k);
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Uniform k-subset via a partial Fisher-Yates shuffle.
std::vector<std::size_t> RandKIndices(std::size_t d, std::size_t k, RngStream& rng) {
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.Index(d - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void Dither(std::span<const double> x, double levels, RngStream& rng,
            std::span<double> out) {
  const double norm = Norm(x);
  std::fill(out.begin(), out.end(), 0.0);
  if (norm == 0.0) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    const double r = std::abs(x[i]) / norm * levels;
    double level = std::floor(r);
    if (rng.Uniform() < r - level) level += 1.0;
    out[i] = std::copysign(norm * level / levels, x[i]);
  }
}

void Natural(std::span<const double> x, RngStream& rng, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = std::abs(x[i]);
    if (m == 0.0) {
      out[i] = 0.0;
      continue;
    }
    int e = 0;
    std::frexp(m, &e);  // m = f * 2^e, f in [0.5, 1)
    const double low = std::ldexp(1.0, e - 1);
    double mag = low;
    if (m != low && rng.Uniform() < (m - low) / low) mag = 2.0 * low;
    out[i] = std::copysign(mag, x[i]);
  }
}

// Writes Q(x) into out (sized like x). For TopK/RandK-based contractions the
// kept index set is returned through `selected` when non-null.
void CompressInto(const CompressorSpec& spec, std::span<const double> x,
                  RngStream& rng, std::span<double> out,
                  std::vector<std::size_t>* selected) {
  const std::size_t d = x.size();
  switch (spec.kind()) {
    case CompressorKind::kIdentity:
      std::copy(x.begin(), x.end(), out.begin());
      if (selected) {
        selected->resize(d);
        std::iota(selected->begin(), selected->end(), 0);
      }
      return;
    case CompressorKind::kTopK:
    case CompressorKind::kRandK:
    case CompressorKind::kRandKUnbiased: {
      auto idx = spec.kind() == CompressorKind::kTopK ? TopKIndices(x, spec.k())
                                                      : RandKIndices(d, spec.k(), rng);
      const double scale = spec.kind() == CompressorKind::kRandKUnbiased
                               ? static_cast<double>(d) / static_cast<double>(spec.k())
                               : 1.0;
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t i : idx) out[i] = scale == 1.0 ? x[i] : scale * x[i];
      if (selected) *selected = std::move(idx);
      return;
    }
    case CompressorKind::kRandomDithering:
      Dither(x, spec.levels().value_or(std::sqrt(static_cast<double>(d))), rng, out);
      break;
    case CompressorKind::kNaturalCompression:
      Natural(x, rng, out);
      break;
    case CompressorKind::kScaledUnbiased: {
      CompressInto(spec.inner(), x, rng, out, nullptr);
      const double scale = 1.0 / (OmegaOf(spec.inner(), d) + 1.0);
      for (double& v : out) v *= scale;
      break;
    }
    case CompressorKind::kCompose: {
      Vec contracted(d);
      std::vector<std::size_t> support;
      CompressInto(spec.contraction(), x, rng, contracted, &support);
      if (support.empty()) {
        for (std::size_t i = 0; i < d; ++i)
          if (contracted[i] != 0.0) support.push_back(i);
      }
      std::fill(out.begin(), out.end(), 0.0);
      if (support.empty()) break;
      Vec restricted(support.size());
      for (std::size_t j = 0; j < support.size(); ++j) restricted[j] = contracted[support[j]];
      Vec quantized(support.size());
      CompressInto(spec.inner(), restricted, rng, quantized, nullptr);
      const double scale = 1.0 / (OmegaOf(spec.inner(), support.size()) + 1.0);
      for (std::size_t j = 0; j < support.size(); ++j) out[support[j]] = scale * quantized[j];
      break;
    }
  }
  if (selected) selected->clear();
}

std::size_t ParseCount(std::string_view arg, std::string_view whole) {
  std::size_t v = 0;
  auto res = std::from_chars(arg.data(), arg.data() + arg.size(), v);
  if (res.ec != std::errc() || res.ptr != arg.data() + arg.size() || v == 0)
    throw std::invalid_argument("bad compressor count in '" + std::string(whole) + "'");
  return v;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

CompressorSpec CompressorSpec::Identity() { return CompressorSpec(); }

CompressorSpec CompressorSpec::TopK(std::size_t k) {
  if (k == 0) throw std::invalid_argument("TopK requires K >= 1");
  CompressorSpec s;
  s.kind_ = CompressorKind::kTopK;
  s.k_ = k;
  return s;
}

CompressorSpec CompressorSpec::RandK(std::size_t k) {
  if (k == 0) throw std::invalid_argument("RandK requires K >= 1");
  CompressorSpec s;
  s.kind_ = CompressorKind::kRandK;
  s.k_ = k;
  return s;
}

CompressorSpec CompressorSpec::RandKUnbiased(std::size_t k) {
  CompressorSpec s = RandK(k);
  s.kind_ = CompressorKind::kRandKUnbiased;
  return s;
}

CompressorSpec CompressorSpec::RandomDithering(std::optional<double> levels) {
  if (levels && !(*levels > 0.0))
    throw std::invalid_argument("dithering level count must be positive");
  CompressorSpec s;
  s.kind_ = CompressorKind::kRandomDithering;
  s.levels_ = levels;
  return s;
}

CompressorSpec CompressorSpec::NaturalCompression() {
  CompressorSpec s;
  s.kind_ = CompressorKind::kNaturalCompression;
  return s;
}

CompressorSpec CompressorSpec::ScaledUnbiased(CompressorSpec inner) {
  if (!inner.IsUnbiased())
    throw std::invalid_argument("ScaledUnbiased needs an unbiased inner compressor, got " +
                                inner.ToString());
  CompressorSpec s;
  s.kind_ = CompressorKind::kScaledUnbiased;
  s.inner_ = Share(std::move(inner));
  return s;
}

CompressorSpec CompressorSpec::Compose(CompressorSpec unbiased, CompressorSpec contraction) {
  if (!unbiased.IsUnbiased())
    throw std::invalid_argument("Compose: first argument must be unbiased, got " +
                                unbiased.ToString());
  if (!contraction.IsContraction())
    throw std::invalid_argument("Compose: second argument must be a contraction, got " +
                                contraction.ToString());
  CompressorSpec s;
  s.kind_ = CompressorKind::kCompose;
  s.k_ = contraction.k_;
  s.inner_ = Share(std::move(unbiased));
  s.contraction_ = Share(std::move(contraction));
  return s;
}

CompressorSpec CompressorSpec::RTopK(std::size_t k) {
  return Compose(RandomDithering(), TopK(k));
}

CompressorSpec CompressorSpec::NTopK(std::size_t k) {
  return Compose(NaturalCompression(), TopK(k));
}

bool CompressorSpec::IsUnbiased() const {
  switch (kind_) {
    case CompressorKind::kIdentity:
    case CompressorKind::kRandKUnbiased:
    case CompressorKind::kRandomDithering:
    case CompressorKind::kNaturalCompression:
      return true;
    default:
      return false;
  }
}

bool CompressorSpec::IsContraction() const {
  switch (kind_) {
    case CompressorKind::kIdentity:
    case CompressorKind::kTopK:
    case CompressorKind::kRandK:
    case CompressorKind::kScaledUnbiased:
    case CompressorKind::kCompose:
      return true;
    default:
      return false;
  }
}

bool CompressorSpec::HasMeanScaling() const {
  return kind_ == CompressorKind::kIdentity || kind_ == CompressorKind::kRandK ||
         kind_ == CompressorKind::kScaledUnbiased;
}

bool CompressorSpec::IsDeterministic() const {
  return kind_ == CompressorKind::kIdentity || kind_ == CompressorKind::kTopK;
}

void CompressorSpec::Validate(std::size_t d) const {
  if (d == 0) throw std::invalid_argument("compressor dimension must be positive");
  switch (kind_) {
    case CompressorKind::kTopK:
    case CompressorKind::kRandK:
    case CompressorKind::kRandKUnbiased:
      if (k_ < 1 || k_ > d)
        throw std::invalid_argument("K=" + std::to_string(k_) + " out of range for d=" +
                                    std::to_string(d));
      break;
    case CompressorKind::kScaledUnbiased:
      inner_->Validate(d);
      OmegaOf(*inner_, d);
      break;
    case CompressorKind::kCompose: {
      contraction_->Validate(d);
      const std::size_t kept =
          contraction_->kind_ == CompressorKind::kTopK ||
                  contraction_->kind_ == CompressorKind::kRandK
              ? contraction_->k_
              : d;
      inner_->Validate(kept);
      OmegaOf(*inner_, kept);
      break;
    }
    default:
      break;
  }
}

bool operator==(const CompressorSpec& a, const CompressorSpec& b) {
  if (a.kind_ != b.kind_ || a.k_ != b.k_ || a.levels_ != b.levels_) return false;
  if ((a.inner_ == nullptr) != (b.inner_ == nullptr)) return false;
  if (a.inner_ && !(*a.inner_ == *b.inner_)) return false;
  if ((a.contraction_ == nullptr) != (b.contraction_ == nullptr)) return false;
  if (a.contraction_ && !(*a.contraction_ == *b.contraction_)) return false;
  return true;
}

std::string CompressorSpec::ToString() const {
  switch (kind_) {
    case CompressorKind::kIdentity:
      return "identity";
    case CompressorKind::kTopK:
      return "top_k:" + std::to_string(k_);
    case CompressorKind::kRandK:
      return "rand_k:" + std::to_string(k_);
    case CompressorKind::kRandKUnbiased:
      return "rand_k_unbiased:" + std::to_string(k_);
    case CompressorKind::kRandomDithering:
      return levels_ ? "unbiased_dither:" + FormatReal(*levels_) : "unbiased_dither";
    case CompressorKind::kNaturalCompression:
      return "unbiased_natural";
    case CompressorKind::kScaledUnbiased:
      if (inner_->kind_ == CompressorKind::kRandomDithering && !inner_->levels_)
        return "dither";
      if (inner_->kind_ == CompressorKind::kNaturalCompression) return "natural";
      return "scaled(" + inner_->ToString() + ")";
    case CompressorKind::kCompose:
      if (contraction_->kind_ == CompressorKind::kTopK) {
        if (inner_->kind_ == CompressorKind::kRandomDithering && !inner_->levels_)
          return "rtop_k:" + std::to_string(k_);
        if (inner_->kind_ == CompressorKind::kNaturalCompression)
          return "ntop_k:" + std::to_string(k_);
      }
      return "compose(" + inner_->ToString() + "," + contraction_->ToString() + ")";
  }
  return "identity";
}

CompressorSpec CompressorSpec::Parse(std::string_view text) {
  const std::string_view s = Trim(text);
  const auto paren = s.find('(');
  if (paren != std::string_view::npos) {
    if (s.back() != ')') throw std::invalid_argument("unbalanced compressor spec '" + std::string(s) + "'");
    const std::string_view head = Trim(s.substr(0, paren));
    const std::string_view body = s.substr(paren + 1, s.size() - paren - 2);
    if (head == "scaled") return ScaledUnbiased(Parse(body));
    if (head == "compose") {
      int depth = 0;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '(') ++depth;
        if (body[i] == ')') --depth;
        if (body[i] == ',' && depth == 0)
          return Compose(Parse(body.substr(0, i)), Parse(body.substr(i + 1)));
      }
      throw std::invalid_argument("compose(...) needs two arguments");
    }
    throw std::invalid_argument("unknown compressor '" + std::string(head) + "'");
  }
  const auto colon = s.find(':');
  const std::string_view name = colon == std::string_view::npos ? s : Trim(s.substr(0, colon));
  const std::string_view arg = colon == std::string_view::npos ? std::string_view() : Trim(s.substr(colon + 1));
  auto need_arg = [&] {
    if (arg.empty()) throw std::invalid_argument("compressor '" + std::string(name) + "' needs :K");
    return ParseCount(arg, s);
  };
  auto no_arg = [&] {
    if (!arg.empty()) throw std::invalid_argument("compressor '" + std::string(name) + "' takes no argument");
  };
  if (name == "identity" || name == "none") {
    no_arg();
    return Identity();
  }
  if (name == "top_k") return TopK(need_arg());
  if (name == "rand_k") return RandK(need_arg());
  if (name == "rand_k_unbiased") return RandKUnbiased(need_arg());
  if (name == "ntop_k") return NTopK(need_arg());
  if (name == "rtop_k") return RTopK(need_arg());
  if (name == "dither") {
    no_arg();
    return ScaledUnbiased(RandomDithering());
  }
  if (name == "natural") {
    no_arg();
    return ScaledUnbiased(NaturalCompression());
  }
  if (name == "unbiased_natural") {
    no_arg();
    return NaturalCompression();
  }
  if (name == "unbiased_dither") {
    if (arg.empty()) return RandomDithering();
    double levels = 0.0;
    auto res = std::from_chars(arg.data(), arg.data() + arg.size(), levels);
    if (res.ec != std::errc() || res.ptr != arg.data() + arg.size())
      throw std::invalid_argument("bad dithering level in '" + std::string(s) + "'");
    return RandomDithering(levels);
  }
  throw std::invalid_argument("unknown compressor '" + std::string(s) + "'");
}

int CeilLog2(std::size_t d) {
  int b = 0;
  std::size_t p = 1;
  while (p < d) {
    p <<= 1;
    ++b;
  }
  return b;
}

double OmegaOf(const CompressorSpec& spec, std::size_t dim) {
  switch (spec.kind()) {
    case CompressorKind::kIdentity:
      return 0.0;
    case CompressorKind::kRandKUnbiased:
      if (spec.k() > dim) throw std::invalid_argument("K exceeds dimension");
      return static_cast<double>(dim) / static_cast<double>(spec.k()) - 1.0;
    case CompressorKind::kNaturalCompression:
      return 1.0 / 8.0;
    case CompressorKind::kRandomDithering: {
      const double root = std::sqrt(static_cast<double>(dim));
      if (spec.levels() && std::abs(*spec.levels() - root) > 1e-12 * root)
        throw std::invalid_argument(
            "omega of dithering is only defined here for s = sqrt(dimension)");
      return 1.0;
    }
    default:
      throw std::invalid_argument("omega requested for non-unbiased compressor " +
                                  spec.ToString());
  }
}

double DeltaOf(const CompressorSpec& spec, std::size_t d) {
  switch (spec.kind()) {
    case CompressorKind::kIdentity:
      return 1.0;
    case CompressorKind::kTopK:
    case CompressorKind::kRandK:
      return static_cast<double>(spec.k()) / static_cast<double>(d);
    case CompressorKind::kScaledUnbiased:
      return 1.0 / (OmegaOf(spec.inner(), d) + 1.0);
    case CompressorKind::kCompose: {
      const CompressorSpec& c = spec.contraction();
      const std::size_t kept =
          c.kind() == CompressorKind::kTopK || c.kind() == CompressorKind::kRandK ? c.k() : d;
      return DeltaOf(c, d) / (OmegaOf(spec.inner(), kept) + 1.0);
    }
    default:
      throw std::invalid_argument("delta requested for non-contraction compressor " +
                                  spec.ToString());
  }
}

double BitCost(const CompressorSpec& spec, std::size_t d) {
  const double dd = static_cast<double>(d);
  const double index_bits = static_cast<double>(CeilLog2(d));
  switch (spec.kind()) {
    case CompressorKind::kIdentity:
      return 64.0 * dd;
    case CompressorKind::kTopK:
    case CompressorKind::kRandK:
    case CompressorKind::kRandKUnbiased:
      return (64.0 + index_bits) * static_cast<double>(spec.k());
    case CompressorKind::kRandomDithering:
      return 2.8 * dd + 64.0;
    case CompressorKind::kNaturalCompression:
      return 12.0 * dd;
    case CompressorKind::kScaledUnbiased:
      return BitCost(spec.inner(), d);
    case CompressorKind::kCompose: {
      const CompressorSpec& c = spec.contraction();
      if (c.kind() == CompressorKind::kTopK || c.kind() == CompressorKind::kRandK)
        return BitCost(spec.inner(), c.k()) + static_cast<double>(c.k()) * index_bits;
      return BitCost(spec.inner(), d);
    }
  }
  return 0.0;
}

CompressedVector Compress(const CompressorSpec& spec, std::span<const double> x,
                          RngStream& rng) {
  spec.Validate(x.size());
  CompressedVector out;
  out.values.assign(x.size(), 0.0);
  CompressInto(spec, x, rng, out.values, nullptr);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (out.values[i] != 0.0) out.support.push_back(i);
  out.nominal_bits = BitCost(spec, x.size());
  return out;
}

ContractionReport VerifyContraction(const CompressorSpec& spec, std::size_t d,
                                    std::size_t trials, RngStream& rng) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  spec.Validate(d);
  ContractionReport rep;
  rep.trials = trials;
  rep.bound = 1.0 - DeltaOf(spec, d);
  rep.deterministic = spec.IsDeterministic();
  Vec x(d), q(d);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (double& v : x) v = rng.Normal();
    CompressInto(spec, x, rng, q, nullptr);
    double err = 0.0;
    for (std::size_t i = 0; i < d; ++i) err += (x[i] - q[i]) * (x[i] - q[i]);
    const double ratio = err / SquaredNorm(x);
    sum += ratio;
    sum_sq += ratio * ratio;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  const double n = static_cast<double>(trials);
  rep.mean_ratio = sum / n;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - n * rep.mean_ratio * rep.mean_ratio) / (n - 1.0)) : 0.0;
  rep.std_error = std::sqrt(var / n);
  if (rep.deterministic) {
    rep.passed = rep.max_ratio <= rep.bound + 4.0 * std::numeric_limits<double>::epsilon();
  } else {
    rep.passed = rep.mean_ratio <= rep.bound + 3.0 * rep.std_error;
  }
  return rep;
}

namespace {

MomentReport EstimateMoments(const CompressorSpec& spec, std::span<const double> x,
                             std::span<const double> target, std::size_t trials,
                             RngStream& rng) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  spec.Validate(x.size());
  const std::size_t d = x.size();
  MomentReport rep;
  rep.trials = trials;
  Vec sum(d, 0.0), sum_sq(d, 0.0), q(d);
  double m2 = 0.0, m2_sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    CompressInto(spec, x, rng, q, nullptr);
    for (std::size_t i = 0; i < d; ++i) {
      sum[i] += q[i];
      sum_sq[i] += q[i] * q[i];
    }
    const double sq = SquaredNorm(q);
    m2 += sq;
    m2_sq += sq * sq;
  }
  const double n = static_cast<double>(trials);
  rep.mean.resize(d);
  rep.std_error.resize(d);
  rep.mean_ok = true;
  for (std::size_t i = 0; i < d; ++i) {
    const double mean = sum[i] / n;
    const double var = trials > 1 ? std::max(0.0, (sum_sq[i] - n * mean * mean) / (n - 1.0)) : 0.0;
    rep.mean[i] = mean;
    rep.std_error[i] = std::sqrt(var / n);
    const double dev = std::abs(mean - target[i]);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    // A coordinate with no observed spread must match exactly up to rounding.
    const double slack = 1e-12 * (1.0 + std::abs(target[i]));
    if (rep.std_error[i] > 0.0) {
      rep.max_z = std::max(rep.max_z, dev / rep.std_error[i]);
      if (dev > 3.0 * rep.std_error[i] + slack) rep.mean_ok = false;
    } else if (dev > slack) {
      rep.mean_ok = false;
    }
  }
  rep.second_moment = m2 / n;
  const double var2 = trials > 1 ? std::max(0.0, (m2_sq - n * rep.second_moment * rep.second_moment) / (n - 1.0)) : 0.0;
  rep.second_moment_se = std::sqrt(var2 / n);
  return rep;
}

}  // namespace

MomentReport VerifyMeanScaling(const CompressorSpec& spec, std::span<const double> x,
                               std::size_t trials, RngStream& rng) {
  if (!spec.HasMeanScaling())
    throw std::invalid_argument(spec.ToString() + " does not satisfy E[Q(x)] = delta x");
  const double delta = DeltaOf(spec, x.size());
  Vec target(x.begin(), x.end());
  for (double& v : target) v *= delta;
  MomentReport rep = EstimateMoments(spec, x, target, trials, rng);
  rep.second_moment_bound = SquaredNorm(x);
  rep.second_moment_ok = true;
  return rep;
}

MomentReport VerifyMeanScaling(const CompressorSpec& spec, std::size_t d,
                               std::size_t trials, RngStream& rng) {
  Vec x(d);
  for (double& v : x) v = rng.Normal();
  return VerifyMeanScaling(spec, x, trials, rng);
}

MomentReport VerifyUnbiased(const CompressorSpec& spec, std::span<const double> x,
                            std::size_t trials, RngStream& rng) {
  if (!spec.IsUnbiased())
    throw std::invalid_argument(spec.ToString() + " is not an unbiased compressor");
  MomentReport rep = EstimateMoments(spec, x, x, trials, rng);
  rep.second_moment_bound = (OmegaOf(spec, x.size()) + 1.0) * SquaredNorm(x);
  rep.second_moment_ok = rep.second_moment <= rep.second_moment_bound + 3.0 * rep.second_moment_se;
  return rep;
}

}  // namespace ecvr
