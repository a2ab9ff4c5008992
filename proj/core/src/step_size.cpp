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

#include "ecvr/step_size.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecvr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// num / sqrt(radicand), +inf when the radicand vanishes.
double OverRoot(double num, double radicand) {
  return radicand > 0.0 ? num / std::sqrt(radicand) : kInf;
}

void CheckUnit(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in (0, 1]");
}

}  // namespace

LsvrgRegime ParseLsvrgRegime(const std::string& s) {
  if (s == "composite") return LsvrgRegime::kComposite;
  if (s == "composite_A1") return LsvrgRegime::kCompositeMeanScaled;
  if (s == "smooth") return LsvrgRegime::kSmooth;
  if (s == "smooth_A1") return LsvrgRegime::kSmoothMeanScaled;
  throw std::invalid_argument("unknown regime '" + s + "'");
}

double TheoreticalEta(const ProblemConstants& c, std::size_t nodes, double delta,
                      double delta1, double p, LsvrgRegime regime) {
  CheckUnit(delta, "delta");
  CheckUnit(delta1, "delta1");
  CheckUnit(p, "p");
  const double n = static_cast<double>(nodes);
  const double one_minus = 1.0 - delta;
  const double refresh = 1.0 + 2.0 * p / delta1;

  switch (regime) {
    case LsvrgRegime::kComposite: {
      const double bracket = 4.0 * c.L_bar / delta + c.L +
                             16.0 * c.L_bar * p / (delta * delta1) * refresh;
      return 1.0 / (105.0 * one_minus / delta * bracket + 4.0 * c.L_f + 42.0 * c.L / n);
    }
    case LsvrgRegime::kCompositeMeanScaled: {
      const double bracket = 418.0 * c.L_f / delta + 3422.0 * c.L_bar / (delta * n) +
                             1349.0 * c.L / n +
                             (1671.0 * c.L_f + 20364.0 * c.L_bar / n) * p /
                                 (delta * delta1) * refresh;
      return 1.0 / (one_minus / delta * bracket + 4.0 * c.L_f + 42.0 * c.L / n);
    }
    case LsvrgRegime::kSmooth:
      return std::min({1.0 / (4.0 * c.L_f + 33.0 * c.L / n),
                       OverRoot(delta / 60.0, one_minus * c.L_f * c.L_bar),
                       OverRoot(std::sqrt(delta) / 64.0, one_minus * c.L_f * c.L),
                       OverRoot(delta * std::sqrt(delta1) / 120.0,
                                one_minus * c.L_f * c.L_bar * p * refresh)});
    case LsvrgRegime::kSmoothMeanScaled:
      return std::min({1.0 / (4.0 * c.L_f + 33.0 * c.L / n),
                       OverRoot(delta / 60.0, one_minus * c.L_f * c.L_f),
                       OverRoot(std::sqrt(n * delta) / 229.0, one_minus * c.L_f * c.L),
                       OverRoot(std::sqrt(n) * delta / 360.0, one_minus * c.L_f * c.L_bar),
                       OverRoot(delta * std::sqrt(delta1) / 120.0,
                                one_minus * p * c.L_f * (c.L_f + 12.0 * c.L_bar / n) *
                                    refresh)});
  }
  return 0.0;
}

double TheoreticalTheta(const ProblemConstants& c, double delta, std::size_t per_node,
                        std::size_t nodes, double lambda, double gamma, bool mean_scaled) {
  CheckUnit(delta, "delta");
  const double m = static_cast<double>(per_node);
  const double n = static_cast<double>(nodes);
  const double big_n = m * n;
  const double p = 1.0 / m;
  const double r_max_sq = c.r_max * c.r_max;
  const double v = r_max_sq + n * c.r_sq;
  const double lg = lambda * gamma;

  if (delta == 1.0) return big_n * lg * p / (v + big_n * lg);

  const double a = mean_scaled ? (1.0 - delta) * (2.0 * c.r_sq + 16.0 * c.r_bar_sq / n +
                                                  9.0 * delta * r_max_sq / n)
                               : (1.0 - delta) * (2.0 * c.r_bar_sq + delta * r_max_sq);
  const double dlg = delta * lg;
  const double first = 2.0 * dlg / (dlg * m + std::sqrt(dlg * dlg * m * m + 48.0 * lg * a));
  const double second = big_n * lg * p / (3.0 * v + big_n * lg);
  const double third = dlg / (dlg * m + 12.0 * std::sqrt(c.r_sq) * std::sqrt(a));
  return std::min({first, second, third});
}

double DualAveragingRate(double theta, double delta) { return std::min(theta, delta / 4.0); }

}  // namespace ecvr
