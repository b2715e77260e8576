// Copyright 2026 The LPPM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "lppm/samplers.h"

namespace lppm {

absl::StatusOr<double> LambertWm1(double v) {
  constexpr double kBranchPoint = -1.0 / std::numbers::e;
  if (!(v >= kBranchPoint && v < 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("W_{-1} is defined on [-1/e, 0); got %.17g", v));
  }
  if (v == kBranchPoint) return -1.0;

  // Initial guess: series at the branch point or the asymptotic form at 0-.
  const double q = 1.0 + std::numbers::e * v;
  double w;
  if (q < 0.25) {
    const double p = -std::sqrt(2.0 * q);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-v);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }

  // Halley refinement on f(w) = w e^w - v.
  for (int i = 0; i < 100; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - v;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    double next = w - f / denom;
    if (next > -1.0) next = 0.5 * (w - 1.0);  // stay on the lower branch
    const double step = std::abs(next - w);
    w = next;
    if (step <= 4e-16 * std::abs(w)) break;
  }
  return w;
}

}  // namespace lppm
