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

#ifndef LPPM_MONTE_CARLO_H_
#define LPPM_MONTE_CARLO_H_

#include <cstdint>
#include <limits>

#include "absl/status/statusor.h"
#include "lppm/geo.h"
#include "lppm/metrics.h"
#include "lppm/model.h"
#include "lppm/remap.h"
#include "lppm/samplers.h"

namespace lppm {

enum class RemapMode { kNone, kOptimal, kConstrained };

struct McConfig {
  int64_t samples = 5000;
  uint64_t seed = 1;
  RemapMode remap = RemapMode::kNone;
  // Worst-case bound for RemapMode::kConstrained.
  double q_max = std::numeric_limits<double>::infinity();
  EstimateSpace space = EstimateSpace::Plane();
  WeiszfeldConfig weiszfeld;
};

// Estimates the metrics of a sampler-based mechanism. Each sample draws
// x ~ prior and a raw z, computes p(x|z) over the POIs from the sampler
// density and, depending on `remap`, moves z to z'.
//   q_avg: mean dq(x, z').
//   p_ae:  mean dp(x, z') under optimal remap with dp == dq; otherwise the
//          mean dp(x, xhat) for the Bayes estimate xhat of p(.|z).
//   p_ce:  mean entropy of p(.|z) in bits.
//   q_wc:  the declared support bound (radius, twice the radius after an
//          optimal remap, at most q_max after a constrained one).
//   p_gi:  the sampler's analytic level.
// The worst-case output metrics are left uncomputed. Same seed, same report.
absl::StatusOr<MetricReport> McEvaluate(const NoiseSampler& sampler,
                                        const Prior& prior,
                                        const DistanceFn& dq,
                                        const DistanceFn& dp,
                                        const McConfig& config);

}  // namespace lppm

#endif  // LPPM_MONTE_CARLO_H_
