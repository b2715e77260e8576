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

#ifndef LPPM_REMAP_H_
#define LPPM_REMAP_H_

#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "lppm/geo.h"
#include "lppm/model.h"

namespace lppm {

struct WeiszfeldConfig {
  int max_iterations = 1000;
  double tolerance_km = 1e-6;
  // An iterate closer than this to a data point is treated as sitting on it.
  double singularity_epsilon_km = 1e-9;
};

struct WeiszfeldResult {
  PlanePoint point;
  double objective = 0.0;  // sum_i w_i |point - p_i|
  int iterations = 0;
  bool converged = false;
};

// Weiszfeld iteration for the weighted geometric median. When an iterate
// lands on a data point, the subgradient test decides whether that point is
// the minimizer; otherwise the Vardi-Zhang step moves off it along the
// descent direction. The final iterate is snapped to the nearest data point
// when that point satisfies the optimality test. Zero weights are ignored.
absl::StatusOr<WeiszfeldResult> RunWeiszfeld(absl::Span<const PlanePoint> points,
                                             absl::Span<const double> weights,
                                             const WeiszfeldConfig& cfg = {});

// Like RunWeiszfeld, but non-convergence is an error whose message carries
// the best iterate.
absl::StatusOr<PlanePoint> GeometricMedian(absl::Span<const PlanePoint> points,
                                           absl::Span<const double> weights,
                                           const WeiszfeldConfig& cfg = {});

// Where estimates and remap targets may be placed: anywhere in the plane, or
// only at an explicit list of candidate locations.
struct EstimateSpace {
  static EstimateSpace Plane() { return {}; }
  static EstimateSpace Candidates(std::vector<Location> candidates) {
    return {true, std::move(candidates)};
  }

  bool candidate_set = false;
  std::vector<Location> candidates;
};

struct WeightedMinimum {
  Location location;
  double objective = 0.0;  // sum_i w_i d(p_i, location)
};

// argmin over the space of sum_i w_i d(p_i, c). Euclidean over the plane uses
// Weiszfeld, SquaredEuclidean the weighted mean; candidate sets are scanned
// exhaustively with ties going to the lowest index. TagHamming over the
// plane is rejected.
absl::StatusOr<WeightedMinimum> MinimizeWeightedDistance(
    absl::Span<const Location> points, absl::Span<const double> weights,
    const DistanceFn& d, const EstimateSpace& space,
    const WeiszfeldConfig& cfg = {});

struct RemapPlan {
  std::vector<Location> targets;  // r(z), one per output
  std::vector<bool> feasible;     // false where constrained mode kept z
};

// r(z) = argmin_z' sum_x prior(x) f[z|x] dq(x, z'). Outputs with zero
// marginal keep their location.
absl::StatusOr<RemapPlan> PlanOptimalRemap(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dq,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

absl::StatusOr<DiscreteMechanism> OptimalRemap(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dq,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

// Single-observation form of the constrained remap: weighted posterior
// support points, the raw output `z`, and the worst-case bound. Candidates
// are the unconstrained optimum, the feasible point on the segment from z
// towards it, z itself and the support points; the best feasible one wins.
// `feasible` is false when nothing (not even z) satisfies the bound, in
// which case z is returned.
struct ConstrainedTarget {
  Location location;
  bool feasible = true;
};
absl::StatusOr<ConstrainedTarget> ConstrainedRemapTarget(
    absl::Span<const Location> points, absl::Span<const double> weights,
    const Location& z, const DistanceFn& dq, double q_max,
    const WeiszfeldConfig& cfg = {});

// Optimal remap restricted to targets z' with dq(x, z') <= q_max for every
// x in the posterior support of z. Expects a mechanism that already has
// q_wc <= q_max.
absl::StatusOr<RemapPlan> PlanConstrainedRemap(const DiscreteMechanism& m,
                                               const Prior& prior,
                                               const DistanceFn& dq,
                                               double q_max,
                                               const WeiszfeldConfig& cfg = {});

absl::StatusOr<DiscreteMechanism> ConstrainedRemap(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dq,
    double q_max, const WeiszfeldConfig& cfg = {});

}  // namespace lppm

#endif  // LPPM_REMAP_H_
