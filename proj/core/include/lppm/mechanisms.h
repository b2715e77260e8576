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

#ifndef LPPM_MECHANISMS_H_
#define LPPM_MECHANISMS_H_

#include <limits>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "lppm/geo.h"
#include "lppm/model.h"
#include "lppm/remap.h"

namespace lppm {

// The loss-minimizing constant report and its average loss.
struct ConstantOutput {
  Location z_star;
  double q_star = 0.0;
};

// z* = argmin_z sum_x prior(x) dq(x, z): the geometric median of the prior
// for Euclidean loss, its mean for squared Euclidean loss.
absl::StatusOr<ConstantOutput> OptimalConstantOutput(
    const Prior& prior, const DistanceFn& dq,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

struct CoinParams {
  double q_target = 0.0;
  double alpha = 1.0;  // probability of reporting the true location
  Location z_star;
  double q_star = 0.0;
};

// Fails unless 0 <= q_target <= q_star.
absl::StatusOr<CoinParams> MakeCoinParams(
    const Prior& prior, const DistanceFn& dq, double q_target,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

// f[z|x] = alpha 1{z = x} + (1 - alpha) 1{z = z*}. Outputs are the POIs
// followed by z* unless z* is itself a POI.
absl::StatusOr<DiscreteMechanism> BuildCoin(const Prior& prior,
                                            const CoinParams& params);
absl::StatusOr<DiscreteMechanism> BuildCoin(
    const Prior& prior, const DistanceFn& dq, double q_target,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

// Row-normalized kernel f[z|x] proportional to exp(-b dq(x, z)); b = 0
// gives uniform rows.
absl::StatusOr<DiscreteMechanism> BuildExponential(PoiSetPtr poi,
                                                   std::vector<Location> outputs,
                                                   const DistanceFn& dq,
                                                   double b);

struct BaParams {
  double b = 1.0;  // 1/km
  double convergence_threshold = 1e-9;
  int max_iterations = 100000;
  // Outputs farther than this from an input get zero kernel weight, so the
  // iteration itself respects a worst-case loss bound.
  double q_max = std::numeric_limits<double>::infinity();
  // Fill BaTrace::lagrangian (one evaluation per iteration).
  bool record_lagrangian = false;
  // Squared extrapolation of the output marginal between plain updates,
  // kept only when it lowers the Lagrangian. Off gives the plain iteration.
  bool extrapolate = true;
};

struct BaTrace {
  Matrix matrix;  // last iterate, before any remapping
  int iterations = 0;
  bool converged = false;
  // Rate-distortion Lagrangian I(X;Z) [nats] + b * q_avg after each iterate,
  // when requested.
  std::vector<double> lagrangian;
};

// One Blahut-Arimoto update: P_Z from `f`, then f'[z|x] proportional to
// P_Z(z) exp(-b d(x, z)). Marginals below kProbabilityFloor are dropped,
// which zeroes their whole column. Infinite distances get zero weight.
Matrix BlahutArimotoUpdate(const Prior& prior, const Matrix& distances,
                           double b, const Matrix& f);

double RateDistortionLagrangian(const Prior& prior, const Matrix& distances,
                                double b, const Matrix& f);

// Iterates from the uniform mechanism (or `warm_start`) until the largest
// entry change of one plain update drops below the threshold. Fails when some input has no
// output within params.q_max. Columns that are zero in a warm
// start stay zero. Hitting max_iterations is reported through
// `converged = false`, not as an error.
absl::StatusOr<BaTrace> RunBlahutArimoto(
    const Prior& prior, const std::vector<Location>& outputs,
    const DistanceFn& dq, const BaParams& params,
    const std::optional<Matrix>& warm_start = std::nullopt);

// Converged Blahut-Arimoto matrix without the final remap.
absl::StatusOr<DiscreteMechanism> BuildBaUnremapped(
    const Prior& prior, const std::vector<Location>& outputs,
    const DistanceFn& dq, const BaParams& params);

// Blahut-Arimoto followed by the optimal remap over `space`.
absl::StatusOr<DiscreteMechanism> BuildBa(
    const Prior& prior, const std::vector<Location>& outputs,
    const DistanceFn& dq, const BaParams& params,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

struct BaTuning {
  BaParams params;
  double q_avg = 0.0;  // achieved average loss of the remapped mechanism
  int evaluations = 0;
};

// Bisection on log b so that the remapped mechanism's average loss is
// within `relative_tolerance` of q_target. Fails when q_target lies outside
// [q_avg(b_hi), q_avg(b_lo)].
absl::StatusOr<BaTuning> TuneBaB(const Prior& prior,
                                 const std::vector<Location>& outputs,
                                 const DistanceFn& dq, double q_target,
                                 double b_lo, double b_hi,
                                 const BaParams& base = {},
                                 const EstimateSpace& space =
                                     EstimateSpace::Plane(),
                                 double relative_tolerance = 0.01,
                                 const WeiszfeldConfig& cfg = {});

}  // namespace lppm

#endif  // LPPM_MECHANISMS_H_
