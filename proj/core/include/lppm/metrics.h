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

#ifndef LPPM_METRICS_H_
#define LPPM_METRICS_H_

#include <cstdint>
#include <limits>
#include <string>

#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "lppm/geo.h"
#include "lppm/model.h"
#include "lppm/remap.h"

namespace lppm {

inline constexpr double kNotComputed = std::numeric_limits<double>::quiet_NaN();

// One evaluation of a mechanism. Distances are in km (or the distance
// function's own units), entropies in bits. p_gi is 1/epsilon in km, +inf
// for perfect indistinguishability, 0 when no finite epsilon exists and NaN
// when not computed. For Monte Carlo reports the *_se fields carry standard
// errors; they are NaN for exact reports.
struct MetricReport {
  double q_avg = kNotComputed;
  double q_wc = kNotComputed;
  double p_ae = kNotComputed;
  double p_ce = kNotComputed;
  double p_gi = kNotComputed;
  double p_wc_ae = kNotComputed;
  double p_wc_ce = kNotComputed;

  bool monte_carlo = false;
  int64_t samples = 0;
  double q_avg_se = kNotComputed;
  double p_ae_se = kNotComputed;
  double p_ce_se = kNotComputed;
};

// "exact" or "mc(n=...;se_q_avg=...;se_p_ae=...;se_p_ce=...)". Never
// contains a comma.
std::string ProvenanceString(const MetricReport& r);

// Shannon entropy in bits; entries below kProbabilityFloor count as zero.
double EntropyBits(absl::Span<const double> p);

// sum_x sum_z prior(x) f[z|x] dq(x, z).
absl::StatusOr<double> AverageQualityLoss(const DiscreteMechanism& m,
                                          const Prior& prior,
                                          const DistanceFn& dq);

// max dq(x, z) over prior(x) > 0 and f[z|x] > 0.
absl::StatusOr<double> WorstCaseQualityLoss(const DiscreteMechanism& m,
                                            const Prior& prior,
                                            const DistanceFn& dq);

// sum_z min_xhat sum_x prior(x) f[z|x] dp(x, xhat).
absl::StatusOr<double> AverageAdversaryError(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dp,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

// Bayes-optimal estimate under dp for a posterior over `poi`.
absl::StatusOr<Location> AdversaryEstimate(
    const Posterior& posterior, const PoiSet& poi, const DistanceFn& dp,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

// sum_z P_Z(z) H(X | Z = z), in bits.
absl::StatusOr<double> ConditionalEntropy(const DiscreteMechanism& m,
                                          const Prior& prior);

// I(X; Z) in bits, computed directly from the joint distribution.
absl::StatusOr<double> MutualInformation(const DiscreteMechanism& m,
                                         const Prior& prior);

// inf over x != x', z of dp(x, x') / |ln(f[z|x] / f[z|x'])|, with
// ln(0/0) = 0. Returns 0 when some column is zero for exactly one of a pair
// and +inf when every column is constant.
absl::StatusOr<double> GeoIndistinguishability(
    const DiscreteMechanism& m, const DistanceFn& dp = DistanceFn::Euclidean());

struct RelaxedGeoIndResult {
  bool pass = true;
  // Largest f[z|x] - e^{eps d(x,x')} f[z|x'] - delta found, with its triple.
  double worst_excess = -std::numeric_limits<double>::infinity();
  int x = -1;
  int x_prime = -1;
  int z = -1;
};

// Checks f[z|x] <= e^{epsilon dp(x,x')} f[z|x'] + delta per output atom.
// `relative_slack` absorbs rounding in the right-hand side.
absl::StatusOr<RelaxedGeoIndResult> CheckRelaxedGeoInd(
    const DiscreteMechanism& m, double epsilon, double delta,
    const DistanceFn& dp = DistanceFn::Euclidean(),
    double relative_slack = 1e-12);

// Posterior expected adversary error in the most exposed output.
absl::StatusOr<double> WorstCaseOutputAdversaryError(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dp,
    const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

// min over outputs with P_Z(z) > 0 of H(X | Z = z), in bits.
absl::StatusOr<double> WorstCaseOutputConditionalEntropy(
    const DiscreteMechanism& m, const Prior& prior);

// Every exact metric; p_gi always uses the Euclidean distance.
absl::StatusOr<MetricReport> EvaluateMechanism(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dq,
    const DistanceFn& dp, const EstimateSpace& space = EstimateSpace::Plane(),
    const WeiszfeldConfig& cfg = {});

}  // namespace lppm

#endif  // LPPM_METRICS_H_
