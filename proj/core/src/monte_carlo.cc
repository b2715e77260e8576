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

#include "lppm/monte_carlo.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace lppm {
namespace {

// Welford running mean and variance.
class Moments {
 public:
  void Add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / n_;
    m2_ += delta * (v - mean_);
  }
  double mean() const { return mean_; }
  double standard_error() const {
    return n_ > 1 ? std::sqrt(m2_ / (n_ - 1) / n_) : 0.0;
  }

 private:
  int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

absl::StatusOr<MetricReport> McEvaluate(const NoiseSampler& sampler,
                                        const Prior& prior,
                                        const DistanceFn& dq,
                                        const DistanceFn& dp,
                                        const McConfig& config) {
  if (config.samples < 1) {
    return absl::InvalidArgumentError("sample count must be >= 1");
  }
  if (config.remap == RemapMode::kConstrained && !(config.q_max > 0.0)) {
    return absl::InvalidArgumentError("constrained remap needs q_max > 0");
  }
  const PoiSet& poi = prior.poi();
  const int n = poi.size();
  const std::vector<Location> locations = poi.Locations();
  const double support = sampler.SupportRadius();
  const bool same_metric = SameDistance(dp, dq);

  Rng rng(config.seed);
  std::discrete_distribution<int> pick(prior.mass().begin(),
                                       prior.mass().end());
  std::vector<double> loglik(n);
  Moments q, ae, ce;
  for (int64_t s = 0; s < config.samples; ++s) {
    const int x = pick(rng);
    absl::StatusOr<PlanePoint> raw = sampler.Draw(poi.point(x), rng);
    if (!raw.ok()) return raw.status();
    const Location z{*raw};

    // Bounded noise: inputs farther than the support radius have zero
    // likelihood, so the density is only evaluated inside it.
    for (int i = 0; i < n; ++i) {
      loglik[i] = std::isfinite(support) &&
                          EuclideanKm(poi.point(i), *raw) > support
                      ? -std::numeric_limits<double>::infinity()
                      : sampler.LogDensity(*raw, poi.point(i));
    }
    absl::StatusOr<Posterior> post = PosteriorFromLogLikelihood(prior, loglik);
    if (!post.ok()) return post.status();

    Location final_z = z;
    if (config.remap == RemapMode::kOptimal) {
      absl::StatusOr<WeightedMinimum> best = MinimizeWeightedDistance(
          locations, post->mass, dq, config.space, config.weiszfeld);
      if (!best.ok()) return best.status();
      final_z = best->location;
    } else if (config.remap == RemapMode::kConstrained) {
      absl::StatusOr<ConstrainedTarget> t = ConstrainedRemapTarget(
          locations, post->mass, z, dq, config.q_max, config.weiszfeld);
      if (!t.ok()) return t.status();
      final_z = t->location;
    }

    absl::StatusOr<double> loss = dq(locations[x], final_z);
    if (!loss.ok()) return loss.status();
    q.Add(*loss);

    double error;
    if (config.remap == RemapMode::kOptimal && same_metric) {
      error = *loss;
    } else {
      absl::StatusOr<Location> xhat =
          AdversaryEstimate(*post, poi, dp, config.space, config.weiszfeld);
      if (!xhat.ok()) return xhat.status();
      absl::StatusOr<double> d = dp(locations[x], *xhat);
      if (!d.ok()) return d.status();
      error = *d;
    }
    ae.Add(error);
    ce.Add(EntropyBits(post->mass));
  }

  MetricReport r;
  r.monte_carlo = true;
  r.samples = config.samples;
  r.q_avg = q.mean();
  r.p_ae = ae.mean();
  r.p_ce = ce.mean();
  r.q_avg_se = q.standard_error();
  r.p_ae_se = ae.standard_error();
  r.p_ce_se = ce.standard_error();
  switch (config.remap) {
    case RemapMode::kNone:
      r.q_wc = support;
      break;
    case RemapMode::kOptimal:
      r.q_wc = 2.0 * support;
      break;
    case RemapMode::kConstrained:
      r.q_wc = std::min(config.q_max, 2.0 * support);
      break;
  }
  r.p_gi = sampler.GeoIndLevel();
  return r;
}

}  // namespace lppm
