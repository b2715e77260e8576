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

#include "lppm/metrics.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace lppm {

std::string ProvenanceString(const MetricReport& r) {
  if (!r.monte_carlo) return "exact";
  return absl::StrFormat("mc(n=%d;se_q_avg=%.6g;se_p_ae=%.6g;se_p_ce=%.6g)",
                         r.samples, r.q_avg_se, r.p_ae_se, r.p_ce_se);
}

double EntropyBits(absl::Span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v >= kProbabilityFloor) h -= v * std::log2(v);
  }
  return h;
}

absl::StatusOr<double> AverageQualityLoss(const DiscreteMechanism& m,
                                          const Prior& prior,
                                          const DistanceFn& dq) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  absl::StatusOr<Matrix> d = DistanceMatrix(dq, m.inputs(), m.outputs());
  if (!d.ok()) return d.status();
  double sum = 0.0;
  for (int x = 0; x < m.num_inputs(); ++x) {
    double row = 0.0;
    for (int z = 0; z < m.num_outputs(); ++z) row += m(x, z) * (*d)(x, z);
    sum += prior[x] * row;
  }
  return sum;
}

absl::StatusOr<double> WorstCaseQualityLoss(const DiscreteMechanism& m,
                                            const Prior& prior,
                                            const DistanceFn& dq) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  double worst = 0.0;
  for (int x = 0; x < m.num_inputs(); ++x) {
    if (prior[x] <= 0.0) continue;
    for (int z = 0; z < m.num_outputs(); ++z) {
      if (m(x, z) <= 0.0) continue;
      absl::StatusOr<double> v = dq(m.inputs().location(x), m.outputs()[z]);
      if (!v.ok()) return v.status();
      worst = std::max(worst, *v);
    }
  }
  return worst;
}

namespace {

struct ColumnWeights {
  std::vector<Location> points;
  std::vector<double> weights;
  double mass = 0.0;
};

ColumnWeights Column(const DiscreteMechanism& m, const Prior& prior, int z) {
  ColumnWeights c;
  for (int x = 0; x < m.num_inputs(); ++x) {
    const double w = prior[x] * m(x, z);
    if (w > 0.0) {
      c.points.push_back(m.inputs().location(x));
      c.weights.push_back(w);
      c.mass += w;
    }
  }
  return c;
}

// Entropy of the posterior of one output column.
double ColumnEntropy(const ColumnWeights& c) {
  double h = 0.0;
  for (double w : c.weights) {
    const double p = w / c.mass;
    if (p >= kProbabilityFloor) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

absl::StatusOr<double> AverageAdversaryError(const DiscreteMechanism& m,
                                             const Prior& prior,
                                             const DistanceFn& dp,
                                             const EstimateSpace& space,
                                             const WeiszfeldConfig& cfg) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  double sum = 0.0;
  for (int z = 0; z < m.num_outputs(); ++z) {
    ColumnWeights c = Column(m, prior, z);
    if (c.points.empty()) continue;
    absl::StatusOr<WeightedMinimum> best =
        MinimizeWeightedDistance(c.points, c.weights, dp, space, cfg);
    if (!best.ok()) return best.status();
    sum += best->objective;
  }
  return sum;
}

absl::StatusOr<Location> AdversaryEstimate(const Posterior& posterior,
                                           const PoiSet& poi,
                                           const DistanceFn& dp,
                                           const EstimateSpace& space,
                                           const WeiszfeldConfig& cfg) {
  if (static_cast<int>(posterior.mass.size()) != poi.size()) {
    return absl::InvalidArgumentError("posterior size does not match POIs");
  }
  std::vector<Location> points;
  std::vector<double> weights;
  for (int x = 0; x < poi.size(); ++x) {
    if (posterior.mass[x] > 0.0) {
      points.push_back(poi.location(x));
      weights.push_back(posterior.mass[x]);
    }
  }
  absl::StatusOr<WeightedMinimum> best =
      MinimizeWeightedDistance(points, weights, dp, space, cfg);
  if (!best.ok()) return best.status();
  return best->location;
}

absl::StatusOr<double> ConditionalEntropy(const DiscreteMechanism& m,
                                          const Prior& prior) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  double sum = 0.0;
  for (int z = 0; z < m.num_outputs(); ++z) {
    ColumnWeights c = Column(m, prior, z);
    if (c.mass <= 0.0) continue;
    sum += c.mass * ColumnEntropy(c);
  }
  return sum;
}

absl::StatusOr<double> MutualInformation(const DiscreteMechanism& m,
                                         const Prior& prior) {
  absl::StatusOr<std::vector<double>> pz = OutputMarginal(m, prior);
  if (!pz.ok()) return pz.status();
  double mi = 0.0;
  for (int x = 0; x < m.num_inputs(); ++x) {
    for (int z = 0; z < m.num_outputs(); ++z) {
      const double joint = prior[x] * m(x, z);
      if (joint <= 0.0) continue;
      mi += joint * std::log2(joint / (prior[x] * (*pz)[z]));
    }
  }
  return mi;
}

absl::StatusOr<double> GeoIndistinguishability(const DiscreteMechanism& m,
                                               const DistanceFn& dp) {
  double best = std::numeric_limits<double>::infinity();
  const int n = m.num_inputs();
  for (int x = 0; x < n; ++x) {
    for (int xp = x + 1; xp < n; ++xp) {
      absl::StatusOr<double> d =
          dp(m.inputs().location(x), m.inputs().location(xp));
      if (!d.ok()) return d.status();
      for (int z = 0; z < m.num_outputs(); ++z) {
        const double a = m(x, z);
        const double b = m(xp, z);
        if (a == 0.0 && b == 0.0) continue;
        if (a == 0.0 || b == 0.0) return 0.0;
        const double ratio = std::abs(std::log(a / b));
        if (ratio == 0.0) continue;
        best = std::min(best, *d / ratio);
      }
    }
  }
  return best;
}

absl::StatusOr<RelaxedGeoIndResult> CheckRelaxedGeoInd(
    const DiscreteMechanism& m, double epsilon, double delta,
    const DistanceFn& dp, double relative_slack) {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    return absl::InvalidArgumentError("delta must be in [0, 1]");
  }
  if (!(epsilon >= 0.0)) return absl::InvalidArgumentError("epsilon < 0");
  RelaxedGeoIndResult out;
  const int n = m.num_inputs();
  for (int x = 0; x < n; ++x) {
    for (int xp = 0; xp < n; ++xp) {
      if (x == xp) continue;
      absl::StatusOr<double> d =
          dp(m.inputs().location(x), m.inputs().location(xp));
      if (!d.ok()) return d.status();
      const double factor = std::exp(epsilon * *d) * (1.0 + relative_slack);
      for (int z = 0; z < m.num_outputs(); ++z) {
        const double excess = m(x, z) - factor * m(xp, z) - delta;
        if (excess > out.worst_excess) {
          out.worst_excess = excess;
          out.x = x;
          out.x_prime = xp;
          out.z = z;
        }
      }
    }
  }
  out.pass = out.worst_excess <= 0.0;
  return out;
}

absl::StatusOr<double> WorstCaseOutputAdversaryError(
    const DiscreteMechanism& m, const Prior& prior, const DistanceFn& dp,
    const EstimateSpace& space, const WeiszfeldConfig& cfg) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  double worst = std::numeric_limits<double>::infinity();
  for (int z = 0; z < m.num_outputs(); ++z) {
    ColumnWeights c = Column(m, prior, z);
    if (c.mass <= 0.0) continue;
    absl::StatusOr<WeightedMinimum> best =
        MinimizeWeightedDistance(c.points, c.weights, dp, space, cfg);
    if (!best.ok()) return best.status();
    worst = std::min(worst, best->objective / c.mass);
  }
  return worst;
}

absl::StatusOr<double> WorstCaseOutputConditionalEntropy(
    const DiscreteMechanism& m, const Prior& prior) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  double worst = std::numeric_limits<double>::infinity();
  for (int z = 0; z < m.num_outputs(); ++z) {
    ColumnWeights c = Column(m, prior, z);
    if (c.mass <= 0.0) continue;
    worst = std::min(worst, ColumnEntropy(c));
  }
  return worst;
}

absl::StatusOr<MetricReport> EvaluateMechanism(const DiscreteMechanism& m,
                                               const Prior& prior,
                                               const DistanceFn& dq,
                                               const DistanceFn& dp,
                                               const EstimateSpace& space,
                                               const WeiszfeldConfig& cfg) {
  MetricReport r;
#define LPPM_ASSIGN(field, expr)                      \
  {                                                  \
    absl::StatusOr<double> v = (expr);               \
    if (!v.ok()) return v.status();                  \
    r.field = *v;                                    \
  }
  LPPM_ASSIGN(q_avg, AverageQualityLoss(m, prior, dq));
  LPPM_ASSIGN(q_wc, WorstCaseQualityLoss(m, prior, dq));
  LPPM_ASSIGN(p_ae, AverageAdversaryError(m, prior, dp, space, cfg));
  LPPM_ASSIGN(p_ce, ConditionalEntropy(m, prior));
  LPPM_ASSIGN(p_gi, GeoIndistinguishability(m));
  LPPM_ASSIGN(p_wc_ae,
              WorstCaseOutputAdversaryError(m, prior, dp, space, cfg));
  LPPM_ASSIGN(p_wc_ce, WorstCaseOutputConditionalEntropy(m, prior));
#undef LPPM_ASSIGN
  return r;
}

}  // namespace lppm
