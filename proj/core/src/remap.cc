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

#include "lppm/remap.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace lppm {
namespace {

double Objective(absl::Span<const PlanePoint> points,
                 absl::Span<const double> weights, PlanePoint y) {
  double sum = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (weights[i] > 0.0) sum += weights[i] * EuclideanKm(points[i], y);
  }
  return sum;
}

// Resultant pull of every point other than `j` on a candidate placed at
// points[j]. points[j] is the median iff |R| <= w_j.
PlanePoint ResultantAt(absl::Span<const PlanePoint> points,
                       absl::Span<const double> weights, size_t j) {
  PlanePoint r;
  for (size_t i = 0; i < points.size(); ++i) {
    if (i == j || weights[i] <= 0.0) continue;
    const double d = EuclideanKm(points[i], points[j]);
    if (d == 0.0) continue;
    r = r + (weights[i] / d) * (points[i] - points[j]);
  }
  return r;
}

bool IsMedianAt(absl::Span<const PlanePoint> points,
                absl::Span<const double> weights, size_t j) {
  return Norm(ResultantAt(points, weights, j)) <= weights[j];
}

// Damped Newton step for the median objective from an iterate that is not on
// a data point. Returns `y` itself when the Hessian is singular or no
// backtracked step lowers the objective. Weiszfeld alone converges slowly
// when the median sits right next to a heavy data point; this step does not.
PlanePoint NewtonStep(absl::Span<const PlanePoint> points,
                      absl::Span<const double> weights, PlanePoint y,
                      double f_y) {
  double gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    const PlanePoint v = y - points[i];
    const double d = Norm(v);
    if (d == 0.0) return y;
    const double ux = v.x_km / d, uy = v.y_km / d, s = weights[i] / d;
    gx += weights[i] * ux;
    gy += weights[i] * uy;
    hxx += s * (1.0 - ux * ux);
    hxy -= s * ux * uy;
    hyy += s * (1.0 - uy * uy);
  }
  const double det = hxx * hyy - hxy * hxy;
  if (!(det > 1e-12 * (hxx + hyy) * (hxx + hyy))) return y;
  PlanePoint step{-(hyy * gx - hxy * gy) / det, -(hxx * gy - hxy * gx) / det};
  for (int k = 0; k < 40; ++k) {
    const PlanePoint cand = y + step;
    if (Objective(points, weights, cand) < f_y) return cand;
    step = 0.5 * step;
  }
  return y;
}

}  // namespace

absl::StatusOr<WeiszfeldResult> RunWeiszfeld(absl::Span<const PlanePoint> points,
                                             absl::Span<const double> weights,
                                             const WeiszfeldConfig& cfg) {
  if (points.size() != weights.size()) {
    return absl::InvalidArgumentError("points and weights differ in size");
  }
  if (!(cfg.tolerance_km > 0.0) || cfg.max_iterations < 1) {
    return absl::InvalidArgumentError("invalid Weiszfeld configuration");
  }
  double total = 0.0;
  size_t heaviest = 0;
  int positive = 0;
  PlanePoint mean;
  for (size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      return absl::InvalidArgumentError("weights must be finite and >= 0");
    }
    if (weights[i] == 0.0) continue;
    ++positive;
    total += weights[i];
    mean = mean + weights[i] * points[i];
    if (weights[i] > weights[heaviest] || weights[heaviest] == 0.0) {
      heaviest = i;
    }
  }
  if (positive == 0) {
    return absl::InvalidArgumentError("geometric median needs a positive weight");
  }
  WeiszfeldResult result;
  result.converged = true;
  // A point holding at least half of the weight is always the median.
  if (positive == 1 || 2.0 * weights[heaviest] >= total) {
    result.point = points[heaviest];
    result.objective = Objective(points, weights, result.point);
    return result;
  }

  PlanePoint y = (1.0 / total) * mean;
  result.converged = false;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    result.iterations = it;
    double inv_sum = 0.0;
    PlanePoint num;
    size_t coincident = points.size();
    for (size_t i = 0; i < points.size(); ++i) {
      if (weights[i] == 0.0) continue;
      const double d = EuclideanKm(points[i], y);
      if (d <= cfg.singularity_epsilon_km) {
        coincident = i;
        continue;
      }
      inv_sum += weights[i] / d;
      num = num + (weights[i] / d) * points[i];
    }
    if (inv_sum == 0.0) {
      result.point = y;
      result.converged = true;
      break;
    }
    PlanePoint next = (1.0 / inv_sum) * num;
    if (coincident == points.size()) {
      const double f_next = Objective(points, weights, next);
      const PlanePoint newton =
          NewtonStep(points, weights, y, Objective(points, weights, y));
      if (Objective(points, weights, newton) < f_next) next = newton;
    } else {
      const PlanePoint r = ResultantAt(points, weights, coincident);
      const double r_norm = Norm(r);
      const double w = weights[coincident];
      if (r_norm <= w) {
        result.point = points[coincident];
        result.converged = true;
        break;
      }
      // Vardi-Zhang step off the data point.
      const double mix = w / r_norm;
      next = (1.0 - mix) * next + mix * points[coincident];
    }
    const double step = EuclideanKm(next, y);
    y = next;
    result.point = y;
    if (step < cfg.tolerance_km) {
      result.converged = true;
      break;
    }
  }

  // Snap to the nearest data point if it passes the optimality test.
  size_t nearest = points.size();
  double nearest_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < points.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double d = EuclideanKm(points[i], result.point);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  if (nearest != points.size() && IsMedianAt(points, weights, nearest)) {
    result.point = points[nearest];
    result.converged = true;
  }
  result.objective = Objective(points, weights, result.point);
  return result;
}

absl::StatusOr<PlanePoint> GeometricMedian(absl::Span<const PlanePoint> points,
                                           absl::Span<const double> weights,
                                           const WeiszfeldConfig& cfg) {
  absl::StatusOr<WeiszfeldResult> r = RunWeiszfeld(points, weights, cfg);
  if (!r.ok()) return r.status();
  if (!r->converged) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "Weiszfeld did not converge in %d iterations; best iterate "
        "(%.17g, %.17g) objective %.17g",
        r->iterations, r->point.x_km, r->point.y_km, r->objective));
  }
  return r->point;
}

absl::StatusOr<WeightedMinimum> MinimizeWeightedDistance(
    absl::Span<const Location> points, absl::Span<const double> weights,
    const DistanceFn& d, const EstimateSpace& space,
    const WeiszfeldConfig& cfg) {
  if (points.size() != weights.size()) {
    return absl::InvalidArgumentError("points and weights differ in size");
  }
  if (space.candidate_set) {
    if (space.candidates.empty()) {
      return absl::InvalidArgumentError("empty candidate set");
    }
    WeightedMinimum best;
    best.objective = std::numeric_limits<double>::infinity();
    for (const Location& c : space.candidates) {
      double sum = 0.0;
      for (size_t i = 0; i < points.size(); ++i) {
        if (weights[i] == 0.0) continue;
        absl::StatusOr<double> v = d(points[i], c);
        if (!v.ok()) return v.status();
        sum += weights[i] * *v;
      }
      if (sum < best.objective) best = {c, sum};
    }
    return best;
  }

  switch (d.kind()) {
    case DistanceKind::kTagHamming:
      return absl::InvalidArgumentError(
          "tag distance has no minimizer over the plane; use a candidate set");
    case DistanceKind::kSquaredEuclidean: {
      double total = 0.0;
      PlanePoint mean;
      for (size_t i = 0; i < points.size(); ++i) {
        total += weights[i];
        mean = mean + weights[i] * points[i].point;
      }
      if (!(total > 0.0)) {
        return absl::InvalidArgumentError("weighted mean needs positive weight");
      }
      WeightedMinimum out;
      out.location.point = (1.0 / total) * mean;
      for (size_t i = 0; i < points.size(); ++i) {
        out.objective += weights[i] * d.Geometric(points[i].point,
                                                  out.location.point);
      }
      return out;
    }
    case DistanceKind::kEuclidean: {
      std::vector<PlanePoint> pts;
      pts.reserve(points.size());
      for (const Location& l : points) pts.push_back(l.point);
      absl::StatusOr<PlanePoint> median = GeometricMedian(pts, weights, cfg);
      if (!median.ok()) return median.status();
      WeightedMinimum out;
      out.location.point = *median;
      // Keep the POI identity when the median is a data point.
      for (const Location& l : points) {
        if (l.point == *median) out.location.id = l.id;
      }
      out.objective = Objective(pts, weights, *median);
      return out;
    }
  }
  return absl::InternalError("unknown distance kind");
}

namespace {

struct Column {
  std::vector<Location> points;
  std::vector<double> weights;
};

Column GatherColumn(const DiscreteMechanism& m, const Prior& prior, int z) {
  Column c;
  for (int x = 0; x < m.num_inputs(); ++x) {
    const double w = prior[x] * m(x, z);
    if (w > 0.0) {
      c.points.push_back(m.inputs().location(x));
      c.weights.push_back(w);
    }
  }
  return c;
}

absl::Status CheckRemapDistance(const DistanceFn& dq,
                                const EstimateSpace& space) {
  if (dq.kind() == DistanceKind::kTagHamming && !space.candidate_set) {
    return absl::InvalidArgumentError(
        "remapping under the tag distance is not supported");
  }
  return absl::OkStatus();
}

double MaxDistance(absl::Span<const Location> points, const DistanceFn& dq,
                   PlanePoint c) {
  double worst = 0.0;
  for (const Location& l : points) {
    worst = std::max(worst, dq.Geometric(l.point, c));
  }
  return worst;
}

}  // namespace

absl::StatusOr<RemapPlan> PlanOptimalRemap(const DiscreteMechanism& m,
                                           const Prior& prior,
                                           const DistanceFn& dq,
                                           const EstimateSpace& space,
                                           const WeiszfeldConfig& cfg) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  if (absl::Status s = CheckRemapDistance(dq, space); !s.ok()) return s;
  RemapPlan plan;
  plan.targets.reserve(m.num_outputs());
  plan.feasible.assign(m.num_outputs(), true);
  for (int z = 0; z < m.num_outputs(); ++z) {
    Column col = GatherColumn(m, prior, z);
    if (col.points.empty()) {
      plan.targets.push_back(m.outputs()[z]);
      continue;
    }
    absl::StatusOr<WeightedMinimum> best =
        MinimizeWeightedDistance(col.points, col.weights, dq, space, cfg);
    if (!best.ok()) return best.status();
    plan.targets.push_back(best->location);
  }
  return plan;
}

absl::StatusOr<DiscreteMechanism> OptimalRemap(const DiscreteMechanism& m,
                                               const Prior& prior,
                                               const DistanceFn& dq,
                                               const EstimateSpace& space,
                                               const WeiszfeldConfig& cfg) {
  absl::StatusOr<RemapPlan> plan = PlanOptimalRemap(m, prior, dq, space, cfg);
  if (!plan.ok()) return plan.status();
  return Compose(m, plan->targets);
}

absl::StatusOr<ConstrainedTarget> ConstrainedRemapTarget(
    absl::Span<const Location> points, absl::Span<const double> weights,
    const Location& z, const DistanceFn& dq, double q_max,
    const WeiszfeldConfig& cfg) {
  if (dq.kind() == DistanceKind::kTagHamming) {
    return absl::InvalidArgumentError(
        "remapping under the tag distance is not supported");
  }
  std::vector<Location> support;
  std::vector<double> w;
  for (size_t i = 0; i < points.size(); ++i) {
    if (weights[i] > 0.0) {
      support.push_back(points[i]);
      w.push_back(weights[i]);
    }
  }
  if (support.empty()) return ConstrainedTarget{z, true};

  auto feasible = [&](PlanePoint c) {
    return MaxDistance(support, dq, c) <= q_max;
  };
  auto cost = [&](PlanePoint c) {
    double sum = 0.0;
    for (size_t i = 0; i < support.size(); ++i) {
      sum += w[i] * dq.Geometric(support[i].point, c);
    }
    return sum;
  };

  absl::StatusOr<WeightedMinimum> free =
      MinimizeWeightedDistance(support, w, dq, EstimateSpace::Plane(), cfg);
  if (!free.ok()) return free.status();

  std::vector<Location> candidates = {free->location};
  if (feasible(z.point) && !feasible(free->location.point)) {
    // Feasible set is convex and contains z; the cost decreases along the
    // segment towards the unconstrained optimum.
    double lo = 0.0, hi = 1.0;
    const PlanePoint dir = free->location.point - z.point;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(z.point + mid * dir)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    candidates.push_back({z.point + lo * dir, Location::kNoId});
  }
  candidates.push_back(z);
  candidates.insert(candidates.end(), support.begin(), support.end());

  ConstrainedTarget best{z, false};
  double best_cost = std::numeric_limits<double>::infinity();
  for (const Location& c : candidates) {
    if (!feasible(c.point)) continue;
    const double v = cost(c.point);
    if (v < best_cost) {
      best_cost = v;
      best = {c, true};
    }
  }
  return best;
}

absl::StatusOr<RemapPlan> PlanConstrainedRemap(const DiscreteMechanism& m,
                                               const Prior& prior,
                                               const DistanceFn& dq,
                                               double q_max,
                                               const WeiszfeldConfig& cfg) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  if (absl::Status s = CheckRemapDistance(dq, EstimateSpace::Plane());
      !s.ok()) {
    return s;
  }
  RemapPlan plan;
  for (int z = 0; z < m.num_outputs(); ++z) {
    Column col = GatherColumn(m, prior, z);
    absl::StatusOr<ConstrainedTarget> t = ConstrainedRemapTarget(
        col.points, col.weights, m.outputs()[z], dq, q_max, cfg);
    if (!t.ok()) return t.status();
    plan.targets.push_back(t->location);
    plan.feasible.push_back(t->feasible);
  }
  return plan;
}

absl::StatusOr<DiscreteMechanism> ConstrainedRemap(const DiscreteMechanism& m,
                                                   const Prior& prior,
                                                   const DistanceFn& dq,
                                                   double q_max,
                                                   const WeiszfeldConfig& cfg) {
  absl::StatusOr<RemapPlan> plan =
      PlanConstrainedRemap(m, prior, dq, q_max, cfg);
  if (!plan.ok()) return plan.status();
  return Compose(m, plan->targets);
}

}  // namespace lppm
