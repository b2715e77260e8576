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

// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits nonzero
// when any criterion fails. Set LPPM_GOWALLA and/or LPPM_BRIGHTKITE to SNAP
// check-in files (plain or .gz) to run the dataset criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "lppm/experiment.h"
#include "lppm/ingest.h"
#include "lppm/mechanisms.h"
#include "lppm/metrics.h"
#include "lppm/remap.h"
#include "lppm/samplers.h"
#include "lppm/shokri.h"
#include "oracles.h"

namespace lppm {
namespace {

using ::lppm::testing::Unwrap;

const DistanceFn kEuclid = DistanceFn::Euclidean();

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome Check(bool ok, std::string detail) {
  return {ok ? Verdict::kPass : Verdict::kFail, std::move(detail)};
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

DiscreteMechanism FromKernel(const Prior& prior,
                             const std::vector<PlanePoint>& pts,
                             const std::function<double(double)>& kernel) {
  return Unwrap(DiscreteMechanism::Create(prior.poi_ptr(),
                                          prior.poi().Locations(),
                                          testing::KernelMatrix(pts, kernel)));
}

BaParams Rate(double b) {
  BaParams p;
  p.b = b;
  return p;
}

EstimateSpace PoiCandidates(const Prior& prior) {
  return EstimateSpace::Candidates(prior.poi().Locations());
}

Outcome RemapOptimality() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int checked = 0;
  for (int inst = 0; inst < 25; ++inst) {
    const int n = 5 + static_cast<int>(rng() % 46);  // 5..50
    const auto ri = testing::MakeRandomInstance(n, 1000 + inst, 6.0);
    const Prior prior = testing::MakePrior(ri);
    const double s = 0.3 + 0.1 * (inst % 10);
    std::vector<DiscreteMechanism> ms = {
        FromKernel(prior, ri.points,
                   [s](double d) { return std::exp(-d * d / (2 * s * s)); }),
        FromKernel(prior, ri.points,
                   [s](double d) { return d <= 3 * s ? 1.0 : 0.0; }),
        Unwrap(BuildExponential(prior.poi_ptr(), prior.poi().Locations(),
                                kEuclid, 1.0 / s)),
        Unwrap(BuildBaUnremapped(prior, prior.poi().Locations(), kEuclid,
                                 Rate(1.0 / s))),
    };
    const double q_star = Unwrap(OptimalConstantOutput(prior, kEuclid)).q_star;
    ms.push_back(Unwrap(BuildCoin(prior, kEuclid, q_star * (inst + 1) / 26.0)));
    for (const DiscreteMechanism& m : ms) {
      const DiscreteMechanism r = Unwrap(OptimalRemap(m, prior, kEuclid));
      const double gap =
          std::abs(Unwrap(AverageAdversaryError(r, prior, kEuclid)) -
                   Unwrap(AverageQualityLoss(r, prior, kEuclid)));
      worst = std::max(worst, gap);
      ++checked;
    }
  }
  const double secs = Seconds(start);
  return Check(worst <= 1e-6 && secs < 60.0,
               absl::StrFormat("%d mechanisms, max |p_ae - q_avg| = %.3g, %.1fs",
                               checked, worst, secs));
}

Outcome CoinOptimality() {
  const Prior prior = testing::MakePrior(testing::MakeRandomInstance(25, 77));
  const double q_star = Unwrap(OptimalConstantOutput(prior, kEuclid)).q_star;
  double worst = 0.0, wc = 0.0, gi = 0.0;
  for (double frac : {0.25, 0.5, 0.75}) {
    const double q = frac * q_star;
    const DiscreteMechanism coin = Unwrap(BuildCoin(prior, kEuclid, q));
    worst = std::max(
        {worst, std::abs(Unwrap(AverageQualityLoss(coin, prior, kEuclid)) - q),
         std::abs(Unwrap(AverageAdversaryError(coin, prior, kEuclid)) - q)});
    wc = std::max(wc, Unwrap(WorstCaseOutputAdversaryError(coin, prior, kEuclid)));
    gi = std::max(gi, Unwrap(GeoIndistinguishability(coin)));
  }
  return Check(worst <= 1e-9 && wc == 0.0 && gi == 0.0,
               absl::StrFormat("max deviation %.3g, p_wc_ae %.3g, p_gi %.3g",
                               worst, wc, gi));
}

Outcome BaGeoInd() {
  const Prior prior = testing::MakePrior(testing::MakeRandomInstance(25, 78));
  const auto outs = prior.poi().Locations();
  double worst = -std::numeric_limits<double>::infinity();
  for (double b : {0.5, 2.0, 10.0}) {
    const DiscreteMechanism m =
        Unwrap(BuildBaUnremapped(prior, outs, kEuclid, Rate(b)));
    for (int x = 0; x < 25; ++x) {
      for (int xp = 0; xp < 25; ++xp) {
        const double d = EuclideanKm(prior.poi().point(x), prior.poi().point(xp));
        for (int z = 0; z < m.num_outputs(); ++z) {
          if (m(x, z) == 0.0 && m(xp, z) == 0.0) continue;
          worst = std::max(worst,
                           std::log(m(x, z)) - std::log(m(xp, z)) - 2 * b * d);
        }
      }
    }
  }
  return Check(worst <= 1e-7,
               absl::StrFormat("max log-ratio excess over 2b d: %.3g", worst));
}

Outcome BaFixedPoint() {
  const Prior prior = testing::MakePrior(testing::MakeRandomInstance(25, 79));
  const auto outs = prior.poi().Locations();
  double deviation = 0.0, rise = -std::numeric_limits<double>::infinity();
  bool converged = true;
  for (double b : {0.5, 2.0, 10.0}) {
    BaParams params;
    params.b = b;
    params.record_lagrangian = true;
    const BaTrace t = Unwrap(RunBlahutArimoto(prior, outs, kEuclid, params));
    converged &= t.converged;
    const Matrix d = Unwrap(DistanceMatrix(kEuclid, prior.poi(), outs));
    deviation = std::max(
        deviation,
        (BlahutArimotoUpdate(prior, d, b, t.matrix) - t.matrix).cwiseAbs().maxCoeff());
    for (size_t i = 1; i < t.lagrangian.size(); ++i) {
      rise = std::max(rise, t.lagrangian[i] - t.lagrangian[i - 1]);
    }
  }
  return Check(converged && deviation <= 1e-8 && rise <= 1e-9,
               absl::StrFormat("max self-consistency deviation %.3g, largest "
                               "Lagrangian step %.3g",
                               deviation, rise));
}

struct Grid {
  Prior prior;
  double q_star;
  DistanceFn tags;
};

Grid MakeGrid() {
  Prior prior = Unwrap(BuildGridScenario());
  const double q_star = Unwrap(OptimalConstantOutput(prior, kEuclid)).q_star;
  DistanceFn tags = DistanceFn::TagHamming(prior.poi().tags());
  return {std::move(prior), q_star, std::move(tags)};
}

Outcome ShokriLpCriterion() {
  const Grid g = MakeGrid();
  double worst = 0.0;
  bool degraded = true;
  std::vector<std::string> parts;
  for (double frac : {0.2, 0.5, 0.8}) {
    const double q = frac * g.q_star;
    const ShokriSolution e = Unwrap(SolveShokri({g.prior, kEuclid, kEuclid, q}));
    worst = std::max(worst, std::abs(e.result.objective - q));
    const ShokriSolution s = Unwrap(SolveShokri({g.prior, g.tags, kEuclid, q}));
    const double e_sem = Unwrap(AverageAdversaryError(e.mechanism, g.prior, g.tags,
                                                      PoiCandidates(g.prior)));
    const double s_sem = Unwrap(AverageAdversaryError(s.mechanism, g.prior, g.tags,
                                                      PoiCandidates(g.prior)));
    degraded &= e_sem < s_sem;
    parts.push_back(absl::StrFormat("semantic p_ae %.3f < %.3f", e_sem, s_sem));
  }
  return Check(worst <= 1e-6 && degraded,
               absl::StrFormat("max |objective - budget| = %.3g; %s", worst,
                               absl::StrJoin(parts, ", ")));
}

Outcome EntropyOrdering() {
  const Grid g = MakeGrid();
  const double q = 0.5 * g.q_star;
  const auto outs = g.prior.poi().Locations();
  const EstimateSpace cands = PoiCandidates(g.prior);
  const ShokriSolution lp = Unwrap(SolveShokri({g.prior, kEuclid, kEuclid, q}));
  const double lp_q = Unwrap(AverageQualityLoss(lp.mechanism, g.prior, kEuclid));
  const DiscreteMechanism coin = Unwrap(BuildCoin(g.prior, kEuclid, lp_q, cands));
  const BaTuning t =
      Unwrap(TuneBaB(g.prior, outs, kEuclid, lp_q, 0.05, 50.0, {}, cands, 0.005));
  const DiscreteMechanism ba =
      Unwrap(BuildBa(g.prior, outs, kEuclid, t.params, cands));
  const double h_lp = Unwrap(ConditionalEntropy(lp.mechanism, g.prior));
  const double h_coin = Unwrap(ConditionalEntropy(coin, g.prior));
  const double h_ba = Unwrap(ConditionalEntropy(ba, g.prior));
  return Check(h_ba > h_coin && h_ba > h_lp,
               absl::StrFormat("q_avg %.4f (BA %.4f): p_ce simplex %.4f, coin "
                               "%.4f, BA %.4f bits",
                               lp_q, t.q_avg, h_lp, h_coin, h_ba));
}

Outcome PolytopeConvexity() {
  const Grid g = MakeGrid();
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int pairs = 0;
  for (double frac : {0.2, 0.5, 0.8}) {
    const double q = frac * g.q_star;
    const ShokriSolution a = Unwrap(SolveShokri({g.prior, kEuclid, kEuclid, q}));
    for (int attempt = 0; attempt < 20; ++attempt) {
      SimplexOptions o;
      o.column_order.resize(650);
      std::iota(o.column_order.begin(), o.column_order.end(), 0);
      std::shuffle(o.column_order.begin(), o.column_order.end(), rng);
      const ShokriSolution b =
          Unwrap(SolveShokri({g.prior, kEuclid, kEuclid, q}, o));
      if ((a.mechanism.matrix() - b.mechanism.matrix()).cwiseAbs().maxCoeff() <=
          1e-6) {
        continue;
      }
      const DiscreteMechanism mid =
          Unwrap(ConvexCombination(a.mechanism, b.mechanism, 0.5));
      worst = std::max(worst, std::abs(Unwrap(AverageAdversaryError(
                                           mid, g.prior, kEuclid,
                                           PoiCandidates(g.prior))) -
                                       q));
      ++pairs;
      break;
    }
  }
  return Check(pairs == 3 && worst <= 1e-6,
               absl::StrFormat("%d vertex pairs, max midpoint deviation %.3g",
                               pairs, worst));
}

Outcome Numerics() {
  const double lo = -1.0 / std::numbers::e, hi = -1e-10;
  double residual = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = lo + (hi - lo) * (i + 0.5) / 1000;
    const double w = Unwrap(LambertWm1(v));
    residual = std::max(residual, std::abs(w * std::exp(w) - v));
  }
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  double median_gap = 0.0;
  for (int set = 0; set < 20; ++set) {
    const int n = 3 + set % 10;
    std::vector<PlanePoint> pts;
    std::vector<double> w;
    for (int i = 0; i < n; ++i) {
      pts.push_back({10 * u(rng), 10 * u(rng)});
      w.push_back(0.01 + u(rng));
    }
    const auto [oracle, value] = testing::GridSearchMedian(pts, w);
    median_gap = std::max(median_gap, EuclideanKm(Unwrap(GeometricMedian(pts, w)),
                                                  oracle));
  }
  return Check(residual <= 1e-12 && median_gap <= 1e-3,
               absl::StrFormat("Lambert W residual %.3g, Weiszfeld vs grid %.3g km",
                               residual, median_gap));
}

Outcome Samplers() {
  const double eps = 2.0, radius = 3.0;
  const auto laplace = Unwrap(LaplaceSampler::Create(eps));
  const auto circular = Unwrap(CircularSampler::Create(radius));
  Rng rng(12);
  double lsum = 0.0, csum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    lsum += Norm(Unwrap(laplace->Draw({0, 0}, rng)));
    csum += Norm(Unwrap(circular->Draw({0, 0}, rng)));
  }
  const double lrel = std::abs(lsum / n / (2 / eps) - 1);
  const double crel = std::abs(csum / n / (2 * radius / 3) - 1);

  ExperimentSpec spec;
  spec.scenario = Scenario::kSynthetic;
  spec.city_size = 80;
  spec.samples = 2000;
  spec.remap = RemapMode::kConstrained;
  spec.q_max = 1.5;
  spec.mechanisms = {{"laplace", {0.4, 1.3, 4, 13, 40}},
                     {"gaussian", {0.05, 0.16, 0.5, 1.6, 5}},
                     {"circular", {0.075, 0.24, 0.75, 2.4, 7.5}},
                     {"exponential", {0.2, 2, 20}},
                     {"ba", {0.2, 2, 20}}};
  const auto rows = Unwrap(RunSweep(spec, 0));
  double max_wc = 0.0;
  int errors = 0;
  for (const SweepRow& r : rows) {
    if (r.is_error()) {
      ++errors;
      continue;
    }
    max_wc = std::max(max_wc, r.report.q_wc);
  }
  return Check(lrel <= 0.01 && crel <= 0.01 && max_wc <= 1.5 && errors == 0,
               absl::StrFormat("Laplace mean radius off by %.3g%%, circular %.3g%%, "
                               "bounded sweep max q_wc %.4g km over %d rows "
                               "(%d errors)",
                               100 * lrel, 100 * crel, max_wc, rows.size(), errors));
}

struct DatasetExpectation {
  const char* env;
  const char* name;
  int64_t pois;
  double top_mass;
};

Outcome DatasetPipeline() {
  const DatasetExpectation sets[] = {{"LPPM_GOWALLA", "Gowalla", 9701, 0.04},
                                     {"LPPM_BRIGHTKITE", "Brightkite", 8898, 0.23}};
  const Region sf = SanFranciscoRegion();
  bool any = false, ok = true;
  std::vector<std::string> parts;
  for (const DatasetExpectation& e : sets) {
    const char* path = std::getenv(e.env);
    if (path == nullptr || *path == '\0') {
      parts.push_back(absl::StrCat(e.name, ": ", e.env, " unset"));
      continue;
    }
    any = true;
    PriorBuilder events(sf, sf.Center(), CountingMode::kCheckins);
    PriorBuilder users(sf, sf.Center(), CountingMode::kDistinctUsers);
    const absl::StatusOr<int64_t> malformed =
        ForEachCheckin(path, [&](const CheckinRecord& r) {
          events.Add(r);
          users.Add(r);
        });
    if (!malformed.ok()) {
      ok = false;
      parts.push_back(absl::StrCat(e.name, ": ", malformed.status().ToString()));
      continue;
    }
    bool matched = false;
    for (const PriorBuilder* b : {&events, &users}) {
      const absl::StatusOr<PoiPrior> p = b->Finish();
      if (!p.ok()) continue;
      const double top = *std::max_element(p->prior.mass().begin(),
                                            p->prior.mass().end());
      const int64_t count = p->prior.size() + p->merged_locations;
      parts.push_back(absl::StrFormat("%s/%s: |X|=%d (ids %d) top=%.4f", e.name,
                            b == &events ? "checkins" : "users", p->prior.size(),
                            count, top));
      matched |= (p->prior.size() == e.pois || count == e.pois) &&
                 std::abs(top - e.top_mass) <= 0.02;
    }
    ok &= matched;
  }
  if (!any) return {Verdict::kSkip, "no dataset files; " + absl::StrJoin(parts, "; ")};
  return Check(ok, absl::StrJoin(parts, "; "));
}

Outcome SweepDiagonal() {
  ExperimentSpec spec;
  spec.scenario = Scenario::kSynthetic;
  spec.city_size = 100;
  spec.samples = 5000;
  spec.remap = RemapMode::kOptimal;
  auto log_range = [](const std::string& r) { return Unwrap(ParseSweepValues(r)); };
  spec.mechanisms = {{"laplace", log_range("0.4:40:log")},
                     {"gaussian", log_range("0.05:5:log")},
                     {"circular", log_range("0.075:7.5:log")},
                     {"coin", log_range("0.05:0.95:lin"), true},
                     {"exponential", log_range("0.2:20:log")},
                     {"ba", log_range("0.2:20:log")}};
  const auto rows = Unwrap(RunSweep(spec, 0));
  double worst = 0.0;
  int errors = 0;
  for (const SweepRow& r : rows) {
    if (r.is_error()) {
      ++errors;
      continue;
    }
    const double rel = std::abs(r.report.p_ae - r.report.q_avg) /
                       std::max(r.report.q_avg, 1e-300);
    worst = std::max(worst, r.report.q_avg == 0 ? 0.0 : rel);
  }
  return Check(worst <= 0.02 && errors == 0,
               absl::StrFormat("%d rows, max relative |p_ae - q_avg| %.3g, %d errors",
                               rows.size(), worst, errors));
}

}  // namespace
}  // namespace lppm

int main() {
  using lppm::Outcome;
  using lppm::Verdict;
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"remap optimality", lppm::RemapOptimality},
      {"coin optimality", lppm::CoinOptimality},
      {"BA geo-indistinguishability", lppm::BaGeoInd},
      {"BA fixed point", lppm::BaFixedPoint},
      {"LP mechanism", lppm::ShokriLpCriterion},
      {"entropy ordering", lppm::EntropyOrdering},
      {"optimal-set convexity", lppm::PolytopeConvexity},
      {"numerics", lppm::Numerics},
      {"samplers", lppm::Samplers},
      {"dataset pipeline", lppm::DatasetPipeline},
      {"sweep diagonal", lppm::SweepDiagonal},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = criteria[i].second();
    const char* word = o.verdict == Verdict::kPass   ? "PASS"
                       : o.verdict == Verdict::kFail ? "FAIL"
                                                     : "SKIP";
    failures += o.verdict == Verdict::kFail;
    std::cout << absl::StrFormat("%s %2d %s: %s [%.1fs]", word, i + 1,
                                 criteria[i].first, o.detail,
                                 lppm::Seconds(start))
              << std::endl;
  }
  std::cout << (failures == 0 ? "acceptance: all criteria passed or skipped"
                              : absl::StrFormat("acceptance: %d failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
