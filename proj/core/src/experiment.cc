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

#include "lppm/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_replace.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "lppm/ingest.h"
#include "lppm/mechanisms.h"
#include "lppm/remap.h"
#include "lppm/samplers.h"
#include "lppm/shokri.h"

namespace lppm {
namespace {

namespace pt = boost::property_tree;

// Parameter key(s) per mechanism; the second key, if any, takes values as
// fractions of Q*.
struct MechanismKeys {
  const char* name;
  const char* key;
  const char* fraction_key;
};

constexpr MechanismKeys kMechanisms[] = {
    {"laplace", "epsilon", nullptr},  {"gaussian", "mean_km", nullptr},
    {"circular", "radius_km", nullptr}, {"coin", "q_km", "q_fraction"},
    {"exponential", "b", nullptr},    {"ba", "b", nullptr},
    {"shokri", "budget_km", "budget_fraction"},
};

const MechanismKeys* FindMechanism(absl::string_view name) {
  for (const MechanismKeys& m : kMechanisms) {
    if (name == m.name) return &m;
  }
  return nullptr;
}

bool IsSampler(absl::string_view name) {
  return name == "laplace" || name == "gaussian" || name == "circular";
}

const std::set<std::string>& ExperimentKeys() {
  static const auto* keys = new std::set<std::string>{
      "scenario", "poi_file",  "city_size", "city_seed", "city_extent_km",
      "grid_side", "cell_km",  "grid_tags", "mechanisms", "metrics",
      "samples",  "seed",      "remap",     "q_max",     "dq",
      "dp",       "estimates", "output"};
  return *keys;
}

const std::set<std::string>& MetricNames() {
  static const auto* names = new std::set<std::string>{
      "q_avg", "q_wc", "p_ae", "p_ce", "p_gi", "p_wc_ae", "p_wc_ce"};
  return *names;
}

std::vector<std::string> SplitList(absl::string_view text) {
  std::vector<std::string> out;
  for (absl::string_view part : absl::StrSplit(text, ',')) {
    part = absl::StripAsciiWhitespace(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

template <typename T>
absl::Status ParseNumber(const std::string& key, absl::string_view text,
                         T* out) {
  bool ok;
  if constexpr (std::is_floating_point_v<T>) {
    ok = absl::SimpleAtod(text, out) && std::isfinite(*out);
  } else {
    ok = absl::SimpleAtoi(text, out);
  }
  if (!ok) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad value for ", key, ": '", text, "'"));
  }
  return absl::OkStatus();
}

absl::StatusOr<DistanceFn> MakeDistance(absl::string_view name,
                                        const PoiSet& poi) {
  if (name == "euclidean") return DistanceFn::Euclidean();
  if (name == "squared") return DistanceFn::SquaredEuclidean();
  if (name == "tags") {
    if (!poi.has_tags()) {
      return absl::FailedPreconditionError("tag distance needs tagged POIs");
    }
    return DistanceFn::TagHamming(poi.tags());
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown distance ", name));
}

absl::StatusOr<NoiseSamplerPtr> MakeSampler(absl::string_view name,
                                            double value) {
  if (name == "laplace") {
    absl::StatusOr<std::shared_ptr<const LaplaceSampler>> s =
        LaplaceSampler::Create(value);
    if (!s.ok()) return s.status();
    return NoiseSamplerPtr(*s);
  }
  if (name == "gaussian") {
    absl::StatusOr<std::shared_ptr<const GaussianSampler>> s =
        GaussianSampler::Create(value);
    if (!s.ok()) return s.status();
    return NoiseSamplerPtr(*s);
  }
  absl::StatusOr<std::shared_ptr<const CircularSampler>> s =
      CircularSampler::Create(value);
  if (!s.ok()) return s.status();
  return NoiseSamplerPtr(*s);
}

absl::StatusOr<MetricReport> EvaluatePoint(const ExperimentSpec& spec,
                                           const Prior& prior,
                                           const std::string& name,
                                           double value, bool fraction,
                                           uint64_t seed) {
  const PoiSet& poi = prior.poi();
  absl::StatusOr<DistanceFn> dq = MakeDistance(spec.dq, poi);
  if (!dq.ok()) return dq.status();
  absl::StatusOr<DistanceFn> dp = MakeDistance(spec.dp, poi);
  if (!dp.ok()) return dp.status();
  const EstimateSpace space = spec.candidate_estimates
                                  ? EstimateSpace::Candidates(poi.Locations())
                                  : EstimateSpace::Plane();
  const bool constrained = spec.remap == RemapMode::kConstrained;
  if (constrained && !spec.q_max.has_value()) {
    return absl::InvalidArgumentError("constrained remap needs q_max");
  }

  if (IsSampler(name)) {
    absl::StatusOr<NoiseSamplerPtr> sampler = MakeSampler(name, value);
    if (!sampler.ok()) return sampler.status();
    if (constrained) {
      sampler = Truncate(*sampler, *spec.q_max);
      if (!sampler.ok()) return sampler.status();
    }
    McConfig mc;
    mc.samples = spec.samples;
    mc.seed = seed;
    mc.remap = spec.remap;
    if (constrained) mc.q_max = *spec.q_max;
    mc.space = space;
    return McEvaluate(**sampler, prior, *dq, *dp, mc);
  }

  double scale = 1.0;
  if (fraction) {
    absl::StatusOr<ConstantOutput> c = OptimalConstantOutput(prior, *dq, space);
    if (!c.ok()) return c.status();
    scale = c->q_star;
  }
  const std::vector<Location> outputs = poi.Locations();
  absl::StatusOr<DiscreteMechanism> m = absl::InternalError("unreachable");
  if (name == "coin") {
    m = BuildCoin(prior, *dq, value * scale, space);
  } else if (name == "exponential") {
    m = BuildExponential(prior.poi_ptr(), outputs, *dq, value);
  } else if (name == "ba") {
    BaParams params;
    params.b = value;
    // Bounded runs keep far outputs out of the iteration itself; truncating
    // afterwards could strand inputs whose mass collapsed onto far outputs.
    if (constrained) params.q_max = *spec.q_max;
    m = BuildBaUnremapped(prior, outputs, *dq, params);
  } else if (name == "shokri") {
    absl::StatusOr<ShokriSolution> s =
        SolveShokri(ShokriInstance{prior, *dp, *dq, value * scale});
    if (!s.ok()) return s.status();
    // The LP output is already average-error optimal; it is reported as
    // solved so that its vertex structure stays visible.
    return EvaluateMechanism(s->mechanism, prior, *dq, *dp, space);
  }
  if (!m.ok()) return m.status();

  if (spec.remap == RemapMode::kOptimal) {
    m = OptimalRemap(*m, prior, *dq, space);
  } else if (constrained) {
    m = TruncateMechanism(*m, *dq, *spec.q_max);
    if (m.ok()) m = ConstrainedRemap(*m, prior, *dq, *spec.q_max);
  }
  if (!m.ok()) return m.status();
  return EvaluateMechanism(*m, prior, *dq, *dp, space);
}

void KeepRequestedMetrics(const std::vector<std::string>& metrics,
                          MetricReport& r) {
  if (metrics.empty()) return;
  auto keep = [&](const char* name, double& field) {
    if (std::find(metrics.begin(), metrics.end(), name) == metrics.end()) {
      field = kNotComputed;
    }
  };
  keep("q_avg", r.q_avg);
  keep("q_wc", r.q_wc);
  keep("p_ae", r.p_ae);
  keep("p_ce", r.p_ce);
  keep("p_gi", r.p_gi);
  keep("p_wc_ae", r.p_wc_ae);
  keep("p_wc_ce", r.p_wc_ce);
}

}  // namespace

absl::StatusOr<std::vector<double>> ParseSweepValues(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  std::vector<double> out;
  if (text.find(':') != absl::string_view::npos) {
    std::vector<absl::string_view> f = absl::StrSplit(text, ':');
    if (f.size() != 3 && f.size() != 4) {
      return absl::InvalidArgumentError(
          absl::StrCat("range must be lo:hi:log[:n] or lo:hi:lin[:n]; got '",
                       text, "'"));
    }
    double lo, hi;
    int n = kDefaultSweepPoints;
    if (absl::Status s = ParseNumber("range", f[0], &lo); !s.ok()) return s;
    if (absl::Status s = ParseNumber("range", f[1], &hi); !s.ok()) return s;
    if (f.size() == 4) {
      if (absl::Status s = ParseNumber("range", f[3], &n); !s.ok()) return s;
    }
    if (n < 1) return absl::InvalidArgumentError("range needs n >= 1");
    const bool log = f[2] == "log";
    if (!log && f[2] != "lin") {
      return absl::InvalidArgumentError(
          absl::StrCat("range spacing must be log or lin; got '", f[2], "'"));
    }
    if (log && !(lo > 0.0 && hi > 0.0)) {
      return absl::InvalidArgumentError("log range needs positive ends");
    }
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      out.push_back(log ? std::exp(std::log(lo) + t * (std::log(hi) -
                                                      std::log(lo)))
                        : lo + t * (hi - lo));
    }
    if (n > 1) out.back() = hi;
    return out;
  }
  for (const std::string& item : SplitList(text)) {
    double v;
    if (absl::Status s = ParseNumber("list", item, &v); !s.ok()) return s;
    out.push_back(v);
  }
  if (out.empty()) return absl::InvalidArgumentError("empty parameter list");
  return out;
}

absl::StatusOr<ExperimentSpec> ParseExperimentSpec(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    return absl::InvalidArgumentError(e.what());
  }
  const auto exp = tree.get_child_optional("experiment");
  if (!exp) return absl::InvalidArgumentError("missing [experiment] section");

  ExperimentSpec spec;
  std::map<std::string, std::string> canonical;
  for (const auto& [key, node] : *exp) {
    if (!ExperimentKeys().count(key)) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown key experiment.", key));
    }
    const std::string v(absl::StripAsciiWhitespace(node.data()));
    if (key != "seed" && key != "output") {
      canonical[absl::StrCat("experiment.", key)] = v;
    }
    absl::Status s;
    if (key == "scenario") {
      if (v == "dataset") {
        spec.scenario = Scenario::kDataset;
      } else if (v == "synthetic") {
        spec.scenario = Scenario::kSynthetic;
      } else if (v == "grid") {
        spec.scenario = Scenario::kGrid;
      } else {
        s = absl::InvalidArgumentError(absl::StrCat("unknown scenario ", v));
      }
    } else if (key == "poi_file") {
      spec.poi_file = v;
    } else if (key == "city_size") {
      s = ParseNumber(key, v, &spec.city_size);
    } else if (key == "city_seed") {
      s = ParseNumber(key, v, &spec.city_seed);
    } else if (key == "city_extent_km") {
      s = ParseNumber(key, v, &spec.city_extent_km);
    } else if (key == "grid_side") {
      s = ParseNumber(key, v, &spec.grid_side);
    } else if (key == "cell_km") {
      s = ParseNumber(key, v, &spec.cell_km);
    } else if (key == "grid_tags") {
      spec.grid_tags = SplitList(v);
    } else if (key == "mechanisms") {
      for (const std::string& name : SplitList(v)) {
        if (FindMechanism(name) == nullptr) {
          return absl::InvalidArgumentError(
              absl::StrCat("unknown mechanism ", name));
        }
        MechanismSweep sweep;
        sweep.name = name;
        spec.mechanisms.push_back(std::move(sweep));
      }
    } else if (key == "metrics") {
      spec.metrics = SplitList(v);
      for (const std::string& m : spec.metrics) {
        if (!MetricNames().count(m)) {
          return absl::InvalidArgumentError(absl::StrCat("unknown metric ", m));
        }
      }
    } else if (key == "samples") {
      s = ParseNumber(key, v, &spec.samples);
    } else if (key == "seed") {
      s = ParseNumber(key, v, &spec.seed);
    } else if (key == "remap") {
      if (v == "none") {
        spec.remap = RemapMode::kNone;
      } else if (v == "optimal") {
        spec.remap = RemapMode::kOptimal;
      } else if (v == "constrained") {
        spec.remap = RemapMode::kConstrained;
      } else {
        s = absl::InvalidArgumentError(absl::StrCat("unknown remap ", v));
      }
    } else if (key == "q_max") {
      double q;
      s = ParseNumber(key, v, &q);
      spec.q_max = q;
    } else if (key == "dq") {
      spec.dq = v;
    } else if (key == "dp") {
      spec.dp = v;
    } else if (key == "estimates") {
      if (v != "plane" && v != "candidates") {
        s = absl::InvalidArgumentError(absl::StrCat("unknown estimates ", v));
      }
      spec.candidate_estimates = v == "candidates";
    } else if (key == "output") {
      spec.output = v;
    }
    if (!s.ok()) return s;
  }

  // Bounded runs default to the constrained remap; grids to candidate
  // estimates.
  if (spec.q_max.has_value() && !exp->get_child_optional("remap")) {
    spec.remap = RemapMode::kConstrained;
  }
  if (spec.scenario == Scenario::kGrid &&
      !exp->get_child_optional("estimates")) {
    spec.candidate_estimates = true;
  }
  if (spec.samples < 1) {
    return absl::InvalidArgumentError("samples must be >= 1");
  }
  if (spec.q_max.has_value() && !(*spec.q_max > 0.0)) {
    return absl::InvalidArgumentError("q_max must be positive");
  }
  if (spec.scenario == Scenario::kDataset && spec.poi_file.empty()) {
    return absl::InvalidArgumentError("dataset scenario needs poi_file");
  }
  for (const std::string* d : {&spec.dq, &spec.dp}) {
    if (*d != "euclidean" && *d != "squared" && *d != "tags") {
      return absl::InvalidArgumentError(absl::StrCat("unknown distance ", *d));
    }
  }
  if (spec.mechanisms.empty()) {
    return absl::InvalidArgumentError("no mechanisms listed");
  }

  for (const auto& [section, node] : tree) {
    if (section == "experiment") continue;
    const MechanismKeys* keys = FindMechanism(section);
    if (keys == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown section [", section, "]"));
    }
    bool listed = false;
    for (const MechanismSweep& m : spec.mechanisms) listed |= m.name == section;
    if (!listed) {
      return absl::InvalidArgumentError(
          absl::StrCat("section [", section, "] is not in mechanisms"));
    }
    for (const auto& [key, value] : node) {
      const bool is_fraction =
          keys->fraction_key != nullptr && key == keys->fraction_key;
      if (key != keys->key && !is_fraction) {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown key ", section, ".", key));
      }
      const std::string v(absl::StripAsciiWhitespace(value.data()));
      canonical[absl::StrCat(section, ".", key)] = v;
      absl::StatusOr<std::vector<double>> values = ParseSweepValues(v);
      if (!values.ok()) return values.status();
      for (MechanismSweep& m : spec.mechanisms) {
        if (m.name != section) continue;
        if (!m.values.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("[", section, "] sets more than one parameter"));
        }
        m.values = *values;
        m.fraction_of_q_star = is_fraction;
      }
    }
  }
  for (const MechanismSweep& m : spec.mechanisms) {
    if (m.values.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("no parameter values for ", m.name));
    }
  }
  for (const auto& [k, v] : canonical) {
    absl::StrAppend(&spec.canonical, k, "=", v, "\n");
  }
  return spec;
}

absl::StatusOr<ExperimentSpec> LoadExperimentSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return ParseExperimentSpec(in);
}

uint64_t SpecHash(const ExperimentSpec& spec) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : spec.canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t RowSeed(uint64_t master, uint64_t row) {
  // SplitMix64 finalizer over a row-dependent offset.
  uint64_t z = master + 0x9e3779b97f4a7c15ull * (row + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

absl::StatusOr<Prior> LoadScenario(const ExperimentSpec& spec) {
  switch (spec.scenario) {
    case Scenario::kDataset: {
      std::ifstream in(spec.poi_file);
      if (!in) {
        return absl::NotFoundError(absl::StrCat("cannot open ", spec.poi_file));
      }
      return ReadPoiCsv(in);
    }
    case Scenario::kSynthetic:
      return BuildSyntheticCity(spec.city_size, spec.city_seed,
                                spec.city_extent_km);
    case Scenario::kGrid:
      return spec.grid_tags.empty()
                 ? BuildGridScenario(spec.grid_side, spec.cell_km)
                 : BuildGridScenario(spec.grid_side, spec.cell_km,
                                     spec.grid_tags);
  }
  return absl::InternalError("unknown scenario");
}

SweepRow RunSweepPoint(const ExperimentSpec& spec, const Prior& prior,
                       const std::string& mechanism, double value,
                       bool fraction_of_q_star, uint64_t seed) {
  SweepRow row;
  row.mechanism = mechanism;
  row.param = value;
  absl::StatusOr<MetricReport> r =
      EvaluatePoint(spec, prior, mechanism, value, fraction_of_q_star, seed);
  if (!r.ok()) {
    row.provenance = absl::StrCat(
        "error(",
        absl::StrReplaceAll(r.status().ToString(),
                            {{",", ";"}, {"\n", " "}, {"\r", " "}}),
        ")");
    return row;
  }
  row.report = *r;
  KeepRequestedMetrics(spec.metrics, row.report);
  row.provenance = ProvenanceString(*r);
  return row;
}

absl::StatusOr<std::vector<SweepRow>> RunSweep(const ExperimentSpec& spec,
                                               int threads) {
  absl::StatusOr<Prior> prior = LoadScenario(spec);
  if (!prior.ok()) return prior.status();

  struct Task {
    const MechanismSweep* sweep;
    double value;
  };
  std::vector<Task> tasks;
  for (const MechanismSweep& m : spec.mechanisms) {
    for (double v : m.values) tasks.push_back({&m, v});
  }
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      rows[i] = RunSweepPoint(spec, *prior, tasks[i].sweep->name,
                              tasks[i].value,
                              tasks[i].sweep->fraction_of_q_star,
                              RowSeed(spec.seed, i));
    }
  };
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(std::max<size_t>(
                                       1, tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  return rows;
}

}  // namespace lppm
