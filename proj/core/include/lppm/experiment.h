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

#ifndef LPPM_EXPERIMENT_H_
#define LPPM_EXPERIMENT_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "lppm/metrics.h"
#include "lppm/model.h"
#include "lppm/monte_carlo.h"

namespace lppm {

enum class Scenario {
  kDataset,    // POI/prior CSV written by `lppm ingest`
  kSynthetic,  // BuildSyntheticCity
  kGrid,       // tagged square grid with a uniform prior
};

// Parameter values for one mechanism, in the mechanism's own unit:
//   laplace      epsilon (1/km)       gaussian  mean radius (km)
//   circular     radius (km)          coin      average loss (km)
//   exponential  b (1/km)             ba        b (1/km)
//   shokri       loss budget (km)
// `fraction_of_q_star` marks coin and shokri values given as multiples of
// Q* instead of km.
struct MechanismSweep {
  std::string name;
  std::vector<double> values;
  bool fraction_of_q_star = false;
};

inline constexpr int kDefaultSweepPoints = 20;

// Parses "lo:hi:log[:n]", "lo:hi:lin[:n]", a comma list or one number.
// n defaults to kDefaultSweepPoints.
absl::StatusOr<std::vector<double>> ParseSweepValues(absl::string_view text);

struct ExperimentSpec {
  Scenario scenario = Scenario::kSynthetic;
  std::string poi_file;
  int city_size = 200;
  uint64_t city_seed = 1;
  double city_extent_km = 10.0;
  int grid_side = 5;
  double cell_km = 1.0;
  std::vector<std::string> grid_tags;  // empty: default layout

  std::vector<MechanismSweep> mechanisms;
  std::vector<std::string> metrics;  // empty: all
  int64_t samples = 5000;
  uint64_t seed = 1;
  RemapMode remap = RemapMode::kOptimal;
  std::optional<double> q_max;
  std::string dq = "euclidean";
  std::string dp = "euclidean";
  bool candidate_estimates = false;
  std::string output;

  // Sorted key=value dump of the parsed file without the seed; the hash
  // in CSV headers is taken over it.
  std::string canonical;
};

// Flat INI: an [experiment] section plus one section per mechanism named
// in `mechanisms`. Unknown sections and keys are errors.
absl::StatusOr<ExperimentSpec> ParseExperimentSpec(std::istream& in);
absl::StatusOr<ExperimentSpec> LoadExperimentSpec(const std::string& path);

// 64-bit FNV-1a of spec.canonical.
uint64_t SpecHash(const ExperimentSpec& spec);

// Independent per-row seed derived from the master seed.
uint64_t RowSeed(uint64_t master, uint64_t row);

struct SweepRow {
  std::string mechanism;
  double param = 0.0;
  MetricReport report;
  // "exact", "mc(...)" or "error(<message>)"; never contains a comma.
  std::string provenance;

  bool is_error() const { return provenance.rfind("error", 0) == 0; }
};

// Field-wise equality of everything the CSV carries; NaN equals NaN.
bool SameCsvContent(const SweepRow& a, const SweepRow& b);

// Loads the scenario prior described by the spec.
absl::StatusOr<Prior> LoadScenario(const ExperimentSpec& spec);

// One row per (mechanism, value) pair in spec order. Rows run in parallel
// on `threads` workers (0: hardware concurrency) with seeds from RowSeed;
// failures become error rows. Only scenario-level problems are errors.
absl::StatusOr<std::vector<SweepRow>> RunSweep(const ExperimentSpec& spec,
                                               int threads = 0);

// Evaluates one sweep point against a loaded prior.
SweepRow RunSweepPoint(const ExperimentSpec& spec, const Prior& prior,
                       const std::string& mechanism, double value,
                       bool fraction_of_q_star, uint64_t seed);

inline constexpr absl::string_view kSweepCsvHeader =
    "mechanism,param,q_avg,q_wc,p_ae,p_ce,p_gi,p_wc_ae,p_wc_ce,provenance";

void WriteSweepCsv(const std::vector<SweepRow>& rows, uint64_t spec_hash,
                   uint64_t seed, std::ostream& out);
absl::Status WriteSweepCsvFile(const std::vector<SweepRow>& rows,
                               uint64_t spec_hash, uint64_t seed,
                               const std::string& path);
// Comment lines are skipped.
absl::StatusOr<std::vector<SweepRow>> ReadSweepCsv(std::istream& in);

}  // namespace lppm

#endif  // LPPM_EXPERIMENT_H_
