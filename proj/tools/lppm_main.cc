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

// lppm: ingest check-in datasets and run mechanism sweeps.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/strings/str_format.h"
#include "lppm/experiment.h"
#include "lppm/ingest.h"

namespace {

int Fail(const absl::Status& s) {
  std::cerr << "lppm: " << s << "\n";
  return 1;
}

int RunIngest(const std::string& dataset, const std::string& region_text,
              const std::string& mode, const std::string& out_path) {
  absl::StatusOr<lppm::Region> region =
      region_text.empty() ? lppm::SanFranciscoRegion()
                          : lppm::ParseRegion(region_text);
  if (!region.ok()) return Fail(region.status());
  const lppm::CountingMode counting = mode == "users"
                                          ? lppm::CountingMode::kDistinctUsers
                                          : lppm::CountingMode::kCheckins;
  lppm::PriorBuilder builder(*region, region->Center(), counting);
  absl::StatusOr<int64_t> malformed = lppm::ForEachCheckin(
      dataset, [&](const lppm::CheckinRecord& r) { builder.Add(r); });
  if (!malformed.ok()) return Fail(malformed.status());
  absl::StatusOr<lppm::PoiPrior> result = builder.Finish();
  if (!result.ok()) return Fail(result.status());

  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) return Fail(absl::UnavailableError("cannot write " + out_path));
  lppm::WritePoiCsv(result->prior, out);
  out.close();
  if (!out) return Fail(absl::DataLossError("error writing " + out_path));

  const auto mass = result->prior.mass();
  const double top = *std::max_element(mass.begin(), mass.end());
  std::cout << absl::StrFormat(
      "pois=%d checkins_in_region=%d top_prior=%.6f malformed_lines=%d\n",
      result->prior.size(), result->in_region_checkins, top, *malformed);
  if (result->merged_locations > 0) {
    std::cerr << absl::StrFormat(
        "lppm: warning: %d location ids shared coordinates with another id "
        "and were merged\n",
        result->merged_locations);
  }
  return 0;
}

int RunSweepCommand(const std::string& config, std::string out_path,
                    std::optional<uint64_t> seed, int threads,
                    bool force_grid) {
  absl::StatusOr<lppm::ExperimentSpec> spec = lppm::LoadExperimentSpec(config);
  if (!spec.ok()) return Fail(spec.status());
  if (force_grid) spec->scenario = lppm::Scenario::kGrid;
  if (seed.has_value()) spec->seed = *seed;
  if (out_path.empty()) out_path = spec->output;
  if (out_path.empty()) {
    return Fail(absl::InvalidArgumentError("no output path (--out)"));
  }
  absl::StatusOr<std::vector<lppm::SweepRow>> rows =
      lppm::RunSweep(*spec, threads);
  if (!rows.ok()) return Fail(rows.status());
  if (absl::Status s = lppm::WriteSweepCsvFile(*rows, lppm::SpecHash(*spec),
                                                spec->seed, out_path);
      !s.ok()) {
    return Fail(s);
  }
  int errors = 0;
  for (const lppm::SweepRow& r : *rows) {
    if (!r.is_error()) continue;
    ++errors;
    std::cerr << absl::StrFormat("lppm: %s param=%g: %s\n", r.mechanism,
                                 r.param, r.provenance);
  }
  std::cout << absl::StrFormat("rows=%d errors=%d out=%s\n", rows->size(),
                               errors, out_path);
  return errors == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location privacy mechanisms: ingest and sweeps"};
  app.require_subcommand(1);

  std::string dataset, region, mode = "checkins", out, config;
  std::optional<uint64_t> seed;
  int threads = 0;

  CLI::App* ingest = app.add_subcommand("ingest", "Build POIs and a prior");
  ingest->add_option("--dataset", dataset, "Check-in file (.txt or .gz)")
      ->required();
  ingest->add_option("--region", region,
                     "lat0,lat1,lon0,lon1 (default: San Francisco)");
  ingest->add_option("--mode", mode, "Counting mode")
      ->check(CLI::IsMember({"checkins", "users"}));
  ingest->add_option("--out", out, "POI CSV output")->required();
  ingest->add_option("--seed", seed, "Accepted for uniformity; unused");

  auto add_sweep_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Experiment INI file")->required();
    cmd->add_option("--out", out, "CSV output (default: the config output key)");
    cmd->add_option("--seed", seed, "Override the config seed");
    cmd->add_option("--threads", threads, "Worker threads (0: all cores)");
  };
  CLI::App* sweep = app.add_subcommand("sweep", "Run a mechanism sweep");
  add_sweep_options(sweep);
  CLI::App* grid = app.add_subcommand("grid", "Run a sweep on the tag grid");
  add_sweep_options(grid);

  CLI11_PARSE(app, argc, argv);

  if (ingest->parsed()) return RunIngest(dataset, region, mode, out);
  return RunSweepCommand(config, out, seed, threads, grid->parsed());
}
