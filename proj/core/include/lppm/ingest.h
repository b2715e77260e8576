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

#ifndef LPPM_INGEST_H_
#define LPPM_INGEST_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "lppm/geo.h"
#include "lppm/model.h"

namespace lppm {

// One line of a SNAP check-in file:
// user \t timestamp \t latitude \t longitude \t location_id.
struct CheckinRecord {
  std::string user_id;
  std::string timestamp;
  double lat = 0.0;
  double lon = 0.0;
  std::string location_id;

  friend bool operator==(const CheckinRecord&, const CheckinRecord&) = default;
};

// Returns false for malformed lines (wrong field count, unparsable or
// out-of-range coordinates).
bool ParseCheckinLine(absl::string_view line, CheckinRecord& out);

struct ParsedCheckins {
  std::vector<CheckinRecord> records;
  int64_t malformed = 0;
};

// Blank lines are ignored; malformed lines are counted and skipped.
absl::StatusOr<ParsedCheckins> ParseCheckins(std::istream& in);

// Streams a check-in file, plain or gzip-compressed, into `sink`. Returns the
// number of malformed lines.
absl::StatusOr<int64_t> ForEachCheckin(
    const std::string& path,
    const std::function<void(const CheckinRecord&)>& sink);

// Latitude/longitude box; membership is inclusive on every edge.
struct Region {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  bool Contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min &&
           lon <= lon_max;
  }
  GeoPoint Center() const {
    return {(lat_min + lat_max) / 2.0, (lon_min + lon_max) / 2.0};
  }
};

absl::StatusOr<Region> MakeRegion(double lat_min, double lat_max,
                                  double lon_min, double lon_max);
// "lat0,lat1,lon0,lon1"; each pair may be given in either order.
absl::StatusOr<Region> ParseRegion(absl::string_view text);

// The San Francisco box used for the check-in experiments.
Region SanFranciscoRegion();

enum class CountingMode {
  kCheckins,       // every check-in event counts
  kDistinctUsers,  // each user counts once per location
};

struct PoiPrior {
  Prior prior;
  // Source location ids per POI; several when ids shared coordinates.
  std::vector<std::vector<std::string>> location_ids;
  std::vector<int64_t> counts;
  int64_t in_region_checkins = 0;
  // Distinct location ids merged into an earlier id at the same point.
  int64_t merged_locations = 0;
};

// Accumulates in-region check-ins per location id. POIs are projected
// around `reference` and ordered by first appearance.
class PriorBuilder {
 public:
  PriorBuilder(Region region, GeoPoint reference, CountingMode mode)
      : region_(region), reference_(reference), mode_(mode) {}

  void Add(const CheckinRecord& r);
  // Fails when no check-in fell inside the region.
  absl::StatusOr<PoiPrior> Finish() const;

 private:
  struct Entry {
    GeoPoint where;
    int64_t events = 0;
    std::set<std::string> users;
  };

  Region region_;
  GeoPoint reference_;
  CountingMode mode_;
  std::map<std::string, int> index_;
  std::vector<std::string> ids_;
  std::vector<Entry> entries_;
  int64_t in_region_ = 0;
};

absl::StatusOr<PoiPrior> BuildPoiAndPrior(
    const std::vector<CheckinRecord>& records, const Region& region,
    const GeoPoint& reference, CountingMode mode = CountingMode::kCheckins);

// Tag labels used by the semantic grid.
inline constexpr absl::string_view kHome = "Home";
inline constexpr absl::string_view kPark = "Park";
inline constexpr absl::string_view kShop = "Shop";
inline constexpr absl::string_view kCafe = "Cafe";

// Row-major tags for a side x side grid. The 5x5 layout mixes the four
// labels so that neighbours usually differ; other sides cycle the labels.
std::vector<std::string> DefaultGridTags(int side);

// side * side tagged POIs at cell centers ((c + 1/2) cell_km,
// (r + 1/2) cell_km), row-major, with a uniform prior.
absl::StatusOr<Prior> BuildGridScenario(int side, double cell_km,
                                        std::vector<std::string> tags);
absl::StatusOr<Prior> BuildGridScenario(int side = 5, double cell_km = 1.0);

// Clustered random POIs with a heavy-tailed prior over an extent_km square;
// a desk-scale stand-in for a city. Deterministic in `seed`.
absl::StatusOr<Prior> BuildSyntheticCity(int n, uint64_t seed,
                                         double extent_km = 10.0);

// `id,x_km,y_km,tag,prior_mass`; the tag column is empty for untagged sets.
void WritePoiCsv(const Prior& prior, std::ostream& out);
absl::StatusOr<Prior> ReadPoiCsv(std::istream& in);

}  // namespace lppm

#endif  // LPPM_INGEST_H_
