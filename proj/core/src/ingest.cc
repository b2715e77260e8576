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

#include "lppm/ingest.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace lppm {
namespace {

bool IsBlank(absl::string_view line) {
  return absl::StripAsciiWhitespace(line).empty();
}

struct PointLess {
  bool operator()(const PlanePoint& a, const PlanePoint& b) const {
    return a.x_km != b.x_km ? a.x_km < b.x_km : a.y_km < b.y_km;
  }
};

}  // namespace

bool ParseCheckinLine(absl::string_view line, CheckinRecord& out) {
  line = absl::StripTrailingAsciiWhitespace(line);
  std::vector<absl::string_view> f = absl::StrSplit(line, '\t');
  if (f.size() != 5) return false;
  double lat, lon;
  if (!absl::SimpleAtod(f[2], &lat) || !absl::SimpleAtod(f[3], &lon)) {
    return false;
  }
  if (!MakeGeoPoint(lat, lon).ok()) return false;
  if (f[0].empty() || f[4].empty()) return false;
  out.user_id = std::string(f[0]);
  out.timestamp = std::string(f[1]);
  out.lat = lat;
  out.lon = lon;
  out.location_id = std::string(f[4]);
  return true;
}

absl::StatusOr<ParsedCheckins> ParseCheckins(std::istream& in) {
  if (!in) return absl::UnavailableError("unreadable check-in stream");
  ParsedCheckins out;
  std::string line;
  CheckinRecord r;
  while (std::getline(in, line)) {
    if (IsBlank(line)) continue;
    if (ParseCheckinLine(line, r)) {
      out.records.push_back(r);
    } else {
      ++out.malformed;
    }
  }
  if (in.bad()) return absl::DataLossError("error while reading check-ins");
  return out;
}

absl::StatusOr<int64_t> ForEachCheckin(
    const std::string& path,
    const std::function<void(const CheckinRecord&)>& sink) {
  // gzopen reads uncompressed files transparently.
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path));
  }
  gzbuffer(file, 1 << 20);
  int64_t malformed = 0;
  std::string line;
  std::vector<char> buf(1 << 16);
  CheckinRecord r;
  auto flush = [&]() {
    if (IsBlank(line)) return;
    if (ParseCheckinLine(line, r)) {
      sink(r);
    } else {
      ++malformed;
    }
  };
  while (gzgets(file, buf.data(), static_cast<int>(buf.size())) != nullptr) {
    absl::string_view chunk(buf.data());
    line.append(chunk.data(), chunk.size());
    if (!chunk.empty() && chunk.back() == '\n') {
      flush();
      line.clear();
    }
  }
  int err = Z_OK;
  const char* msg = gzerror(file, &err);
  const std::string error = err != Z_OK && err != Z_STREAM_END ? msg : "";
  gzclose(file);
  if (!error.empty()) {
    return absl::DataLossError(absl::StrCat(path, ": ", error));
  }
  flush();
  return malformed;
}

absl::StatusOr<Region> MakeRegion(double lat_min, double lat_max,
                                  double lon_min, double lon_max) {
  if (!MakeGeoPoint(lat_min, lon_min).ok() ||
      !MakeGeoPoint(lat_max, lon_max).ok()) {
    return absl::InvalidArgumentError("region corner out of range");
  }
  if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
    return absl::InvalidArgumentError("region must have min < max on both axes");
  }
  return Region{lat_min, lat_max, lon_min, lon_max};
}

absl::StatusOr<Region> ParseRegion(absl::string_view text) {
  std::vector<absl::string_view> f = absl::StrSplit(text, ',');
  if (f.size() != 4) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected lat0,lat1,lon0,lon1; got '", text, "'"));
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    if (!absl::SimpleAtod(absl::StripAsciiWhitespace(f[i]), &v[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("not a number: '", f[i], "'"));
    }
  }
  return MakeRegion(std::min(v[0], v[1]), std::max(v[0], v[1]),
                    std::min(v[2], v[3]), std::max(v[2], v[3]));
}

Region SanFranciscoRegion() {
  return Region{37.5395, 37.7910, -122.5153, -122.3789};
}

void PriorBuilder::Add(const CheckinRecord& r) {
  if (!region_.Contains(r.lat, r.lon)) return;
  ++in_region_;
  auto [it, inserted] =
      index_.try_emplace(r.location_id, static_cast<int>(entries_.size()));
  if (inserted) {
    ids_.push_back(r.location_id);
    Entry fresh;
    fresh.where = GeoPoint{r.lat, r.lon};
    entries_.push_back(std::move(fresh));
  }
  Entry& e = entries_[it->second];
  ++e.events;
  if (mode_ == CountingMode::kDistinctUsers) e.users.insert(r.user_id);
}

absl::StatusOr<PoiPrior> PriorBuilder::Finish() const {
  if (in_region_ == 0) {
    return absl::FailedPreconditionError("no check-ins inside the region");
  }
  std::vector<PlanePoint> points;
  std::vector<int64_t> counts;
  std::vector<std::vector<std::string>> ids;
  std::map<PlanePoint, int, PointLess> by_point;
  int64_t merged = 0;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    const PlanePoint p = HaversineProject(e.where, reference_);
    const int64_t c = mode_ == CountingMode::kCheckins
                          ? e.events
                          : static_cast<int64_t>(e.users.size());
    auto [it, inserted] =
        by_point.try_emplace(p, static_cast<int>(points.size()));
    if (inserted) {
      points.push_back(p);
      counts.push_back(c);
      ids.push_back({ids_[i]});
    } else {
      ++merged;
      counts[it->second] += c;
      ids[it->second].push_back(ids_[i]);
    }
  }
  absl::StatusOr<PoiSetPtr> poi = PoiSet::Create(std::move(points));
  if (!poi.ok()) return poi.status();
  std::vector<double> weights(counts.begin(), counts.end());
  absl::StatusOr<Prior> prior = Prior::FromWeights(*poi, weights);
  if (!prior.ok()) return prior.status();
  return PoiPrior{*std::move(prior), std::move(ids), std::move(counts),
                  in_region_, merged};
}

absl::StatusOr<PoiPrior> BuildPoiAndPrior(
    const std::vector<CheckinRecord>& records, const Region& region,
    const GeoPoint& reference, CountingMode mode) {
  if (absl::StatusOr<Region> ok = MakeRegion(region.lat_min, region.lat_max,
                                             region.lon_min, region.lon_max);
      !ok.ok()) {
    return ok.status();
  }
  PriorBuilder builder(region, reference, mode);
  for (const CheckinRecord& r : records) builder.Add(r);
  return builder.Finish();
}

std::vector<std::string> DefaultGridTags(int side) {
  static constexpr absl::string_view kFive[25] = {
      kHome, kHome, kPark, kShop, kCafe,  //
      kHome, kPark, kPark, kShop, kCafe,  //
      kShop, kShop, kCafe, kHome, kHome,  //
      kCafe, kPark, kShop, kHome, kPark,  //
      kHome, kCafe, kShop, kPark, kHome,
  };
  static constexpr absl::string_view kCycle[4] = {kHome, kPark, kShop, kCafe};
  std::vector<std::string> tags;
  if (side <= 0) return tags;
  tags.reserve(side * side);
  for (int i = 0; i < side * side; ++i) {
    tags.emplace_back(side == 5 ? kFive[i] : kCycle[i % 4]);
  }
  return tags;
}

absl::StatusOr<Prior> BuildGridScenario(int side, double cell_km,
                                        std::vector<std::string> tags) {
  if (side < 1) return absl::InvalidArgumentError("grid side must be >= 1");
  if (!(cell_km > 0.0) || !std::isfinite(cell_km)) {
    return absl::InvalidArgumentError("cell size must be positive");
  }
  if (static_cast<int>(tags.size()) != side * side) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "tag map has %d entries; the grid has %d cells",
        static_cast<int>(tags.size()), side * side));
  }
  for (const std::string& t : tags) {
    if (t.empty()) return absl::InvalidArgumentError("empty tag in tag map");
  }
  std::vector<PlanePoint> points;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      points.push_back({(c + 0.5) * cell_km, (r + 0.5) * cell_km});
    }
  }
  absl::StatusOr<PoiSetPtr> poi =
      PoiSet::Create(std::move(points), std::move(tags));
  if (!poi.ok()) return poi.status();
  return Prior::Uniform(*poi);
}

absl::StatusOr<Prior> BuildGridScenario(int side, double cell_km) {
  return BuildGridScenario(side, cell_km, DefaultGridTags(side));
}

absl::StatusOr<Prior> BuildSyntheticCity(int n, uint64_t seed,
                                         double extent_km) {
  if (n < 1) return absl::InvalidArgumentError("need at least one POI");
  if (!(extent_km > 0.0)) {
    return absl::InvalidArgumentError("extent must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int clusters = std::max(1, n / 20);
  std::vector<PlanePoint> centers;
  for (int k = 0; k < clusters; ++k) {
    centers.push_back({extent_km * unit(rng), extent_km * unit(rng)});
  }
  std::normal_distribution<double> spread(0.0, extent_km / 20.0);
  std::set<PlanePoint, PointLess> used;
  std::vector<PlanePoint> points;
  while (static_cast<int>(points.size()) < n) {
    const PlanePoint& c = centers[points.size() % clusters];
    PlanePoint p{std::clamp(c.x_km + spread(rng), 0.0, extent_km),
                 std::clamp(c.y_km + spread(rng), 0.0, extent_km)};
    if (used.insert(p).second) points.push_back(p);
  }
  // Heavy-tailed popularity: weight (rank + 1)^-1 over a random ranking.
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[i] = i;
  std::shuffle(rank.begin(), rank.end(), rng);
  std::vector<double> weights(n);
  for (int i = 0; i < n; ++i) weights[i] = 1.0 / (rank[i] + 1.0);
  absl::StatusOr<PoiSetPtr> poi = PoiSet::Create(std::move(points));
  if (!poi.ok()) return poi.status();
  return Prior::FromWeights(*poi, weights);
}

void WritePoiCsv(const Prior& prior, std::ostream& out) {
  out << "id,x_km,y_km,tag,prior_mass\n";
  const PoiSet& poi = prior.poi();
  for (int i = 0; i < poi.size(); ++i) {
    out << absl::StrFormat("%d,%.17g,%.17g,%s,%.17g\n", i, poi.point(i).x_km,
                           poi.point(i).y_km,
                           poi.has_tags() ? poi.tags()[i] : "", prior[i]);
  }
}

absl::StatusOr<Prior> ReadPoiCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      absl::StripTrailingAsciiWhitespace(line) !=
          "id,x_km,y_km,tag,prior_mass") {
    return absl::InvalidArgumentError("missing POI CSV header");
  }
  std::vector<PlanePoint> points;
  std::vector<std::string> tags;
  std::vector<double> mass;
  int tagged = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    std::vector<absl::string_view> f =
        absl::StrSplit(absl::StripTrailingAsciiWhitespace(line), ',');
    int id;
    double x, y, p;
    if (f.size() != 5 || !absl::SimpleAtoi(f[0], &id) ||
        !absl::SimpleAtod(f[1], &x) || !absl::SimpleAtod(f[2], &y) ||
        !absl::SimpleAtod(f[4], &p)) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed POI CSV line ", line_no));
    }
    if (id != static_cast<int>(points.size())) {
      return absl::InvalidArgumentError(
          absl::StrCat("POI ids must be 0..n-1 in order (line ", line_no, ")"));
    }
    points.push_back({x, y});
    tags.emplace_back(f[3]);
    if (!f[3].empty()) ++tagged;
    mass.push_back(p);
  }
  if (tagged != 0 && tagged != static_cast<int>(tags.size())) {
    return absl::InvalidArgumentError("either every POI or none is tagged");
  }
  if (tagged == 0) tags.clear();
  absl::StatusOr<PoiSetPtr> poi =
      PoiSet::Create(std::move(points), std::move(tags));
  if (!poi.ok()) return poi.status();
  return Prior::Create(*poi, std::move(mass));
}

}  // namespace lppm
