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

#include "lppm/geo.h"

#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace lppm {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double HaversineCentralAngle(double lat1, double lon1, double lat2,
                             double lon2) {
  const double dlat = (lat2 - lat1) * kDegToRad;
  const double dlon = (lon2 - lon1) * kDegToRad;
  const double s_lat = std::sin(dlat / 2);
  const double s_lon = std::sin(dlon / 2);
  const double h = s_lat * s_lat + std::cos(lat1 * kDegToRad) *
                                       std::cos(lat2 * kDegToRad) * s_lon *
                                       s_lon;
  return 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace

absl::StatusOr<GeoPoint> MakeGeoPoint(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 ||
      lat > 90.0 || lon < -180.0 || lon > 180.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid coordinate (", lat, ", ", lon, ")"));
  }
  return GeoPoint{lat, lon};
}

double HaversineKm(const GeoPoint& a, const GeoPoint& b) {
  return kEarthRadiusKm * HaversineCentralAngle(a.lat, a.lon, b.lat, b.lon);
}

PlanePoint HaversineProject(const GeoPoint& p, const GeoPoint& reference) {
  const double north =
      kEarthRadiusKm * HaversineCentralAngle(reference.lat, reference.lon,
                                             p.lat, reference.lon);
  const double east = kEarthRadiusKm * HaversineCentralAngle(
                                           p.lat, reference.lon, p.lat, p.lon);
  return {std::copysign(east, p.lon - reference.lon),
          std::copysign(north, p.lat - reference.lat)};
}

DistanceFn DistanceFn::Euclidean() {
  return DistanceFn(DistanceKind::kEuclidean, nullptr);
}

DistanceFn DistanceFn::SquaredEuclidean() {
  return DistanceFn(DistanceKind::kSquaredEuclidean, nullptr);
}

DistanceFn DistanceFn::TagHamming(std::vector<std::string> tags) {
  return DistanceFn(
      DistanceKind::kTagHamming,
      std::make_shared<const std::vector<std::string>>(std::move(tags)));
}

std::string DistanceFn::name() const {
  switch (kind_) {
    case DistanceKind::kEuclidean:
      return "euclidean";
    case DistanceKind::kSquaredEuclidean:
      return "squared-euclidean";
    case DistanceKind::kTagHamming:
      return "tag-hamming";
  }
  return "unknown";
}

double DistanceFn::Geometric(PlanePoint a, PlanePoint b) const {
  const double d = EuclideanKm(a, b);
  return kind_ == DistanceKind::kSquaredEuclidean ? d * d : d;
}

absl::StatusOr<double> DistanceFn::operator()(const Location& a,
                                              const Location& b) const {
  if (kind_ != DistanceKind::kTagHamming) return Geometric(a.point, b.point);
  const int n = static_cast<int>(tags_->size());
  if (!a.has_id() || !b.has_id() || a.id >= n || b.id >= n) {
    return absl::InvalidArgumentError(
        "tag distance needs tagged locations; got an untagged point");
  }
  return (*tags_)[a.id] == (*tags_)[b.id] ? 0.0 : 1.0;
}

bool SameDistance(const DistanceFn& a, const DistanceFn& b) {
  if (a.kind() != b.kind()) return false;
  if (a.kind() != DistanceKind::kTagHamming) return true;
  return a.tags() == b.tags();
}

}  // namespace lppm
