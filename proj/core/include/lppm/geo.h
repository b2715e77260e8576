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

#ifndef LPPM_GEO_H_
#define LPPM_GEO_H_

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/types/span.h"

namespace lppm {

// Mean Earth radius used by the Haversine projection.
inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

// Rejects coordinates outside [-90, 90] x [-180, 180] or non-finite values.
absl::StatusOr<GeoPoint> MakeGeoPoint(double lat, double lon);

// Local Cartesian coordinates in kilometers, east/north of a reference.
struct PlanePoint {
  double x_km = 0.0;
  double y_km = 0.0;

  friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
  friend PlanePoint operator+(PlanePoint a, PlanePoint b) {
    return {a.x_km + b.x_km, a.y_km + b.y_km};
  }
  friend PlanePoint operator-(PlanePoint a, PlanePoint b) {
    return {a.x_km - b.x_km, a.y_km - b.y_km};
  }
  friend PlanePoint operator*(double s, PlanePoint a) {
    return {s * a.x_km, s * a.y_km};
  }
};

inline double Norm(PlanePoint p) { return std::hypot(p.x_km, p.y_km); }
inline double EuclideanKm(PlanePoint a, PlanePoint b) { return Norm(a - b); }

// Great-circle distance between two coordinates.
double HaversineKm(const GeoPoint& a, const GeoPoint& b);

// Projects `p` to east/north offsets around `reference`. The north offset is
// the meridian arc between the two latitudes; the east offset is the
// Haversine distance along the parallel of `p`. Both carry the sign of the
// coordinate difference, so the map is monotone in each coordinate.
PlanePoint HaversineProject(const GeoPoint& p, const GeoPoint& reference);

// A point that may also be a member of a PoiSet. `id` is the POI index, or
// kNoId for free points in the plane (remapped outputs, estimates).
struct Location {
  static constexpr int kNoId = -1;

  PlanePoint point;
  int id = kNoId;

  bool has_id() const { return id != kNoId; }
  friend bool operator==(const Location&, const Location&) = default;
};

enum class DistanceKind { kEuclidean, kSquaredEuclidean, kTagHamming };

// Point-wise loss/privacy distance. TagHamming is defined on POI ids only:
// it compares tag labels looked up by id and rejects free points.
class DistanceFn {
 public:
  static DistanceFn Euclidean();
  static DistanceFn SquaredEuclidean();
  static DistanceFn TagHamming(std::vector<std::string> tags);

  DistanceKind kind() const { return kind_; }
  std::string name() const;

  absl::StatusOr<double> operator()(const Location& a, const Location& b) const;

  // Only valid for the geometric kinds.
  double Geometric(PlanePoint a, PlanePoint b) const;

  const std::vector<std::string>& tags() const { return *tags_; }

 private:
  DistanceFn(DistanceKind kind,
             std::shared_ptr<const std::vector<std::string>> tags)
      : kind_(kind), tags_(std::move(tags)) {}

  DistanceKind kind_;
  std::shared_ptr<const std::vector<std::string>> tags_;
};

bool SameDistance(const DistanceFn& a, const DistanceFn& b);

}  // namespace lppm

#endif  // LPPM_GEO_H_
