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

#include "lppm/samplers.h"

#include <algorithm>
#include <limits>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace lppm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

absl::Status CheckPositive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must be positive and finite; got %.6g", what, v));
  }
  return absl::OkStatus();
}

}  // namespace

double NoiseSampler::GeoIndLevel() const {
  return std::isfinite(SupportRadius())
             ? 0.0
             : std::numeric_limits<double>::quiet_NaN();
}

absl::StatusOr<PlanePoint> IsotropicSampler::Draw(PlanePoint x,
                                                  Rng& rng) const {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  const double r = SampleRadius(rng);
  const double theta = angle(rng);
  return PlanePoint{x.x_km + r * std::cos(theta), x.y_km + r * std::sin(theta)};
}

absl::StatusOr<std::shared_ptr<const LaplaceSampler>> LaplaceSampler::Create(
    double epsilon) {
  if (absl::Status s = CheckPositive(epsilon, "epsilon"); !s.ok()) return s;
  return std::shared_ptr<const LaplaceSampler>(new LaplaceSampler(epsilon));
}

absl::StatusOr<double> LaplaceSampler::RadiusForQuantile(double p) const {
  if (!(p >= 0.0 && p < 1.0)) {
    return absl::InvalidArgumentError("quantile must be in [0, 1)");
  }
  absl::StatusOr<double> w = LambertWm1((p - 1.0) / std::numbers::e);
  if (!w.ok()) return w.status();
  return std::max(0.0, -(*w + 1.0) / epsilon_);
}

double LaplaceSampler::SampleRadius(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Always in range: p is drawn from [0, 1).
  return *RadiusForQuantile(unit(rng));
}

double LaplaceSampler::PlanarDensity(double r) const {
  return epsilon_ * epsilon_ / kTwoPi * std::exp(-epsilon_ * r);
}

double LaplaceSampler::LogPlanarDensity(double r) const {
  return 2.0 * std::log(epsilon_) - std::log(kTwoPi) - epsilon_ * r;
}

double LaplaceSampler::SupportRadius() const { return kInf; }

double LaplaceSampler::MassWithin(double radius) const {
  if (radius <= 0.0) return 0.0;
  const double er = epsilon_ * radius;
  return 1.0 - (1.0 + er) * std::exp(-er);
}

GaussianSampler::GaussianSampler(double mean_radius)
    : mean_radius_(mean_radius),
      sigma_(mean_radius / std::sqrt(std::numbers::pi / 2.0)) {}

absl::StatusOr<std::shared_ptr<const GaussianSampler>> GaussianSampler::Create(
    double mean_radius) {
  if (absl::Status s = CheckPositive(mean_radius, "mean radius"); !s.ok()) {
    return s;
  }
  return std::shared_ptr<const GaussianSampler>(
      new GaussianSampler(mean_radius));
}

double GaussianSampler::SampleRadius(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return sigma_ * std::sqrt(-2.0 * std::log1p(-unit(rng)));
}

double GaussianSampler::PlanarDensity(double r) const {
  return std::exp(LogPlanarDensity(r));
}

double GaussianSampler::LogPlanarDensity(double r) const {
  return -r * r / (2.0 * sigma_ * sigma_) - std::log(kTwoPi * sigma_ * sigma_);
}

double GaussianSampler::SupportRadius() const { return kInf; }

double GaussianSampler::MassWithin(double radius) const {
  if (radius <= 0.0) return 0.0;
  return -std::expm1(-radius * radius / (2.0 * sigma_ * sigma_));
}

absl::StatusOr<std::shared_ptr<const CircularSampler>> CircularSampler::Create(
    double radius) {
  if (absl::Status s = CheckPositive(radius, "radius"); !s.ok()) return s;
  return std::shared_ptr<const CircularSampler>(new CircularSampler(radius));
}

double CircularSampler::SampleRadius(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return radius_ * std::sqrt(unit(rng));
}

double CircularSampler::PlanarDensity(double r) const {
  return r <= radius_ ? 1.0 / (std::numbers::pi * radius_ * radius_) : 0.0;
}

double CircularSampler::LogPlanarDensity(double r) const {
  return r <= radius_ ? -std::log(std::numbers::pi * radius_ * radius_) : -kInf;
}

double CircularSampler::MassWithin(double radius) const {
  if (radius <= 0.0) return 0.0;
  return std::min(1.0, (radius * radius) / (radius_ * radius_));
}

std::string TruncatedSampler::name() const {
  return absl::StrCat(base_->name(), "-truncated");
}

absl::StatusOr<PlanePoint> TruncatedSampler::Draw(PlanePoint x,
                                                  Rng& rng) const {
  for (int64_t i = 0; i < max_draws_; ++i) {
    absl::StatusOr<PlanePoint> z = base_->Draw(x, rng);
    if (!z.ok()) return z.status();
    if (EuclideanKm(*z, x) <= q_max_) return z;
  }
  return absl::ResourceExhaustedError(absl::StrCat(
      "no sample within ", q_max_, " km after ", max_draws_, " draws"));
}

double TruncatedSampler::Density(PlanePoint z, PlanePoint x) const {
  if (EuclideanKm(z, x) > q_max_) return 0.0;
  return base_->Density(z, x) / acceptance_;
}

double TruncatedSampler::LogDensity(PlanePoint z, PlanePoint x) const {
  if (EuclideanKm(z, x) > q_max_) return -kInf;
  return base_->LogDensity(z, x) - std::log(acceptance_);
}

double TruncatedSampler::SupportRadius() const {
  return std::min(q_max_, base_->SupportRadius());
}

double TruncatedSampler::MassWithin(double radius) const {
  return std::min(1.0, base_->MassWithin(std::min(radius, q_max_)) /
                           acceptance_);
}

absl::StatusOr<NoiseSamplerPtr> Truncate(NoiseSamplerPtr base, double q_max,
                                         int64_t max_draws) {
  if (base == nullptr) return absl::InvalidArgumentError("null sampler");
  if (absl::Status s = CheckPositive(q_max, "q_max"); !s.ok()) return s;
  const double acceptance = base->MassWithin(q_max);
  if (!(acceptance >= 1e-6)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "acceptance probability %.3g within %.6g km is below 1e-6", acceptance,
        q_max));
  }
  return NoiseSamplerPtr(
      new TruncatedSampler(std::move(base), q_max, acceptance, max_draws));
}

}  // namespace lppm
