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

#ifndef LPPM_SAMPLERS_H_
#define LPPM_SAMPLERS_H_

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "absl/status/statusor.h"
#include "lppm/geo.h"

namespace lppm {

using Rng = std::mt19937_64;

// Lower branch W_{-1} of the Lambert W function: the w <= -1 solving
// w e^w = v for v in [-1/e, 0).
absl::StatusOr<double> LambertWm1(double v);

// A continuous mechanism: draws z given x and evaluates the density
// f(z|x) pointwise.
class NoiseSampler {
 public:
  virtual ~NoiseSampler() = default;

  virtual std::string name() const = 0;
  virtual absl::StatusOr<PlanePoint> Draw(PlanePoint x, Rng& rng) const = 0;
  virtual double Density(PlanePoint z, PlanePoint x) const = 0;
  // -inf where the density is zero.
  virtual double LogDensity(PlanePoint z, PlanePoint x) const {
    return std::log(Density(z, x));
  }
  // Largest possible |z - x|; +inf for unbounded noise.
  virtual double SupportRadius() const = 0;
  // P(|z - x| <= radius).
  virtual double MassWithin(double radius) const = 0;
  // Analytic P_GI = 1/epsilon when the sampler has a known guarantee, 0 when
  // its support is bounded (no finite epsilon), NaN when unknown.
  virtual double GeoIndLevel() const;
};

using NoiseSamplerPtr = std::shared_ptr<const NoiseSampler>;

// Rotation-invariant noise: uniform angle, radius from a 1-D law.
class IsotropicSampler : public NoiseSampler {
 public:
  absl::StatusOr<PlanePoint> Draw(PlanePoint x, Rng& rng) const override;
  double Density(PlanePoint z, PlanePoint x) const override {
    return PlanarDensity(EuclideanKm(z, x));
  }
  double LogDensity(PlanePoint z, PlanePoint x) const override {
    return LogPlanarDensity(EuclideanKm(z, x));
  }

  virtual double SampleRadius(Rng& rng) const = 0;
  // Density on the plane at distance r from the center.
  virtual double PlanarDensity(double r) const = 0;
  virtual double LogPlanarDensity(double r) const {
    return std::log(PlanarDensity(r));
  }
  virtual double MeanRadius() const = 0;
};

// Planar Laplace: density eps^2 / (2 pi) e^{-eps r}. The radius is drawn as
// r = -(W_{-1}((p - 1) / e) + 1) / eps with p uniform in [0, 1).
class LaplaceSampler : public IsotropicSampler {
 public:
  static absl::StatusOr<std::shared_ptr<const LaplaceSampler>> Create(
      double epsilon);

  std::string name() const override { return "laplace"; }
  double SampleRadius(Rng& rng) const override;
  double PlanarDensity(double r) const override;
  double LogPlanarDensity(double r) const override;
  double MeanRadius() const override { return 2.0 / epsilon_; }
  double SupportRadius() const override;
  double MassWithin(double radius) const override;
  double GeoIndLevel() const override { return 1.0 / epsilon_; }

  // Radius for a given uniform draw p.
  absl::StatusOr<double> RadiusForQuantile(double p) const;
  double epsilon() const { return epsilon_; }

 private:
  explicit LaplaceSampler(double epsilon) : epsilon_(epsilon) {}
  double epsilon_;
};

// Bivariate isotropic Gaussian parameterized by its mean displacement; the
// radius is Rayleigh with scale mean_radius / sqrt(pi / 2).
class GaussianSampler : public IsotropicSampler {
 public:
  static absl::StatusOr<std::shared_ptr<const GaussianSampler>> Create(
      double mean_radius);

  std::string name() const override { return "gaussian"; }
  double SampleRadius(Rng& rng) const override;
  double PlanarDensity(double r) const override;
  double LogPlanarDensity(double r) const override;
  double MeanRadius() const override { return mean_radius_; }
  double SupportRadius() const override;
  double MassWithin(double radius) const override;
  double sigma() const { return sigma_; }

 private:
  explicit GaussianSampler(double mean_radius);
  double mean_radius_;
  double sigma_;
};

// Uniform on the disk of radius R: radius R sqrt(p), mean radius 2R/3.
class CircularSampler : public IsotropicSampler {
 public:
  static absl::StatusOr<std::shared_ptr<const CircularSampler>> Create(
      double radius);

  std::string name() const override { return "circular"; }
  double SampleRadius(Rng& rng) const override;
  double PlanarDensity(double r) const override;
  double LogPlanarDensity(double r) const override;
  double MeanRadius() const override { return 2.0 * radius_ / 3.0; }
  double SupportRadius() const override { return radius_; }
  double MassWithin(double radius) const override;

 private:
  explicit CircularSampler(double radius) : radius_(radius) {}
  double radius_;
};

// Reports x unchanged. The density is an atom: 1 at z == x, 0 elsewhere.
class PointMassSampler : public NoiseSampler {
 public:
  std::string name() const override { return "none"; }
  absl::StatusOr<PlanePoint> Draw(PlanePoint x, Rng&) const override {
    return x;
  }
  double Density(PlanePoint z, PlanePoint x) const override {
    return z == x ? 1.0 : 0.0;
  }
  double SupportRadius() const override { return 0.0; }
  double MassWithin(double) const override { return 1.0; }
};

// Rejection-samples `base` until |z - x| <= q_max; the density is the base
// density renormalized on the disk.
class TruncatedSampler : public NoiseSampler {
 public:
  std::string name() const override;
  absl::StatusOr<PlanePoint> Draw(PlanePoint x, Rng& rng) const override;
  double Density(PlanePoint z, PlanePoint x) const override;
  double LogDensity(PlanePoint z, PlanePoint x) const override;
  double SupportRadius() const override;
  double MassWithin(double radius) const override;

  double acceptance() const { return acceptance_; }
  double q_max() const { return q_max_; }

 private:
  friend absl::StatusOr<NoiseSamplerPtr> Truncate(NoiseSamplerPtr, double,
                                                  int64_t);
  TruncatedSampler(NoiseSamplerPtr base, double q_max, double acceptance,
                   int64_t max_draws)
      : base_(std::move(base)),
        q_max_(q_max),
        acceptance_(acceptance),
        max_draws_(max_draws) {}

  NoiseSamplerPtr base_;
  double q_max_;
  double acceptance_;
  int64_t max_draws_;
};

// Fails when the acceptance probability is below 1e-6. Draw() fails after
// `max_draws` consecutive rejections.
absl::StatusOr<NoiseSamplerPtr> Truncate(NoiseSamplerPtr base, double q_max,
                                         int64_t max_draws = 10'000'000);

}  // namespace lppm

#endif  // LPPM_SAMPLERS_H_
