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
#include <cmath>
#include <numbers>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"

namespace lppm {
namespace {

using ::lppm::testing::Unwrap;

constexpr PlanePoint kOrigin{0, 0};

double MeanRadius(const NoiseSampler& s, int n, uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += Norm(Unwrap(s.Draw(kOrigin, rng)));
  return sum / n;
}

template <typename S>
double DiskIntegral(const S& s, double radius) {
  return testing::RadialIntegral(
      [&s](double r) { return s.Density(PlanePoint{r, 0}, kOrigin); }, radius);
}

TEST(LambertWm1Test, BranchPoint) {
  EXPECT_EQ(Unwrap(LambertWm1(-1.0 / std::numbers::e)), -1.0);
}

TEST(LambertWm1Test, KnownValue) {
  const double w = Unwrap(LambertWm1(-0.1));
  EXPECT_LE(std::abs(w * std::exp(w) + 0.1), 1e-12);
  EXPECT_NEAR(w, -3.577152063957297, 1e-12);
}

TEST(LambertWm1Test, NearZero) {
  const double w = Unwrap(LambertWm1(-1e-300));
  EXPECT_TRUE(std::isfinite(w));
  EXPECT_LT(w, -600);
  EXPECT_LE(std::abs(w * std::exp(w) + 1e-300), 1e-12);
  // The root is accurate in relative terms too.
  EXPECT_NEAR(w + std::log(-w), std::log(1e-300), 1e-9);
}

TEST(LambertWm1Test, ResidualAcrossDomain) {
  const double lo = -1.0 / std::numbers::e;
  for (int i = 0; i < 1000; ++i) {
    const double v = lo + (0.0 - lo) * (i + 0.5) / 1000;
    const double w = Unwrap(LambertWm1(v));
    EXPECT_LE(w, -1.0);
    EXPECT_LE(std::abs(w * std::exp(w) - v), 1e-12) << v;
  }
}

TEST(LambertWm1Test, DomainErrors) {
  EXPECT_FALSE(LambertWm1(0.0).ok());
  EXPECT_FALSE(LambertWm1(0.5).ok());
  EXPECT_FALSE(LambertWm1(-0.4).ok());
  EXPECT_FALSE(LambertWm1(std::nan("")).ok());
}

TEST(LaplaceSamplerTest, ZeroQuantileIsZeroRadius) {
  const auto s = Unwrap(LaplaceSampler::Create(2.0));
  EXPECT_EQ(Unwrap(s->RadiusForQuantile(0.0)), 0.0);
  EXPECT_FALSE(s->RadiusForQuantile(1.0).ok());
}

TEST(LaplaceSamplerTest, QuantileInvertsTheRadialCdf) {
  const auto s = Unwrap(LaplaceSampler::Create(1.7));
  for (double p : {0.01, 0.3, 0.5, 0.9, 0.999}) {
    EXPECT_NEAR(s->MassWithin(Unwrap(s->RadiusForQuantile(p))), p, 1e-12);
  }
}

TEST(LaplaceSamplerTest, MeanRadius) {
  for (double eps : {0.5, 4.0}) {
    const auto s = Unwrap(LaplaceSampler::Create(eps));
    EXPECT_NEAR(MeanRadius(*s, 1'000'000, 7) * eps / 2.0, 1.0, 0.01) << eps;
  }
}

TEST(LaplaceSamplerTest, DensityNormalization) {
  const auto s = Unwrap(LaplaceSampler::Create(1.3));
  EXPECT_NEAR(DiskIntegral(*s, 60.0), 1.0, 1e-9);
  EXPECT_NEAR(DiskIntegral(*s, 2.0), s->MassWithin(2.0), 1e-9);
  EXPECT_EQ(s->GeoIndLevel(), 1 / 1.3);
  EXPECT_FALSE(LaplaceSampler::Create(0.0).ok());
}

TEST(GaussianSamplerTest, MeanRadiusAndNormalization) {
  for (double mean : {0.05, 1.0, 5.0}) {
    const auto s = Unwrap(GaussianSampler::Create(mean));
    EXPECT_NEAR(MeanRadius(*s, 200'000, 3) / mean, 1.0, 0.01) << mean;
    EXPECT_NEAR(DiskIntegral(*s, 10 * s->sigma()), 1.0, 1e-6);
    EXPECT_TRUE(std::isnan(s->GeoIndLevel()));
  }
}

TEST(GaussianSamplerTest, RadiusPassesKolmogorovSmirnov) {
  const auto s = Unwrap(GaussianSampler::Create(1.0));
  const int n = 100'000;
  Rng rng(99);
  std::vector<double> r(n);
  for (double& v : r) v = Norm(Unwrap(s->Draw(kOrigin, rng)));
  std::sort(r.begin(), r.end());
  const double two_sigma2 = 2 * s->sigma() * s->sigma();
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-r[i] * r[i] / two_sigma2);
    d = std::max({d, cdf - double(i) / n, double(i + 1) / n - cdf});
  }
  // Critical value at the 0.1% level.
  EXPECT_LT(d, 1.95 / std::sqrt(double(n)));
}

TEST(CircularSamplerTest, MeanRadiusAndSupport) {
  const auto s = Unwrap(CircularSampler::Create(7.5));
  Rng rng(5);
  double sum = 0.0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double r = Norm(Unwrap(s->Draw(kOrigin, rng)));
    EXPECT_LE(r, 7.5 + 1e-12);
    sum += r;
  }
  EXPECT_NEAR(sum / n / 5.0, 1.0, 0.01);
  EXPECT_NEAR(DiskIntegral(*s, 7.5), 1.0, 1e-6);
  EXPECT_EQ(s->GeoIndLevel(), 0.0);
}

TEST(CircularSamplerTest, RadialDensityIsLinear) {
  const double R = 2.0;
  const auto s = Unwrap(CircularSampler::Create(R));
  const int bins = 20, n = 400'000;
  std::vector<double> count(bins, 0.0);
  Rng rng(6);
  for (int i = 0; i < n; ++i) {
    const double r = Norm(Unwrap(s->Draw(kOrigin, rng)));
    count[std::min(bins - 1, int(r / R * bins))] += 1;
  }
  // Least squares fit of count = a + b * r_mid.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < bins; ++k) {
    const double x = (k + 0.5) * R / bins;
    sx += x;
    sy += count[k];
    sxx += x * x;
    sxy += x * count[k];
  }
  const double slope = (bins * sxy - sx * sy) / (bins * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / bins;
  // Exact slope for r / R^2 scaled to counts per bin: 2 n / R^2 * (R / bins).
  const double expected = 2.0 * n / (R * R) * (R / bins);
  EXPECT_NEAR(slope / expected, 1.0, 0.02);
  EXPECT_LT(std::abs(intercept), 0.01 * n / bins);
}

TEST(TruncateTest, WideBoundLeavesCircularUnchanged) {
  const auto base = Unwrap(CircularSampler::Create(1.0));
  const NoiseSamplerPtr t = Unwrap(Truncate(base, 1.5));
  const auto* ts = dynamic_cast<const TruncatedSampler*>(t.get());
  ASSERT_NE(ts, nullptr);
  EXPECT_EQ(ts->acceptance(), 1.0);
  Rng a(3), b(3);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(Unwrap(t->Draw(kOrigin, a)), Unwrap(base->Draw(kOrigin, b)));
  }
  EXPECT_EQ(t->Density({0.3, 0.4}, kOrigin), base->Density({0.3, 0.4}, kOrigin));
  EXPECT_EQ(t->SupportRadius(), 1.0);
}

TEST(TruncateTest, LaplaceAtOnePointFive) {
  const auto base = Unwrap(LaplaceSampler::Create(0.5));
  const NoiseSamplerPtr t = Unwrap(Truncate(base, 1.5));
  EXPECT_EQ(t->name(), "laplace-truncated");
  EXPECT_EQ(t->SupportRadius(), 1.5);
  EXPECT_EQ(t->GeoIndLevel(), 0.0);
  Rng rng(8);
  for (int i = 0; i < 20000; ++i) {
    EXPECT_LE(EuclideanKm(Unwrap(t->Draw({3, 4}, rng)), {3, 4}), 1.5);
  }
  EXPECT_NEAR(DiskIntegral(*t, 1.5), 1.0, 1e-4);
  EXPECT_EQ(t->Density({1.6, 0}, kOrigin), 0.0);
}

TEST(TruncateTest, Errors) {
  const auto laplace = Unwrap(LaplaceSampler::Create(1.0));
  EXPECT_EQ(Truncate(laplace, 1e-4).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_FALSE(Truncate(laplace, 0.0).ok());
  EXPECT_FALSE(Truncate(nullptr, 1.0).ok());
  const NoiseSamplerPtr capped = Unwrap(Truncate(laplace, 0.01, 1));
  Rng rng(1);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const absl::StatusOr<PlanePoint> z = capped->Draw(kOrigin, rng);
    if (!z.ok()) {
      EXPECT_EQ(z.status().code(), absl::StatusCode::kResourceExhausted);
      ++failures;
    }
  }
  EXPECT_GT(failures, 90);
}

TEST(PointMassSamplerTest, ReportsTheInput) {
  PointMassSampler s;
  Rng rng(1);
  EXPECT_EQ(Unwrap(s.Draw({2, 3}, rng)), (PlanePoint{2, 3}));
  EXPECT_EQ(s.SupportRadius(), 0.0);
}

}  // namespace
}  // namespace lppm
