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

#ifndef LPPM_MODEL_H_
#define LPPM_MODEL_H_

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "lppm/geo.h"

namespace lppm {

// Dense row-major probability matrix; rows are inputs, columns outputs.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row sums of a mechanism must be within this of 1.
inline constexpr double kRowSumTolerance = 1e-9;
// Negative entries no smaller than -kClampTolerance are rounding noise and
// are clamped to zero on construction.
inline constexpr double kClampTolerance = 1e-12;
// Probabilities below this are treated as zero inside log computations.
inline constexpr double kProbabilityFloor = 1e-15;

// Finite set of input locations. Index order is the canonical order used
// by every matrix built over the set.
class PoiSet {
 public:
  // Fails on an empty set, duplicate coordinates, non-finite coordinates or
  // a tag list whose size does not match.
  static absl::StatusOr<std::shared_ptr<const PoiSet>> Create(
      std::vector<PlanePoint> points, std::vector<std::string> tags = {});

  int size() const { return static_cast<int>(points_.size()); }
  const PlanePoint& point(int i) const { return points_[i]; }
  const std::vector<PlanePoint>& points() const { return points_; }
  Location location(int i) const { return {points_[i], i}; }
  std::vector<Location> Locations() const;

  bool has_tags() const { return !tags_.empty(); }
  const std::vector<std::string>& tags() const { return tags_; }

  bool SameAs(const PoiSet& other) const;

 private:
  PoiSet(std::vector<PlanePoint> points, std::vector<std::string> tags)
      : points_(std::move(points)), tags_(std::move(tags)) {}

  std::vector<PlanePoint> points_;
  std::vector<std::string> tags_;
};

using PoiSetPtr = std::shared_ptr<const PoiSet>;

// Probability mass function over a PoiSet.
class Prior {
 public:
  // `mass` must be non-negative and sum to 1 within 1e-12.
  static absl::StatusOr<Prior> Create(PoiSetPtr poi, std::vector<double> mass);
  // Normalizes non-negative weights (counts, scores) into a prior.
  static absl::StatusOr<Prior> FromWeights(PoiSetPtr poi,
                                           absl::Span<const double> weights);
  static Prior Uniform(PoiSetPtr poi);

  const PoiSet& poi() const { return *poi_; }
  const PoiSetPtr& poi_ptr() const { return poi_; }
  int size() const { return static_cast<int>(mass_.size()); }
  double operator[](int i) const { return mass_[i]; }
  absl::Span<const double> mass() const { return mass_; }

 private:
  Prior(PoiSetPtr poi, std::vector<double> mass)
      : poi_(std::move(poi)), mass_(std::move(mass)) {}

  PoiSetPtr poi_;
  std::vector<double> mass_;
};

struct Posterior {
  std::vector<double> mass;
};

// p(x|z) from the prior and the likelihoods f(z|x) of one observation.
// Fails when every product prior * likelihood is zero.
absl::StatusOr<Posterior> ComputePosterior(const Prior& prior,
                                           absl::Span<const double> likelihood);
// Same, from log f(z|x) (entries may be -inf). Stable for peaked densities.
absl::StatusOr<Posterior> PosteriorFromLogLikelihood(
    const Prior& prior, absl::Span<const double> log_likelihood);

// Row-stochastic matrix f[z|x] from a PoiSet to an ordered list of outputs.
class DiscreteMechanism {
 public:
  static absl::StatusOr<DiscreteMechanism> Create(PoiSetPtr inputs,
                                                  std::vector<Location> outputs,
                                                  Matrix matrix);

  const PoiSet& inputs() const { return *inputs_; }
  const PoiSetPtr& inputs_ptr() const { return inputs_; }
  const std::vector<Location>& outputs() const { return outputs_; }
  const Matrix& matrix() const { return matrix_; }
  int num_inputs() const { return static_cast<int>(matrix_.rows()); }
  int num_outputs() const { return static_cast<int>(matrix_.cols()); }
  double operator()(int x, int z) const { return matrix_(x, z); }

 private:
  DiscreteMechanism(PoiSetPtr inputs, std::vector<Location> outputs,
                    Matrix matrix)
      : inputs_(std::move(inputs)),
        outputs_(std::move(outputs)),
        matrix_(std::move(matrix)) {}

  PoiSetPtr inputs_;
  std::vector<Location> outputs_;
  Matrix matrix_;
};

absl::Status CheckSameDomain(const DiscreteMechanism& m, const Prior& prior);

// P_Z(z) = sum_x prior(x) f[z|x].
absl::StatusOr<std::vector<double>> OutputMarginal(const DiscreteMechanism& m,
                                                   const Prior& prior);

// f' = f o g for a deterministic remap g given as one target per output.
// Outputs sent to the same point are merged; the result lists distinct
// targets in order of first appearance.
absl::StatusOr<DiscreteMechanism> Compose(const DiscreteMechanism& m,
                                          absl::Span<const Location> targets);

// lambda * a + (1 - lambda) * b over the union of both output lists.
absl::StatusOr<DiscreteMechanism> ConvexCombination(const DiscreteMechanism& a,
                                                    const DiscreteMechanism& b,
                                                    double lambda);

// Zeroes f[z|x] wherever dq(x, z) > q_max and renormalizes each row.
absl::StatusOr<DiscreteMechanism> TruncateMechanism(const DiscreteMechanism& m,
                                                    const DistanceFn& dq,
                                                    double q_max);

// d(x, z) for every input x and output z.
absl::StatusOr<Matrix> DistanceMatrix(const DistanceFn& d, const PoiSet& inputs,
                                      absl::Span<const Location> outputs);

struct Diagnostic {
  enum class Kind { kRowSum, kNegative, kClampedNegative, kNotFinite };
  Kind kind;
  int row;
  int col;  // -1 for row-level findings
  double value;
};

std::string ToString(const Diagnostic& d);

// Reports row-sum deviations beyond kRowSumTolerance, negative entries,
// NaN/inf entries, and negative entries small enough to be clamped.
std::vector<Diagnostic> Validate(const Matrix& matrix);
std::vector<Diagnostic> Validate(const DiscreteMechanism& m);

// `input_id,output_id,prob`, one line per non-zero entry.
void WriteMechanismCsv(const DiscreteMechanism& m, std::ostream& out);
absl::StatusOr<DiscreteMechanism> ReadMechanismCsv(
    std::istream& in, PoiSetPtr inputs, std::vector<Location> outputs);

}  // namespace lppm

#endif  // LPPM_MODEL_H_
