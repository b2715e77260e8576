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

#include "lppm/model.h"

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace lppm {

absl::StatusOr<std::shared_ptr<const PoiSet>> PoiSet::Create(
    std::vector<PlanePoint> points, std::vector<std::string> tags) {
  if (points.empty()) return absl::InvalidArgumentError("empty POI set");
  if (!tags.empty() && tags.size() != points.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("tag count ", tags.size(), " does not match POI count ",
                     points.size()));
  }
  std::set<std::pair<double, double>> seen;
  for (size_t i = 0; i < points.size(); ++i) {
    const PlanePoint& p = points[i];
    if (!std::isfinite(p.x_km) || !std::isfinite(p.y_km)) {
      return absl::InvalidArgumentError(
          absl::StrCat("POI ", i, " has non-finite coordinates"));
    }
    if (!seen.emplace(p.x_km, p.y_km).second) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "duplicate POI coordinates (%.17g, %.17g)", p.x_km, p.y_km));
    }
  }
  return std::shared_ptr<const PoiSet>(
      new PoiSet(std::move(points), std::move(tags)));
}

std::vector<Location> PoiSet::Locations() const {
  std::vector<Location> out;
  out.reserve(points_.size());
  for (int i = 0; i < size(); ++i) out.push_back(location(i));
  return out;
}

bool PoiSet::SameAs(const PoiSet& other) const {
  return this == &other ||
         (points_ == other.points_ && tags_ == other.tags_);
}

absl::StatusOr<Prior> Prior::Create(PoiSetPtr poi, std::vector<double> mass) {
  if (poi == nullptr) return absl::InvalidArgumentError("null POI set");
  if (static_cast<int>(mass.size()) != poi->size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "prior has ", mass.size(), " entries for ", poi->size(), " POIs"));
  }
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      return absl::InvalidArgumentError("prior mass must be finite and >= 0");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    return absl::InvalidArgumentError(
        absl::StrFormat("prior sums to %.17g", total));
  }
  return Prior(std::move(poi), std::move(mass));
}

absl::StatusOr<Prior> Prior::FromWeights(PoiSetPtr poi,
                                         absl::Span<const double> weights) {
  long double total = 0.0L;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      return absl::InvalidArgumentError("weights must be finite and >= 0");
    }
    total += w;
  }
  if (total <= 0.0L) return absl::InvalidArgumentError("all weights are zero");
  std::vector<double> mass(weights.size());
  for (size_t i = 0; i < weights.size(); ++i) {
    mass[i] = static_cast<double>(weights[i] / total);
  }
  return Create(std::move(poi), std::move(mass));
}

Prior Prior::Uniform(PoiSetPtr poi) {
  const int n = poi->size();
  return Prior(std::move(poi), std::vector<double>(n, 1.0 / n));
}

absl::StatusOr<Posterior> ComputePosterior(
    const Prior& prior, absl::Span<const double> likelihood) {
  if (static_cast<int>(likelihood.size()) != prior.size()) {
    return absl::InvalidArgumentError("likelihood size does not match prior");
  }
  Posterior post;
  post.mass.resize(likelihood.size());
  double total = 0.0;
  bool uninformative = true;
  double reference = -1.0;
  for (size_t i = 0; i < likelihood.size(); ++i) {
    if (!(likelihood[i] >= 0.0)) {
      return absl::InvalidArgumentError("likelihood must be >= 0");
    }
    if (prior[i] <= 0.0) continue;
    if (reference < 0.0) reference = likelihood[i];
    uninformative &= likelihood[i] == reference;
  }
  // An observation equally likely under every input leaves the prior as it
  // is; returning it directly avoids renormalization rounding.
  if (uninformative && reference > 0.0) {
    post.mass.assign(prior.mass().begin(), prior.mass().end());
    return post;
  }
  for (size_t i = 0; i < likelihood.size(); ++i) {
    post.mass[i] = prior[i] * likelihood[i];
    total += post.mass[i];
  }
  if (!(total > 0.0)) {
    return absl::FailedPreconditionError(
        "impossible observation: every input has zero probability");
  }
  for (double& m : post.mass) m /= total;
  return post;
}

absl::StatusOr<Posterior> PosteriorFromLogLikelihood(
    const Prior& prior, absl::Span<const double> log_likelihood) {
  if (static_cast<int>(log_likelihood.size()) != prior.size()) {
    return absl::InvalidArgumentError("likelihood size does not match prior");
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < log_likelihood.size(); ++i) {
    if (prior[i] > 0.0) {
      peak = std::max(peak, std::log(prior[i]) + log_likelihood[i]);
    }
  }
  if (!std::isfinite(peak)) {
    return absl::FailedPreconditionError(
        "impossible observation: every input has zero probability");
  }
  std::vector<double> shifted(log_likelihood.size());
  for (size_t i = 0; i < log_likelihood.size(); ++i) {
    shifted[i] = prior[i] > 0.0
                     ? std::exp(std::log(prior[i]) + log_likelihood[i] - peak)
                     : 0.0;
  }
  double total = std::accumulate(shifted.begin(), shifted.end(), 0.0);
  for (double& m : shifted) m /= total;
  return Posterior{std::move(shifted)};
}

absl::StatusOr<DiscreteMechanism> DiscreteMechanism::Create(
    PoiSetPtr inputs, std::vector<Location> outputs, Matrix matrix) {
  if (inputs == nullptr) return absl::InvalidArgumentError("null inputs");
  if (matrix.rows() != inputs->size() ||
      matrix.cols() != static_cast<Eigen::Index>(outputs.size())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "matrix is ", matrix.rows(), "x", matrix.cols(), " for ",
        inputs->size(), " inputs and ", outputs.size(), " outputs"));
  }
  for (const Diagnostic& d : Validate(matrix)) {
    if (d.kind == Diagnostic::Kind::kClampedNegative) {
      matrix(d.row, d.col) = 0.0;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid mechanism: ", ToString(d)));
    }
  }
  return DiscreteMechanism(std::move(inputs), std::move(outputs),
                           std::move(matrix));
}

absl::Status CheckSameDomain(const DiscreteMechanism& m, const Prior& prior) {
  if (!m.inputs().SameAs(prior.poi())) {
    return absl::InvalidArgumentError(
        "mechanism inputs and prior are over different POI sets");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<double>> OutputMarginal(const DiscreteMechanism& m,
                                                   const Prior& prior) {
  if (absl::Status s = CheckSameDomain(m, prior); !s.ok()) return s;
  std::vector<double> pz(m.num_outputs(), 0.0);
  for (int x = 0; x < m.num_inputs(); ++x) {
    const double px = prior[x];
    if (px == 0.0) continue;
    for (int z = 0; z < m.num_outputs(); ++z) pz[z] += px * m(x, z);
  }
  return pz;
}

namespace {

// Index of `loc` among `targets`, merging by coordinates.
int FindOrAdd(std::map<std::pair<double, double>, int>& index,
              std::vector<Location>& targets, const Location& loc) {
  auto [it, inserted] =
      index.emplace(std::make_pair(loc.point.x_km, loc.point.y_km),
                    static_cast<int>(targets.size()));
  if (inserted) {
    targets.push_back(loc);
  } else if (!targets[it->second].has_id() && loc.has_id()) {
    targets[it->second].id = loc.id;
  }
  return it->second;
}

}  // namespace

absl::StatusOr<DiscreteMechanism> Compose(const DiscreteMechanism& m,
                                          absl::Span<const Location> targets) {
  if (static_cast<int>(targets.size()) != m.num_outputs()) {
    return absl::InvalidArgumentError("remap must cover every output");
  }
  std::map<std::pair<double, double>, int> index;
  std::vector<Location> merged;
  std::vector<int> column(targets.size());
  for (size_t z = 0; z < targets.size(); ++z) {
    column[z] = FindOrAdd(index, merged, targets[z]);
  }
  Matrix out = Matrix::Zero(m.num_inputs(), merged.size());
  for (int x = 0; x < m.num_inputs(); ++x) {
    for (int z = 0; z < m.num_outputs(); ++z) out(x, column[z]) += m(x, z);
  }
  return DiscreteMechanism::Create(m.inputs_ptr(), std::move(merged),
                                   std::move(out));
}

absl::StatusOr<DiscreteMechanism> ConvexCombination(const DiscreteMechanism& a,
                                                    const DiscreteMechanism& b,
                                                    double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    return absl::InvalidArgumentError("lambda must be in [0, 1]");
  }
  if (!a.inputs().SameAs(b.inputs())) {
    return absl::InvalidArgumentError("mechanisms have different inputs");
  }
  std::map<std::pair<double, double>, int> index;
  std::vector<Location> merged;
  std::vector<int> col_a, col_b;
  for (const Location& l : a.outputs()) {
    col_a.push_back(FindOrAdd(index, merged, l));
  }
  for (const Location& l : b.outputs()) {
    col_b.push_back(FindOrAdd(index, merged, l));
  }
  Matrix out = Matrix::Zero(a.num_inputs(), merged.size());
  for (int x = 0; x < a.num_inputs(); ++x) {
    for (int z = 0; z < a.num_outputs(); ++z) {
      out(x, col_a[z]) += lambda * a(x, z);
    }
    for (int z = 0; z < b.num_outputs(); ++z) {
      out(x, col_b[z]) += (1.0 - lambda) * b(x, z);
    }
  }
  return DiscreteMechanism::Create(a.inputs_ptr(), std::move(merged),
                                   std::move(out));
}

absl::StatusOr<DiscreteMechanism> TruncateMechanism(const DiscreteMechanism& m,
                                                    const DistanceFn& dq,
                                                    double q_max) {
  absl::StatusOr<Matrix> d = DistanceMatrix(dq, m.inputs(), m.outputs());
  if (!d.ok()) return d.status();
  Matrix out = m.matrix();
  for (int x = 0; x < out.rows(); ++x) {
    double kept = 0.0;
    for (int z = 0; z < out.cols(); ++z) {
      if ((*d)(x, z) > q_max) out(x, z) = 0.0;
      kept += out(x, z);
    }
    if (!(kept > 0.0)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "input ", x, " has no output within ", q_max, " km"));
    }
    out.row(x) /= kept;
  }
  return DiscreteMechanism::Create(m.inputs_ptr(), m.outputs(),
                                   std::move(out));
}

absl::StatusOr<Matrix> DistanceMatrix(const DistanceFn& d, const PoiSet& inputs,
                                      absl::Span<const Location> outputs) {
  Matrix out(inputs.size(), outputs.size());
  for (int x = 0; x < inputs.size(); ++x) {
    const Location in = inputs.location(x);
    for (size_t z = 0; z < outputs.size(); ++z) {
      absl::StatusOr<double> v = d(in, outputs[z]);
      if (!v.ok()) return v.status();
      out(x, z) = *v;
    }
  }
  return out;
}

std::string ToString(const Diagnostic& d) {
  switch (d.kind) {
    case Diagnostic::Kind::kRowSum:
      return absl::StrFormat("row %d sums to %.17g", d.row, d.value);
    case Diagnostic::Kind::kNegative:
      return absl::StrFormat("entry (%d, %d) is negative: %.17g", d.row, d.col,
                             d.value);
    case Diagnostic::Kind::kClampedNegative:
      return absl::StrFormat("entry (%d, %d) = %.3g clamped to zero", d.row,
                             d.col, d.value);
    case Diagnostic::Kind::kNotFinite:
      return absl::StrFormat("entry (%d, %d) is not finite", d.row, d.col);
  }
  return "unknown diagnostic";
}

std::vector<Diagnostic> Validate(const Matrix& matrix) {
  std::vector<Diagnostic> out;
  for (int x = 0; x < matrix.rows(); ++x) {
    double sum = 0.0;
    bool finite = true;
    for (int z = 0; z < matrix.cols(); ++z) {
      const double v = matrix(x, z);
      if (!std::isfinite(v)) {
        out.push_back({Diagnostic::Kind::kNotFinite, x, z, v});
        finite = false;
        continue;
      }
      if (v < -kClampTolerance) {
        out.push_back({Diagnostic::Kind::kNegative, x, z, v});
      } else if (v < 0.0) {
        out.push_back({Diagnostic::Kind::kClampedNegative, x, z, v});
      }
      sum += std::max(v, 0.0);
    }
    if (finite && std::abs(sum - 1.0) > kRowSumTolerance) {
      out.push_back({Diagnostic::Kind::kRowSum, x, -1, sum});
    }
  }
  return out;
}

std::vector<Diagnostic> Validate(const DiscreteMechanism& m) {
  return Validate(m.matrix());
}

void WriteMechanismCsv(const DiscreteMechanism& m, std::ostream& out) {
  out << "input_id,output_id,prob\n";
  for (int x = 0; x < m.num_inputs(); ++x) {
    for (int z = 0; z < m.num_outputs(); ++z) {
      if (m(x, z) != 0.0) out << absl::StrFormat("%d,%d,%.17g\n", x, z, m(x, z));
    }
  }
}

absl::StatusOr<DiscreteMechanism> ReadMechanismCsv(
    std::istream& in, PoiSetPtr inputs, std::vector<Location> outputs) {
  if (inputs == nullptr) return absl::InvalidArgumentError("null inputs");
  Matrix matrix = Matrix::Zero(inputs->size(), outputs.size());
  std::string line;
  if (!std::getline(in, line) ||
      absl::StripTrailingAsciiWhitespace(line) != "input_id,output_id,prob") {
    return absl::InvalidArgumentError("missing mechanism CSV header");
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripTrailingAsciiWhitespace(line);
    if (view.empty()) continue;
    std::vector<absl::string_view> fields = absl::StrSplit(view, ',');
    int x = 0, z = 0;
    double p = 0.0;
    if (fields.size() != 3 || !absl::SimpleAtoi(fields[0], &x) ||
        !absl::SimpleAtoi(fields[1], &z) || !absl::SimpleAtod(fields[2], &p) ||
        x < 0 || x >= matrix.rows() || z < 0 || z >= matrix.cols()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed mechanism CSV line ", line_no));
    }
    matrix(x, z) = p;
  }
  return DiscreteMechanism::Create(std::move(inputs), std::move(outputs),
                                   std::move(matrix));
}

}  // namespace lppm
