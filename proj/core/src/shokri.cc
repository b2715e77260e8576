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

#include "lppm/shokri.h"

#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace lppm {

absl::Status ValidateShokriInstance(const ShokriInstance& inst) {
  if (!(inst.q_budget >= 0.0) || !std::isfinite(inst.q_budget)) {
    return absl::InvalidArgumentError(
        absl::StrCat("q_budget must be finite and >= 0; got ", inst.q_budget));
  }
  return absl::OkStatus();
}

absl::StatusOr<ShokriLp> BuildShokriLp(const ShokriInstance& inst) {
  if (absl::Status s = ValidateShokriInstance(inst); !s.ok()) return s;
  const PoiSet& poi = inst.prior.poi();
  const std::vector<Location> locations = poi.Locations();
  absl::StatusOr<Matrix> dp = DistanceMatrix(inst.dp, poi, locations);
  if (!dp.ok()) return dp.status();
  absl::StatusOr<Matrix> dq = DistanceMatrix(inst.dq, poi, locations);
  if (!dq.ok()) return dq.status();

  ShokriLp out;
  const int n = poi.size();
  out.n = n;
  LinearProgram& lp = out.lp;
  const int vars = n * n + n;
  const int rows = n * n + 1 + n;
  lp.direction = LinearProgram::Direction::kMaximize;
  lp.objective.assign(vars, 0.0);
  lp.lower.assign(vars, 0.0);
  lp.upper.assign(vars, std::numeric_limits<double>::infinity());
  lp.names.resize(vars);
  for (int x = 0; x < n; ++x) {
    for (int z = 0; z < n; ++z) {
      lp.names[out.f_index(x, z)] = absl::StrFormat("f[%d|%d]", z, x);
    }
  }
  for (int z = 0; z < n; ++z) {
    lp.objective[out.y_index(z)] = 1.0;
    lp.lower[out.y_index(z)] = -std::numeric_limits<double>::infinity();
    lp.names[out.y_index(z)] = absl::StrFormat("y[%d]", z);
  }
  lp.constraints = Matrix::Zero(rows, vars);
  lp.senses.assign(rows, Sense::kLessEqual);
  lp.rhs.assign(rows, 0.0);

  int row = 0;
  for (int z = 0; z < n; ++z) {
    for (int xhat = 0; xhat < n; ++xhat, ++row) {
      lp.constraints(row, out.y_index(z)) = 1.0;
      for (int x = 0; x < n; ++x) {
        lp.constraints(row, out.f_index(x, z)) =
            -inst.prior[x] * (*dp)(x, xhat);
      }
    }
  }
  for (int x = 0; x < n; ++x) {
    for (int z = 0; z < n; ++z) {
      lp.constraints(row, out.f_index(x, z)) = inst.prior[x] * (*dq)(x, z);
    }
  }
  lp.rhs[row++] = inst.q_budget;
  for (int x = 0; x < n; ++x, ++row) {
    for (int z = 0; z < n; ++z) lp.constraints(row, out.f_index(x, z)) = 1.0;
    lp.senses[row] = Sense::kEqual;
    lp.rhs[row] = 1.0;
  }
  return out;
}

absl::StatusOr<DiscreteMechanism> ExtractMechanism(const SimplexResult& solution,
                                                   const ShokriInstance& inst) {
  if (solution.status != SimplexStatus::kOptimal) {
    return absl::FailedPreconditionError(
        absl::StrCat("LP not solved: ", ToString(solution.status)));
  }
  const int n = inst.prior.size();
  if (static_cast<int>(solution.x.size()) != n * n + n) {
    return absl::InvalidArgumentError("solution does not match the instance");
  }
  Matrix f(n, n);
  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    for (int z = 0; z < n; ++z) {
      const double v = solution.x[x * n + z];
      f(x, z) = v < 0.0 && v >= -1e-8 ? 0.0 : v;
      sum += f(x, z);
    }
    if (std::abs(sum - 1.0) > 1e-8) {
      return absl::InternalError(absl::StrFormat(
          "row %d of the LP solution sums to %.17g", x, sum));
    }
    f.row(x) /= sum;
  }
  return DiscreteMechanism::Create(inst.prior.poi_ptr(),
                                   inst.prior.poi().Locations(), std::move(f));
}

absl::StatusOr<ShokriSolution> SolveShokri(const ShokriInstance& inst,
                                           const SimplexOptions& options) {
  absl::StatusOr<ShokriLp> lp = BuildShokriLp(inst);
  if (!lp.ok()) return lp.status();
  absl::StatusOr<SimplexResult> result = SolveSimplex(lp->lp, options);
  if (!result.ok()) return result.status();
  absl::StatusOr<DiscreteMechanism> m = ExtractMechanism(*result, inst);
  if (!m.ok()) return m.status();
  return ShokriSolution{*std::move(m), *std::move(result)};
}

}  // namespace lppm
