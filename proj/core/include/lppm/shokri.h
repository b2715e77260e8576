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

#ifndef LPPM_SHOKRI_H_
#define LPPM_SHOKRI_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "lppm/geo.h"
#include "lppm/model.h"
#include "lppm/simplex.h"

namespace lppm {

// Discrete scenario where inputs, outputs and adversary estimates all range
// over the same POI set.
struct ShokriInstance {
  Prior prior;
  DistanceFn dp;
  DistanceFn dq;
  double q_budget = 0.0;
};

absl::Status ValidateShokriInstance(const ShokriInstance& inst);

// The average-error-maximizing LP. Variables are f[z|x] (index x * n + z)
// followed by y[z] (index n * n + z); the rows are the n * n epigraph
// constraints y[z] <= sum_x prior(x) f[z|x] dp(x, xhat) ordered by
// (z, xhat), then the budget row, then one row-sum equality per x.
struct ShokriLp {
  LinearProgram lp;
  int n = 0;

  int f_index(int x, int z) const { return x * n + z; }
  int y_index(int z) const { return n * n + z; }
};

absl::StatusOr<ShokriLp> BuildShokriLp(const ShokriInstance& inst);

// Reads f out of an optimal solution. Rows are renormalized when their sum
// drifts by at most 1e-8; larger drift is an internal error.
absl::StatusOr<DiscreteMechanism> ExtractMechanism(const SimplexResult& solution,
                                                   const ShokriInstance& inst);

struct ShokriSolution {
  DiscreteMechanism mechanism;
  SimplexResult result;
};

absl::StatusOr<ShokriSolution> SolveShokri(const ShokriInstance& inst,
                                           const SimplexOptions& options = {});

}  // namespace lppm

#endif  // LPPM_SHOKRI_H_
