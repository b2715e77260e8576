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

#ifndef LPPM_SIMPLEX_H_
#define LPPM_SIMPLEX_H_

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "lppm/model.h"

namespace lppm {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

// A dense linear program
//   optimize  objective . x
//   s.t.      constraints.row(i) . x  (sense[i])  rhs[i]
//             lower <= x <= upper.
struct LinearProgram {
  enum class Direction { kMaximize, kMinimize };

  Direction direction = Direction::kMaximize;
  std::vector<double> objective;
  Matrix constraints;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;  // finite or -inf
  std::vector<double> upper;  // finite or +inf
  std::vector<std::string> names;

  int num_variables() const { return static_cast<int>(objective.size()); }
  int num_constraints() const { return static_cast<int>(rhs.size()); }

  // Dimensions agree, coefficients are finite, lower <= upper, lower is
  // never +inf and upper never -inf.
  absl::Status Validate() const;
};

// Fixed text format for debugging: a header line, the objective row, the
// bounds, then one line per constraint "<coefficients> <sense> <rhs>".
void WriteLinearProgram(const LinearProgram& lp, std::ostream& out);

enum class PivotRule {
  kDantzig,  // most negative reduced cost; Bland on degenerate streaks
  kBland,    // first improving column
};

struct SimplexOptions {
  PivotRule rule = PivotRule::kDantzig;
  // Priority order of the variables when choosing entering columns and
  // breaking ties; empty means 0..n-1. Permuting it reaches different
  // optimal vertices of degenerate problems.
  std::vector<int> column_order;
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  double feasibility_tolerance = 1e-8;
  // Degenerate pivots in a row before falling back to Bland's rule.
  int degenerate_streak_limit = 50;
  // 0 picks a limit from the problem size.
  int64_t max_iterations = 0;
};

enum class SimplexStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string ToString(SimplexStatus s);

struct SimplexResult {
  SimplexStatus status = SimplexStatus::kIterationLimit;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x;
  int64_t iterations = 0;
  // Largest violation of a constraint or bound by x.
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  // Smallest reduced cost of the final basis, stated for minimization;
  // non-negative up to tolerance at an optimum.
  double min_reduced_cost = std::numeric_limits<double>::quiet_NaN();
};

// Two-phase dense primal simplex. Malformed programs are errors;
// infeasible and unbounded programs are reported through `status`.
absl::StatusOr<SimplexResult> SolveSimplex(const LinearProgram& lp,
                                           const SimplexOptions& options = {});

}  // namespace lppm

#endif  // LPPM_SIMPLEX_H_
