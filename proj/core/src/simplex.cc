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

#include "lppm/simplex.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"

namespace lppm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// How one original variable maps onto non-negative tableau columns:
// x = offset + sign * t[col] (- t[neg_col] for free variables).
struct ColumnMap {
  int col = -1;
  int neg_col = -1;
  double offset = 0.0;
  double sign = 1.0;
};

// Standard form: minimize c.t s.t. A t = b, t >= 0, b >= 0.
class Tableau {
 public:
  Tableau(int rows, int cols)
      : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0),
        basis_(rows, -1) {}

  double& at(int r, int c) { return data_[r * (cols_ + 1) + c]; }
  double at(int r, int c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(int r) { return at(r, cols_); }
  // Row `rows_` holds reduced costs; its last entry is -objective.
  double& cost(int c) { return at(rows_, c); }
  double cost(int c) const { return at(rows_, c); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  void Pivot(int r, int c) {
    const int width = cols_ + 1;
    double* pivot_row = &data_[r * width];
    const double inv = 1.0 / pivot_row[c];
    nonzero_.clear();
    for (int j = 0; j < width; ++j) {
      if (pivot_row[j] != 0.0) {
        pivot_row[j] *= inv;
        nonzero_.push_back(j);
      }
    }
    pivot_row[c] = 1.0;
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      double* row = &data_[i * width];
      const double factor = row[c];
      if (factor == 0.0) continue;
      for (int j : nonzero_) row[j] -= factor * pivot_row[j];
      row[c] = 0.0;
    }
    basis_[r] = c;
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> data_;
  std::vector<int> basis_;
  std::vector<int> nonzero_;
};

enum class PhaseOutcome { kOptimal, kUnbounded, kIterationLimit };

// Runs primal simplex on the tableau's current cost row. `order` lists the
// columns allowed to enter, in priority order.
PhaseOutcome RunPhase(Tableau& t, const std::vector<int>& order,
                      const SimplexOptions& opt, int64_t& iterations,
                      int64_t max_iterations) {
  bool bland = opt.rule == PivotRule::kBland;
  int degenerate_streak = 0;
  std::vector<int>& basis = t.basis();
  while (true) {
    if (iterations >= max_iterations) return PhaseOutcome::kIterationLimit;
    int enter = -1;
    double best = -opt.optimality_tolerance;
    for (int c : order) {
      const double d = t.cost(c);
      if (d < best) {
        enter = c;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) return PhaseOutcome::kOptimal;

    // Ratio test. Among near-ties Bland takes the smallest basic column,
    // Dantzig the largest pivot.
    double min_ratio = kInf;
    for (int r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= opt.pivot_tolerance) continue;
      min_ratio = std::min(min_ratio, std::max(0.0, t.rhs(r)) / a);
    }
    int leave = -1;
    if (min_ratio < kInf) {
      for (int r = 0; r < t.rows(); ++r) {
        const double a = t.at(r, enter);
        if (a <= opt.pivot_tolerance) continue;
        if (std::max(0.0, t.rhs(r)) / a > min_ratio + 1e-12) continue;
        if (leave < 0 || (bland ? basis[r] < basis[leave]
                                : a > t.at(leave, enter))) {
          leave = r;
        }
      }
    }
    if (leave < 0) return PhaseOutcome::kUnbounded;

    t.Pivot(leave, enter);
    ++iterations;
    if (min_ratio <= 1e-12) {
      if (++degenerate_streak >= opt.degenerate_streak_limit) bland = true;
    } else {
      degenerate_streak = 0;
      bland = opt.rule == PivotRule::kBland;
    }
  }
}

}  // namespace

absl::Status LinearProgram::Validate() const {
  const int n = num_variables();
  const int m = num_constraints();
  if (constraints.rows() != m || (m > 0 && constraints.cols() != n)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "constraint matrix is %dx%d; expected %dx%d",
        static_cast<int>(constraints.rows()),
        static_cast<int>(constraints.cols()), m, n));
  }
  if (static_cast<int>(senses.size()) != m) {
    return absl::InvalidArgumentError("senses and rhs differ in length");
  }
  if (static_cast<int>(lower.size()) != n ||
      static_cast<int>(upper.size()) != n) {
    return absl::InvalidArgumentError("bounds and objective differ in length");
  }
  if (!names.empty() && static_cast<int>(names.size()) != n) {
    return absl::InvalidArgumentError("names and objective differ in length");
  }
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-finite objective coefficient ", j));
    }
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInf ||
        upper[j] == -kInf || lower[j] > upper[j]) {
      return absl::InvalidArgumentError(
          absl::StrCat("invalid bounds on variable ", j));
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(rhs[i])) {
      return absl::InvalidArgumentError(absl::StrCat("non-finite rhs ", i));
    }
  }
  if (m > 0 && !constraints.allFinite()) {
    return absl::InvalidArgumentError("non-finite constraint coefficient");
  }
  return absl::OkStatus();
}

void WriteLinearProgram(const LinearProgram& lp, std::ostream& out) {
  out << "lp " << lp.num_variables() << " " << lp.num_constraints() << " "
      << (lp.direction == LinearProgram::Direction::kMaximize ? "max" : "min")
      << "\n";
  out << "objective";
  for (double c : lp.objective) out << absl::StrFormat(" %.17g", c);
  out << "\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const std::string name =
        lp.names.empty() ? absl::StrCat("x", j) : lp.names[j];
    out << absl::StrFormat("bound %s %.17g %.17g\n", name, lp.lower[j],
                           lp.upper[j]);
  }
  for (int i = 0; i < lp.num_constraints(); ++i) {
    out << "row";
    for (int j = 0; j < lp.num_variables(); ++j) {
      out << absl::StrFormat(" %.17g", lp.constraints(i, j));
    }
    const char* sense = lp.senses[i] == Sense::kLessEqual ? "<="
                        : lp.senses[i] == Sense::kEqual   ? "="
                                                          : ">=";
    out << " " << sense << absl::StrFormat(" %.17g\n", lp.rhs[i]);
  }
}

std::string ToString(SimplexStatus s) {
  switch (s) {
    case SimplexStatus::kOptimal:
      return "optimal";
    case SimplexStatus::kInfeasible:
      return "infeasible";
    case SimplexStatus::kUnbounded:
      return "unbounded";
    case SimplexStatus::kIterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

absl::StatusOr<SimplexResult> SolveSimplex(const LinearProgram& lp,
                                           const SimplexOptions& opt) {
  if (absl::Status s = lp.Validate(); !s.ok()) return s;
  const int n = lp.num_variables();
  std::vector<int> order = opt.column_order;
  if (order.empty()) {
    order.resize(n);
    for (int j = 0; j < n; ++j) order[j] = j;
  } else {
    std::vector<bool> seen(n, false);
    if (static_cast<int>(order.size()) != n) {
      return absl::InvalidArgumentError("column_order is not a permutation");
    }
    for (int j : order) {
      if (j < 0 || j >= n || seen[j]) {
        return absl::InvalidArgumentError("column_order is not a permutation");
      }
      seen[j] = true;
    }
  }

  // Map variables onto non-negative columns in priority order.
  std::vector<ColumnMap> map(n);
  std::vector<int> structural_order;
  int cols = 0;
  std::vector<std::pair<int, double>> upper_rows;  // (variable, bound)
  for (int j : order) {
    ColumnMap& cm = map[j];
    if (std::isfinite(lp.lower[j])) {
      cm.offset = lp.lower[j];
      cm.col = cols++;
      if (std::isfinite(lp.upper[j])) upper_rows.push_back({j, lp.upper[j]});
    } else if (std::isfinite(lp.upper[j])) {
      cm.offset = lp.upper[j];
      cm.sign = -1.0;
      cm.col = cols++;
    } else {
      cm.col = cols++;
      cm.neg_col = cols++;
    }
    structural_order.push_back(cm.col);
    if (cm.neg_col >= 0) structural_order.push_back(cm.neg_col);
  }
  const int structural = cols;

  // Rows: original constraints then finite upper bounds.
  const int m_orig = lp.num_constraints();
  const int m = m_orig + static_cast<int>(upper_rows.size());
  std::vector<std::vector<double>> row_coef(m,
                                            std::vector<double>(structural));
  std::vector<double> b(m);
  std::vector<Sense> sense(m);
  for (int i = 0; i < m_orig; ++i) {
    double shift = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = lp.constraints(i, j);
      if (a == 0.0) continue;
      const ColumnMap& cm = map[j];
      shift += a * cm.offset;
      row_coef[i][cm.col] += a * cm.sign;
      if (cm.neg_col >= 0) row_coef[i][cm.neg_col] -= a;
    }
    b[i] = lp.rhs[i] - shift;
    sense[i] = lp.senses[i];
  }
  for (size_t k = 0; k < upper_rows.size(); ++k) {
    const auto [j, ub] = upper_rows[k];
    const int i = m_orig + static_cast<int>(k);
    row_coef[i][map[j].col] = 1.0;
    b[i] = ub - map[j].offset;
    sense[i] = Sense::kLessEqual;
  }
  // Make every rhs non-negative.
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      b[i] = -b[i];
      for (double& a : row_coef[i]) a = -a;
      if (sense[i] == Sense::kLessEqual) {
        sense[i] = Sense::kGreaterEqual;
      } else if (sense[i] == Sense::kGreaterEqual) {
        sense[i] = Sense::kLessEqual;
      }
    }
  }

  // Slack, surplus and artificial columns.
  std::vector<int> slack_col(m, -1), artificial_col(m, -1);
  for (int i = 0; i < m; ++i) {
    if (sense[i] != Sense::kEqual) slack_col[i] = cols++;
  }
  const int first_artificial = cols;
  for (int i = 0; i < m; ++i) {
    if (sense[i] != Sense::kLessEqual) artificial_col[i] = cols++;
  }
  const int total = cols;

  Tableau t(m, total);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < structural; ++c) t.at(i, c) = row_coef[i][c];
    if (slack_col[i] >= 0) {
      t.at(i, slack_col[i]) = sense[i] == Sense::kLessEqual ? 1.0 : -1.0;
    }
    if (artificial_col[i] >= 0) t.at(i, artificial_col[i]) = 1.0;
    t.rhs(i) = b[i];
    t.basis()[i] =
        artificial_col[i] >= 0 ? artificial_col[i] : slack_col[i];
  }
  row_coef.clear();

  std::vector<int> enter_order = structural_order;
  for (int i = 0; i < m; ++i) {
    if (slack_col[i] >= 0) enter_order.push_back(slack_col[i]);
  }

  const int64_t max_iterations =
      opt.max_iterations > 0 ? opt.max_iterations
                             : 50'000 + 50 * static_cast<int64_t>(m + total);
  SimplexResult result;

  // Phase 1: minimize the sum of artificials.
  if (first_artificial < total) {
    for (int i = 0; i < m; ++i) {
      if (artificial_col[i] < 0) continue;
      for (int c = 0; c <= total; ++c) {
        if (c >= first_artificial && c < total) continue;
        t.cost(c) -= t.at(i, c);
      }
    }
    const PhaseOutcome p1 =
        RunPhase(t, enter_order, opt, result.iterations, max_iterations);
    if (p1 == PhaseOutcome::kIterationLimit) {
      result.status = SimplexStatus::kIterationLimit;
      return result;
    }
    double infeasibility = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t.basis()[i] >= first_artificial) infeasibility += t.rhs(i);
    }
    double scale = 1.0;
    for (int i = 0; i < m; ++i) scale = std::max(scale, b[i]);
    if (infeasibility > opt.feasibility_tolerance * scale) {
      result.status = SimplexStatus::kInfeasible;
      return result;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (int i = 0; i < m; ++i) {
      if (t.basis()[i] < first_artificial) continue;
      int best = -1;
      double best_abs = opt.pivot_tolerance;
      for (int c : enter_order) {
        if (std::abs(t.at(i, c)) > best_abs) {
          best = c;
          best_abs = std::abs(t.at(i, c));
        }
      }
      if (best >= 0) t.Pivot(i, best);
      // Otherwise the row is redundant; its artificial stays basic at 0
      // and never leaves because artificial columns cannot enter.
    }
  }

  // Phase 2 cost row: c - c_B B^-1 A, stated for minimization.
  const double dir =
      lp.direction == LinearProgram::Direction::kMaximize ? -1.0 : 1.0;
  std::vector<double> c(total, 0.0);
  for (int j = 0; j < n; ++j) {
    const ColumnMap& cm = map[j];
    const double cj = dir * lp.objective[j];
    c[cm.col] += cj * cm.sign;
    if (cm.neg_col >= 0) c[cm.neg_col] -= cj;
  }
  for (int col = 0; col <= total; ++col) {
    t.cost(col) = col < total ? c[col] : 0.0;
  }
  for (int i = 0; i < m; ++i) {
    const double cb = c[t.basis()[i]];
    if (cb == 0.0) continue;
    for (int col = 0; col <= total; ++col) t.cost(col) -= cb * t.at(i, col);
  }
  const PhaseOutcome p2 =
      RunPhase(t, enter_order, opt, result.iterations, max_iterations);
  if (p2 == PhaseOutcome::kUnbounded) {
    result.status = SimplexStatus::kUnbounded;
    return result;
  }
  if (p2 == PhaseOutcome::kIterationLimit) {
    result.status = SimplexStatus::kIterationLimit;
    return result;
  }

  std::vector<double> value(total, 0.0);
  for (int i = 0; i < m; ++i) value[t.basis()[i]] = std::max(0.0, t.rhs(i));
  result.status = SimplexStatus::kOptimal;
  result.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const ColumnMap& cm = map[j];
    double v = cm.offset + cm.sign * value[cm.col];
    if (cm.neg_col >= 0) v -= value[cm.neg_col];
    result.x[j] = v;
  }
  result.min_reduced_cost = kInf;
  for (int col : enter_order) {
    result.min_reduced_cost = std::min(result.min_reduced_cost, t.cost(col));
  }
  if (enter_order.empty()) result.min_reduced_cost = 0.0;

  // Evaluate against the original program.
  double objective = 0.0;
  double residual = 0.0;
  for (int j = 0; j < n; ++j) {
    objective += lp.objective[j] * result.x[j];
    residual = std::max(residual, lp.lower[j] - result.x[j]);
    residual = std::max(residual, result.x[j] - lp.upper[j]);
  }
  for (int i = 0; i < m_orig; ++i) {
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) lhs += lp.constraints(i, j) * result.x[j];
    const double gap = lhs - lp.rhs[i];
    switch (lp.senses[i]) {
      case Sense::kLessEqual:
        residual = std::max(residual, gap);
        break;
      case Sense::kGreaterEqual:
        residual = std::max(residual, -gap);
        break;
      case Sense::kEqual:
        residual = std::max(residual, std::abs(gap));
        break;
    }
  }
  result.objective = objective;
  result.primal_residual = residual;
  return result;
}

}  // namespace lppm
