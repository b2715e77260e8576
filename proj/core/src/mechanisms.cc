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

#include "lppm/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "lppm/metrics.h"

namespace lppm {

absl::StatusOr<ConstantOutput> OptimalConstantOutput(
    const Prior& prior, const DistanceFn& dq, const EstimateSpace& space,
    const WeiszfeldConfig& cfg) {
  std::vector<Location> points = prior.poi().Locations();
  absl::StatusOr<WeightedMinimum> best = MinimizeWeightedDistance(
      points, prior.mass(), dq, space, cfg);
  if (!best.ok()) return best.status();
  return ConstantOutput{best->location, best->objective};
}

absl::StatusOr<CoinParams> MakeCoinParams(const Prior& prior,
                                          const DistanceFn& dq,
                                          double q_target,
                                          const EstimateSpace& space,
                                          const WeiszfeldConfig& cfg) {
  absl::StatusOr<ConstantOutput> c = OptimalConstantOutput(prior, dq, space, cfg);
  if (!c.ok()) return c.status();
  if (!(q_target >= 0.0) || q_target > c->q_star * (1.0 + 1e-12)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "coin target %.6g km outside [0, Q* = %.6g km]", q_target, c->q_star));
  }
  CoinParams p;
  p.q_target = q_target;
  p.z_star = c->z_star;
  p.q_star = c->q_star;
  p.alpha = c->q_star > 0.0 ? std::clamp(1.0 - q_target / c->q_star, 0.0, 1.0)
                            : 1.0;
  return p;
}

absl::StatusOr<DiscreteMechanism> BuildCoin(const Prior& prior,
                                            const CoinParams& params) {
  const PoiSet& poi = prior.poi();
  std::vector<Location> outputs = poi.Locations();
  int star = -1;
  for (int i = 0; i < poi.size(); ++i) {
    if (poi.point(i) == params.z_star.point) star = i;
  }
  if (star < 0) {
    star = static_cast<int>(outputs.size());
    outputs.push_back({params.z_star.point, Location::kNoId});
  }
  Matrix f = Matrix::Zero(poi.size(), outputs.size());
  for (int x = 0; x < poi.size(); ++x) {
    f(x, x) += params.alpha;
    f(x, star) += 1.0 - params.alpha;
  }
  return DiscreteMechanism::Create(prior.poi_ptr(), std::move(outputs),
                                   std::move(f));
}

absl::StatusOr<DiscreteMechanism> BuildCoin(const Prior& prior,
                                            const DistanceFn& dq,
                                            double q_target,
                                            const EstimateSpace& space,
                                            const WeiszfeldConfig& cfg) {
  absl::StatusOr<CoinParams> p = MakeCoinParams(prior, dq, q_target, space, cfg);
  if (!p.ok()) return p.status();
  return BuildCoin(prior, *p);
}

namespace {

// exp(-b (d(x, z) - min_z d(x, z))): the row factor cancels on
// normalization and keeps large b from underflowing whole rows. Infinite
// distances map to 0.
Matrix ShiftedKernel(const Matrix& distances, double b) {
  Matrix k = Matrix::Zero(distances.rows(), distances.cols());
  for (int x = 0; x < distances.rows(); ++x) {
    const double nearest = distances.row(x).minCoeff();
    if (!std::isfinite(nearest)) continue;
    for (int z = 0; z < distances.cols(); ++z) {
      if (std::isfinite(distances(x, z))) {
        k(x, z) = std::exp(-b * (distances(x, z) - nearest));
      }
    }
  }
  return k;
}

void NormalizeRows(Matrix& f) {
  for (int x = 0; x < f.rows(); ++x) {
    const double s = f.row(x).sum();
    if (s > 0.0) f.row(x) /= s;
  }
}

}  // namespace

absl::StatusOr<DiscreteMechanism> BuildExponential(PoiSetPtr poi,
                                                   std::vector<Location> outputs,
                                                   const DistanceFn& dq,
                                                   double b) {
  if (!(b >= 0.0) || !std::isfinite(b)) {
    return absl::InvalidArgumentError("exponential rate b must be >= 0");
  }
  if (outputs.empty()) return absl::InvalidArgumentError("no outputs");
  absl::StatusOr<Matrix> d = DistanceMatrix(dq, *poi, outputs);
  if (!d.ok()) return d.status();
  Matrix f = ShiftedKernel(*d, b);
  NormalizeRows(f);
  return DiscreteMechanism::Create(std::move(poi), std::move(outputs),
                                   std::move(f));
}

namespace {

// P_Z under `f`, with marginals below kProbabilityFloor dropped.
Eigen::RowVectorXd BaMarginal(const Prior& prior, const Matrix& f) {
  Eigen::RowVectorXd pz = Eigen::RowVectorXd::Zero(f.cols());
  for (int x = 0; x < f.rows(); ++x) pz += prior[x] * f.row(x);
  for (int z = 0; z < pz.size(); ++z) {
    if (pz[z] < kProbabilityFloor) pz[z] = 0.0;
  }
  return pz;
}

// Rows proportional to kernel(x, z) * pz(z).
Matrix BaFromMarginal(const Matrix& kernel, const Eigen::RowVectorXd& pz) {
  Matrix next = kernel;
  for (int x = 0; x < next.rows(); ++x) {
    next.row(x) = next.row(x).cwiseProduct(pz);
  }
  NormalizeRows(next);
  return next;
}

Matrix BaStep(const Prior& prior, const Matrix& kernel, const Matrix& f) {
  return BaFromMarginal(kernel, BaMarginal(prior, f));
}

// Squared extrapolation of three consecutive marginals in log space, which
// keeps dropped columns at zero and turns geometric decay into a line.
// Rate-distortion Lagrangian of the matrix with rows proportional to
// kernel(x, z) * pz(z), without forming it. With row sums c_x and shifts
// m_x = min_z d(x, z), log f + b d = log pz(z) + b m_x - log c_x, so the
// Lagrangian is sum_z q(z) log(pz(z) / q(z)) + sum_x prior(x) (b m_x -
// log c_x), where q is the output marginal of that matrix. Infinite when a
// positive-prior row would be empty.
double KernelFormLagrangian(const Prior& prior, const Matrix& kernel,
                            const Eigen::VectorXd& nearest, double b,
                            const Eigen::RowVectorXd& pz) {
  Eigen::RowVectorXd q = Eigen::RowVectorXd::Zero(pz.size());
  double value = 0.0;
  for (int x = 0; x < kernel.rows(); ++x) {
    if (prior[x] <= 0.0) continue;
    const double c = kernel.row(x).dot(pz);
    if (!(c > 0.0)) return std::numeric_limits<double>::infinity();
    q += (prior[x] / c) * kernel.row(x);
    value += prior[x] * (b * nearest[x] - std::log(c));
  }
  for (int z = 0; z < pz.size(); ++z) {
    const double qz = q[z] * pz[z];
    if (qz > 0.0) value += qz * std::log(pz[z] / qz);
  }
  return value;
}

class MarginalExtrapolation {
 public:
  MarginalExtrapolation(const Eigen::RowVectorXd& p0,
                        const Eigen::RowVectorXd& p1,
                        const Eigen::RowVectorXd& p2)
      : l0_(Eigen::VectorXd::Constant(
            p0.size(), -std::numeric_limits<double>::infinity())),
        r_(Eigen::VectorXd::Zero(p0.size())),
        v_(Eigen::VectorXd::Zero(p0.size())) {
    for (int z = 0; z < p0.size(); ++z) {
      if (p0[z] <= 0.0 || p1[z] <= 0.0 || p2[z] <= 0.0) continue;
      l0_[z] = std::log(p0[z]);
      r_[z] = std::log(p1[z]) - l0_[z];
      v_[z] = std::log(p2[z]) - 2.0 * std::log(p1[z]) + l0_[z];
    }
    const double vn = v_.norm();
    alpha_ = vn > 0.0 ? -r_.norm() / vn : -1.0;
  }

  // Step length of the squared extrapolation; -1 reproduces two plain steps.
  double alpha() const { return alpha_; }

  Eigen::RowVectorXd At(double alpha) const {
    // Bound on the log change of one marginal, so no column underflows.
    constexpr double kMaxLogStep = 20.0;
    const int n = static_cast<int>(l0_.size());
    Eigen::VectorXd logs = l0_;
    for (int z = 0; z < n; ++z) {
      if (!std::isfinite(l0_[z])) continue;
      logs[z] += std::clamp(-2.0 * alpha * r_[z] + alpha * alpha * v_[z],
                            -kMaxLogStep, kMaxLogStep);
    }
    double top = -std::numeric_limits<double>::infinity();
    for (int z = 0; z < n; ++z) {
      if (std::isfinite(l0_[z])) top = std::max(top, logs[z]);
    }
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(n);
    for (int z = 0; z < n; ++z) {
      if (std::isfinite(l0_[z])) out[z] = std::exp(logs[z] - top);
    }
    return out / out.sum();
  }

 private:
  Eigen::VectorXd l0_;
  Eigen::VectorXd r_;
  Eigen::VectorXd v_;
  double alpha_;
};

}  // namespace

Matrix BlahutArimotoUpdate(const Prior& prior, const Matrix& distances,
                           double b, const Matrix& f) {
  return BaStep(prior, ShiftedKernel(distances, b), f);
}

double RateDistortionLagrangian(const Prior& prior, const Matrix& distances,
                                double b, const Matrix& f) {
  Eigen::RowVectorXd pz = Eigen::RowVectorXd::Zero(f.cols());
  for (int x = 0; x < f.rows(); ++x) pz += prior[x] * f.row(x);
  double info = 0.0;
  double loss = 0.0;
  for (int x = 0; x < f.rows(); ++x) {
    if (prior[x] <= 0.0) continue;
    for (int z = 0; z < f.cols(); ++z) {
      const double v = f(x, z);
      if (v <= 0.0) continue;
      info += prior[x] * v * std::log(v / pz[z]);
      loss += prior[x] * v * distances(x, z);
    }
  }
  return info + b * loss;
}

absl::StatusOr<BaTrace> RunBlahutArimoto(const Prior& prior,
                                         const std::vector<Location>& outputs,
                                         const DistanceFn& dq,
                                         const BaParams& params,
                                         const std::optional<Matrix>& warm_start) {
  if (!(params.b >= 0.0) || !std::isfinite(params.b)) {
    return absl::InvalidArgumentError("BA rate b must be >= 0");
  }
  if (!(params.convergence_threshold > 0.0) || params.max_iterations < 1) {
    return absl::InvalidArgumentError("invalid BA stopping parameters");
  }
  if (outputs.empty()) return absl::InvalidArgumentError("no outputs");
  if (!(params.q_max > 0.0)) {
    return absl::InvalidArgumentError("BA q_max must be > 0");
  }
  absl::StatusOr<Matrix> d = DistanceMatrix(dq, prior.poi(), outputs);
  if (!d.ok()) return d.status();
  if (std::isfinite(params.q_max)) {
    for (int x = 0; x < d->rows(); ++x) {
      bool any = false;
      for (int z = 0; z < d->cols(); ++z) {
        if ((*d)(x, z) > params.q_max) {
          (*d)(x, z) = std::numeric_limits<double>::infinity();
        } else {
          any = true;
        }
      }
      if (!any && prior[x] > 0.0) {
        return absl::FailedPreconditionError(absl::StrFormat(
            "input %d has no output within %.6g km", x, params.q_max));
      }
    }
  }
  const Matrix kernel = ShiftedKernel(*d, params.b);

  BaTrace trace;
  if (warm_start.has_value()) {
    if (warm_start->rows() != d->rows() || warm_start->cols() != d->cols()) {
      return absl::InvalidArgumentError("warm start has the wrong shape");
    }
    trace.matrix = *warm_start;
  } else {
    trace.matrix = Matrix::Constant(d->rows(), d->cols(), 1.0 / d->cols());
  }
  // Each pass takes two plain steps, f0 -> f1 -> f2, and then tries an
  // extrapolated marginal that must beat f2 on the Lagrangian. The stopping
  // test always uses the plain step f0 -> f1.
  Eigen::VectorXd nearest(d->rows());
  for (int x = 0; x < d->rows(); ++x) {
    nearest[x] = std::isfinite(d->row(x).minCoeff()) ? d->row(x).minCoeff() : 0.0;
  }
  int failures = 0;
  int skip = 0;
  auto record = [&](const Matrix& f) {
    if (params.record_lagrangian) {
      trace.lagrangian.push_back(
          RateDistortionLagrangian(prior, *d, params.b, f));
    }
  };
  while (trace.iterations < params.max_iterations) {
    Matrix f1 = BaStep(prior, kernel, trace.matrix);
    const double change = (f1 - trace.matrix).cwiseAbs().maxCoeff();
    ++trace.iterations;
    if (change < params.convergence_threshold) {
      trace.matrix = std::move(f1);
      record(trace.matrix);
      trace.converged = true;
      break;
    }
    if (!params.extrapolate || trace.iterations >= params.max_iterations) {
      trace.matrix = std::move(f1);
      record(trace.matrix);
      continue;
    }
    record(f1);
    const Eigen::RowVectorXd p0 = BaMarginal(prior, trace.matrix);
    const Eigen::RowVectorXd p1 = BaMarginal(prior, f1);
    Matrix f2 = BaFromMarginal(kernel, p1);
    ++trace.iterations;
    trace.matrix = std::move(f2);
    // Backtrack the step toward two plain steps until it pays off. After a
    // pass where nothing pays off, skip extrapolation for a number of passes
    // that doubles with each consecutive failure.
    constexpr int kMaxBacktracks = 8;
    constexpr int kMaxSkipLog2 = 6;
    if (skip > 0) {
      --skip;
      record(trace.matrix);
      continue;
    }
    const Eigen::RowVectorXd p2 = BaMarginal(prior, trace.matrix);
    const MarginalExtrapolation ext(p0, p1, p2);
    const double plain = KernelFormLagrangian(prior, kernel, nearest, params.b, p1);
    double alpha = ext.alpha();
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks && alpha < -1.0; ++k) {
      const Eigen::RowVectorXd pe = ext.At(alpha);
      if (KernelFormLagrangian(prior, kernel, nearest, params.b, pe) <= plain) {
        trace.matrix = BaFromMarginal(kernel, pe);
        accepted = true;
        break;
      }
      alpha = (alpha - 1.0) / 2.0;
    }
    if (accepted) {
      failures = 0;
    } else {
      skip = (1 << std::min(failures, kMaxSkipLog2)) - 1;
      ++failures;
    }
    record(trace.matrix);
  }
  return trace;
}

absl::StatusOr<DiscreteMechanism> BuildBaUnremapped(
    const Prior& prior, const std::vector<Location>& outputs,
    const DistanceFn& dq, const BaParams& params) {
  absl::StatusOr<BaTrace> trace = RunBlahutArimoto(prior, outputs, dq, params);
  if (!trace.ok()) return trace.status();
  if (!trace->converged) {
    return absl::DeadlineExceededError(absl::StrCat(
        "Blahut-Arimoto did not converge in ", trace->iterations,
        " iterations (b = ", params.b, ")"));
  }
  return DiscreteMechanism::Create(prior.poi_ptr(), outputs,
                                   std::move(trace->matrix));
}

absl::StatusOr<DiscreteMechanism> BuildBa(const Prior& prior,
                                          const std::vector<Location>& outputs,
                                          const DistanceFn& dq,
                                          const BaParams& params,
                                          const EstimateSpace& space,
                                          const WeiszfeldConfig& cfg) {
  absl::StatusOr<DiscreteMechanism> raw =
      BuildBaUnremapped(prior, outputs, dq, params);
  if (!raw.ok()) return raw.status();
  return OptimalRemap(*raw, prior, dq, space, cfg);
}

absl::StatusOr<BaTuning> TuneBaB(const Prior& prior,
                                 const std::vector<Location>& outputs,
                                 const DistanceFn& dq, double q_target,
                                 double b_lo, double b_hi,
                                 const BaParams& base,
                                 const EstimateSpace& space,
                                 double relative_tolerance,
                                 const WeiszfeldConfig& cfg) {
  if (!(b_lo > 0.0) || !(b_hi > b_lo)) {
    return absl::InvalidArgumentError("need 0 < b_lo < b_hi");
  }
  BaTuning out;
  auto loss_at = [&](double b) -> absl::StatusOr<double> {
    BaParams p = base;
    p.b = b;
    absl::StatusOr<DiscreteMechanism> m =
        BuildBa(prior, outputs, dq, p, space, cfg);
    if (!m.ok()) return m.status();
    ++out.evaluations;
    return AverageQualityLoss(*m, prior, dq);
  };
  auto close = [&](double q) {
    return std::abs(q - q_target) <= relative_tolerance * q_target;
  };

  absl::StatusOr<double> q_lo = loss_at(b_lo);
  if (!q_lo.ok()) return q_lo.status();
  absl::StatusOr<double> q_hi = loss_at(b_hi);
  if (!q_hi.ok()) return q_hi.status();
  out.params = base;
  if (close(*q_lo)) {
    out.params.b = b_lo;
    out.q_avg = *q_lo;
    return out;
  }
  if (close(*q_hi)) {
    out.params.b = b_hi;
    out.q_avg = *q_hi;
    return out;
  }
  if (!(*q_lo > q_target && q_target > *q_hi)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "target %.6g km outside bracket losses [%.6g, %.6g]", q_target, *q_hi,
        *q_lo));
  }
  double lo = std::log(b_lo), hi = std::log(b_hi);
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    absl::StatusOr<double> q = loss_at(std::exp(mid));
    if (!q.ok()) return q.status();
    if (close(*q)) {
      out.params.b = std::exp(mid);
      out.q_avg = *q;
      return out;
    }
    if (*q > q_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return absl::InternalError("BA tuning did not reach the target loss");
}

}  // namespace lppm
