// Copyright 2026 The dpsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsum/strategy.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpsum/noise.h"

namespace dpsum {
namespace {

constexpr int kMinBranching = 2;
constexpr int kMaxBranching = 16;

Eigen::Index CeilDiv(Eigen::Index a, Eigen::Index b) { return (a + b - 1) / b; }

// Evaluates Delta(A)^2 Tr(W (A^T A)^{-1} W^T) for hierarchical strategies.
//
// With c_l the squared weight of level l, A^T A = c_0 I + sum over internal
// nodes v of c_v 1_v 1_v^T. Restricted to a node's leaves that is
// S_v = B_v + c_v 1 1^T with B_v block-diagonal in the children, so
// Sherman-Morrison peels one node at a time:
//   (A^T A)^{-1} = I / c_0 - sum_v gamma_v g_v g_v^T,
//   g_v = B_v^{-1} 1,  gamma_v = c_v / (1 + c_v 1^T g_v).
// Only W g_v and 1^T g_v are needed, and both aggregate from the children's
// W h and 1^T h with h = S^{-1} 1 = g / (1 + c 1^T g). Cost is O(p * nodes).
class TreeObjective {
 public:
  explicit TreeObjective(const Eigen::MatrixXd& w)
      : n_(w.cols()), frobenius2_(w.squaredNorm()) {
    cumulative_.resize(w.rows(), n_ + 1);
    cumulative_.col(0).setZero();
    for (Eigen::Index i = 0; i < n_; ++i) {
      cumulative_.col(i + 1) = cumulative_.col(i) + w.col(i);
    }
  }

  double operator()(std::span<const int> branching,
                    std::span<const double> weights) const {
    const double c0 = weights[0] * weights[0];
    if (!(c0 > 0.0)) return std::numeric_limits<double>::infinity();
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;

    double removed = 0.0;
    Eigen::MatrixXd prev_wh;
    Eigen::VectorXd prev_sh;
    Eigen::Index prev_count = n_;
    Eigen::VectorXd wg(cumulative_.rows());
    for (std::size_t level = 0; level < branching.size(); ++level) {
      const Eigen::Index b = branching[level];
      const Eigen::Index count = CeilDiv(prev_count, b);
      const double c = weights[level + 1] * weights[level + 1];
      Eigen::MatrixXd wh(cumulative_.rows(), count);
      Eigen::VectorXd sh(count);
      for (Eigen::Index j = 0; j < count; ++j) {
        const Eigen::Index first = j * b;
        const Eigen::Index last = std::min(prev_count, first + b);
        double sg;
        if (level == 0) {
          wg = (cumulative_.col(last) - cumulative_.col(first)) / c0;
          sg = static_cast<double>(last - first) / c0;
        } else {
          wg = prev_wh.middleCols(first, last - first).rowwise().sum();
          sg = prev_sh.segment(first, last - first).sum();
        }
        const double shrink = 1.0 / (1.0 + c * sg);
        removed += c * shrink * wg.squaredNorm();
        wh.col(j) = shrink * wg;
        sh[j] = shrink * sg;
      }
      prev_wh = std::move(wh);
      prev_sh = std::move(sh);
      prev_count = count;
    }
    const double trace = std::max(0.0, frobenius2_ / c0 - removed);
    return weight_sum * weight_sum * trace;
  }

  double identity_value() const { return frobenius2_; }

 private:
  Eigen::Index n_;
  double frobenius2_;
  // cumulative_.col(k) = sum of the first k columns of W.
  Eigen::MatrixXd cumulative_;
};

// Minimises a unimodal-ish f on [lo, hi].
std::pair<double, double> GoldenSection(const std::function<double(double)>& f,
                                        double lo, double hi, int iterations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iterations; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

absl::StatusOr<StrategyMatrix> StrategyMatrix::Create(Eigen::MatrixXd a) {
  if (a.rows() < 1 || a.cols() < 1) {
    return absl::InvalidArgumentError("strategy matrix must be non-empty");
  }
  if (!a.allFinite()) {
    return absl::InvalidArgumentError("strategy matrix has non-finite entries");
  }
  auto impl = std::make_shared<Impl>();
  const Eigen::Index n = a.cols();
  const Eigen::MatrixXd gram = a.transpose() * a;
  impl->gram_llt.compute(gram);
  const Eigen::VectorXd diag = impl->gram_llt.matrixLLT().diagonal();
  if (impl->gram_llt.info() != Eigen::Success ||
      !(diag.minCoeff() > 1e-7 * diag.maxCoeff())) {
    return absl::FailedPreconditionError(
        "strategy matrix is not of full column rank");
  }
  if (n <= kGramInverseLimit) {
    impl->gram_inverse =
        impl->gram_llt.solve(Eigen::MatrixXd::Identity(n, n));
  }
  if (n > kQrThreshold) impl->qr.emplace(a);
  impl->sensitivity = SensitivityL1(a);
  impl->a = std::move(a);
  return StrategyMatrix(std::move(impl));
}

StrategyMatrix StrategyMatrix::Identity(Eigen::Index n) {
  return *Create(Eigen::MatrixXd::Identity(n, n));
}

Eigen::MatrixXd StrategyMatrix::SolveGram(const Eigen::MatrixXd& rhs) const {
  if (impl_->gram_inverse) return *impl_->gram_inverse * rhs;
  return impl_->gram_llt.solve(rhs);
}

absl::StatusOr<Eigen::VectorXd> LeastSquares(const StrategyMatrix& a,
                                             const Eigen::VectorXd& z) {
  if (z.size() != a.rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat("measurement vector has length ", z.size(),
                     " but the strategy has ", a.rows(), " rows"));
  }
  if (a.impl_->qr) return Eigen::VectorXd(a.impl_->qr->solve(z));
  return Eigen::VectorXd(a.SolveGram(a.matrix().transpose() * z));
}

double HierarchicalVarianceObjective(const Eigen::MatrixXd& workload,
                                     const std::vector<int>& branching,
                                     const std::vector<double>& level_weights) {
  return TreeObjective(workload)(branching, level_weights);
}

Eigen::MatrixXd HierarchicalStrategyMatrix(
    Eigen::Index n, const std::vector<int>& branching,
    const std::vector<double>& level_weights) {
  std::vector<Eigen::Index> starts(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> ends(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    starts[static_cast<std::size_t>(i)] = i;
    ends[static_cast<std::size_t>(i)] = i + 1;
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> rows;
  std::vector<double> row_weight;
  for (Eigen::Index i = 0; i < n; ++i) {
    rows.emplace_back(i, i + 1);
    row_weight.push_back(level_weights[0]);
  }
  for (std::size_t level = 0; level < branching.size(); ++level) {
    const auto b = static_cast<std::size_t>(branching[level]);
    const std::size_t count = (starts.size() + b - 1) / b;
    std::vector<Eigen::Index> next_starts(count), next_ends(count);
    for (std::size_t j = 0; j < count; ++j) {
      next_starts[j] = starts[j * b];
      next_ends[j] = ends[std::min(starts.size(), j * b + b) - 1];
      rows.emplace_back(next_starts[j], next_ends[j]);
      row_weight.push_back(level_weights[level + 1]);
    }
    starts = std::move(next_starts);
    ends = std::move(next_ends);
  }
  Eigen::MatrixXd a =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    a.row(static_cast<Eigen::Index>(r))
        .segment(rows[r].first, rows[r].second - rows[r].first)
        .setConstant(row_weight[r]);
  }
  return a;
}

absl::StatusOr<GreedyStrategy> GreedyH(const Eigen::MatrixXd& workload) {
  if (workload.rows() < 1 || workload.cols() < 1) {
    return absl::InvalidArgumentError("workload must be non-empty");
  }
  if (!workload.allFinite()) {
    return absl::InvalidArgumentError("workload has non-finite entries");
  }
  const Eigen::Index n = workload.cols();
  const TreeObjective objective(workload);

  std::vector<int> branching;
  std::vector<double> weights{1.0};
  double best = objective.identity_value();
  Eigen::Index top = n;

  while (top > 1) {
    double level_best = std::numeric_limits<double>::infinity();
    int level_b = 0;
    double level_t = 0.0;
    const int max_b = static_cast<int>(std::min<Eigen::Index>(kMaxBranching, top));
    std::vector<int> trial_branching = branching;
    trial_branching.push_back(0);
    std::vector<double> trial_weights(weights.size() + 1);
    for (int b = kMinBranching; b <= max_b; ++b) {
      trial_branching.back() = b;
      auto mixed = [&](double t) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
          trial_weights[l] = weights[l] * (1.0 - t);
        }
        trial_weights.back() = t;
        return objective(trial_branching, trial_weights);
      };
      const auto [t, value] = GoldenSection(mixed, 1e-4, 1.0 - 1e-4, 40);
      if (value < level_best) {
        level_best = value;
        level_b = b;
        level_t = t;
      }
    }
    if (!(level_best < best)) break;
    for (double& w : weights) w *= 1.0 - level_t;
    weights.push_back(level_t);
    branching.push_back(level_b);
    best = level_best;
    top = CeilDiv(top, level_b);
  }

  // Per-level refinement in log space.
  if (!branching.empty()) {
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (std::size_t l = 0; l < weights.size(); ++l) {
        std::vector<double> trial = weights;
        auto scaled = [&](double u) {
          trial[l] = weights[l] * std::exp(u);
          return objective(branching, trial);
        };
        const auto [u, value] = GoldenSection(scaled, -3.0, 3.0, 30);
        if (value < best) {
          best = value;
          weights[l] *= std::exp(u);
        }
      }
    }
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;

  GreedyStrategy out;
  absl::StatusOr<StrategyMatrix> built =
      StrategyMatrix::Create(HierarchicalStrategyMatrix(n, branching, weights));
  if (built.ok()) {
    out.strategy = *std::move(built);
    out.branching = std::move(branching);
    out.level_weights = std::move(weights);
  } else {
    out.strategy = StrategyMatrix::Identity(n);
    out.level_weights = {1.0};
    out.warnings.push_back(absl::StrCat(
        "hierarchical strategy rejected (", built.status().message(),
        "); using the identity strategy"));
  }
  return out;
}

namespace {

absl::Status CheckErrorInputs(const Eigen::MatrixXd& w,
                              const Eigen::VectorXd& d,
                              const Eigen::VectorXd& t,
                              const Eigen::VectorXd& x,
                              const StrategyMatrix& a, double epsilon) {
  const Eigen::Index n = w.cols();
  if (d.size() != n || t.size() != n || x.size() != n || a.cols() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: workload has ", n, " columns, weights ", d.size(),
        ", truncated weights ", t.size(), ", counts ", x.size(),
        ", strategy ", a.cols()));
  }
  if (!(epsilon > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive, got ", epsilon));
  }
  return absl::OkStatus();
}

double BiasTerm(const Eigen::MatrixXd& w, const Eigen::VectorXd& d,
                const Eigen::VectorXd& t, const Eigen::VectorXd& x) {
  return (w * (d - t).cwiseProduct(x)).squaredNorm();
}

// Tr(M (A^T A)^{-1} M^T).
double GramTrace(const Eigen::MatrixXd& m, const StrategyMatrix& a) {
  const Eigen::MatrixXd y = a.SolveGram(m.transpose());
  return m.transpose().cwiseProduct(y).sum();
}

}  // namespace

absl::StatusOr<double> ExpectedErrorTimm(const Eigen::MatrixXd& workload,
                                         const Eigen::VectorXd& weights,
                                         const Eigen::VectorXd& truncated,
                                         const Eigen::VectorXd& counts,
                                         const StrategyMatrix& a,
                                         double epsilon) {
  if (absl::Status s =
          CheckErrorInputs(workload, weights, truncated, counts, a, epsilon);
      !s.ok()) {
    return s;
  }
  const double delta = SensitivityL1(a.matrix() * truncated.asDiagonal());
  return BiasTerm(workload, weights, truncated, counts) +
         2.0 * delta * delta / (epsilon * epsilon) * GramTrace(workload, a);
}

absl::StatusOr<double> ExpectedErrorTamm(const Eigen::MatrixXd& workload,
                                         const Eigen::VectorXd& weights,
                                         const Eigen::VectorXd& truncated,
                                         const Eigen::VectorXd& counts,
                                         const StrategyMatrix& a,
                                         double epsilon) {
  if (absl::Status s =
          CheckErrorInputs(workload, weights, truncated, counts, a, epsilon);
      !s.ok()) {
    return s;
  }
  const double delta = a.sensitivity();
  const Eigen::MatrixXd weighted = workload * truncated.asDiagonal();
  return BiasTerm(workload, weights, truncated, counts) +
         2.0 * delta * delta / (epsilon * epsilon) * GramTrace(weighted, a);
}

}  // namespace dpsum
