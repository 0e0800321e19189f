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

// Strategy matrices for the matrix mechanism: construction, least-squares
// reconstruction and closed-form expected error.

#ifndef DPSUM_STRATEGY_H_
#define DPSUM_STRATEGY_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace dpsum {

// An m x n measurement matrix of full column rank together with the
// factorizations needed to reconstruct and to evaluate error. Immutable;
// copies share the factorizations.
class StrategyMatrix {
 public:
  // Fails with FailedPrecondition when `a` is not of full column rank.
  static absl::StatusOr<StrategyMatrix> Create(Eigen::MatrixXd a);
  static StrategyMatrix Identity(Eigen::Index n);

  const Eigen::MatrixXd& matrix() const { return impl_->a; }
  Eigen::Index rows() const { return impl_->a.rows(); }
  Eigen::Index cols() const { return impl_->a.cols(); }

  // Maximum absolute column sum of A.
  double sensitivity() const { return impl_->sensitivity; }

  // (A^T A)^{-1} rhs. Uses the cached inverse for small n and the Cholesky
  // factor otherwise.
  Eigen::MatrixXd SolveGram(const Eigen::MatrixXd& rhs) const;

  // Cached (A^T A)^{-1}; only held for n <= kGramInverseLimit.
  const Eigen::MatrixXd* gram_inverse() const {
    return impl_->gram_inverse ? &*impl_->gram_inverse : nullptr;
  }

  static constexpr Eigen::Index kQrThreshold = 64;
  static constexpr Eigen::Index kGramInverseLimit = 256;

 private:
  struct Impl {
    Eigen::MatrixXd a;
    double sensitivity = 0.0;
    Eigen::LLT<Eigen::MatrixXd> gram_llt;
    std::optional<Eigen::MatrixXd> gram_inverse;
    std::optional<Eigen::HouseholderQR<Eigen::MatrixXd>> qr;
  };
  explicit StrategyMatrix(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}

  friend absl::StatusOr<Eigen::VectorXd> LeastSquares(const StrategyMatrix&,
                                                      const Eigen::VectorXd&);

  std::shared_ptr<const Impl> impl_;
};

// argmin_y ||A y - z||_2. InvalidArgument on a length mismatch.
absl::StatusOr<Eigen::VectorXd> LeastSquares(const StrategyMatrix& a,
                                             const Eigen::VectorXd& z);

// A hierarchical strategy: level 0 measures every column, each higher level
// measures sums over consecutive groups of the level below.
struct GreedyStrategy {
  StrategyMatrix strategy = StrategyMatrix::Identity(1);
  // Group size used to build each level above the leaves.
  std::vector<int> branching;
  // Weight of each level, leaves first; sums to one.
  std::vector<double> level_weights;
  std::vector<std::string> warnings;
};

// Builds a workload-adapted hierarchical strategy over the columns of
// `workload` (a 0-1 workload W or a weighted workload W T). Levels are added
// bottom-up; each picks its group size from 2..16 and the level weights are
// tuned to minimise Delta(A)^2 Tr(W (A^T A)^{-1} W^T). The result never does
// worse than the identity strategy on that objective, and its sensitivity is
// one.
absl::StatusOr<GreedyStrategy> GreedyH(const Eigen::MatrixXd& workload);

// Delta(A)^2 * Tr(W (A^T A)^{-1} W^T) for the hierarchy given by `branching`
// and `level_weights`, computed from the tree structure without forming A.
// Exposed for cross-checking against the dense evaluators.
double HierarchicalVarianceObjective(const Eigen::MatrixXd& workload,
                                     const std::vector<int>& branching,
                                     const std::vector<double>& level_weights);

// Dense matrix of the hierarchy described by `branching` and `level_weights`.
Eigen::MatrixXd HierarchicalStrategyMatrix(
    Eigen::Index n, const std::vector<int>& branching,
    const std::vector<double>& level_weights);

// Expected total squared error of the truncation-independent matrix
// mechanism against the untruncated answers W D x:
//   ||W (D - T) x||^2 + 2 Delta(A T)^2 / eps^2 * Tr(W (A^T A)^{-1} W^T).
// `weights` and `truncated` are the diagonals of D and T.
absl::StatusOr<double> ExpectedErrorTimm(const Eigen::MatrixXd& workload,
                                         const Eigen::VectorXd& weights,
                                         const Eigen::VectorXd& truncated,
                                         const Eigen::VectorXd& counts,
                                         const StrategyMatrix& a,
                                         double epsilon);

// Truncation-aware counterpart:
//   ||W (D - T) x||^2 + 2 Delta(A)^2 / eps^2 * Tr(W T (A^T A)^{-1} T W^T).
absl::StatusOr<double> ExpectedErrorTamm(const Eigen::MatrixXd& workload,
                                         const Eigen::VectorXd& weights,
                                         const Eigen::VectorXd& truncated,
                                         const Eigen::VectorXd& counts,
                                         const StrategyMatrix& a,
                                         double epsilon);

}  // namespace dpsum

#endif  // DPSUM_STRATEGY_H_
