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

// Differentially private answering of prefix-sum workloads.
//
// Single query mode (SQM) answers every query on its own with an even share
// of the budget. The batch mechanisms work on the vector form: counts x,
// workload W and diagonal weights T (bucket upper bounds, possibly clipped at
// a threshold theta), and release noisy versions of W T x:
//
//   Identity  W T (x + b / eps2)
//   Workload  W T x + (||W T||_1 / eps2) b
//   TiMM      W (T x + (||A T||_1 / eps2) A^+ b),   A chosen for W
//   TaMM      W T (x + (||A||_1 / eps2) A^+ b),     A chosen for W T
//
// where b is standard Laplace noise of the appropriate length.

#ifndef DPSUM_MECHANISMS_H_
#define DPSUM_MECHANISMS_H_

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpsum/data_model.h"
#include "dpsum/noise.h"
#include "dpsum/random.h"
#include "dpsum/strategy.h"
#include "dpsum/threshold_selection.h"

namespace dpsum {

enum class TruncationMode { kNone, kSvt, kRecursive, kFixed };

std::string_view TruncationModeName(TruncationMode mode);

struct TruncationConfig {
  TruncationMode mode = TruncationMode::kNone;
  SvtThresholdParams svt;
  // A non-positive beta means 2 * epsilon2 / 5 for whatever epsilon2 the
  // measurement step receives.
  RecursiveThresholdParams recursive;
  // Data-independent threshold for kFixed.
  double fixed_theta = 0.0;

  // True when the threshold is learned from the data and costs budget.
  bool selects() const {
    return mode == TruncationMode::kSvt || mode == TruncationMode::kRecursive;
  }
};

absl::Status ValidateTruncation(const TruncationConfig& t);

struct MechanismResult {
  std::string mechanism;
  Eigen::VectorXd answers;
  // Shared threshold of a batch run; empty without truncation.
  std::optional<double> threshold;
  // Per-query thresholds of an SQM run (NaN where no truncation applied).
  std::vector<double> query_thresholds;
  BudgetLedger ledger;
  std::vector<std::string> warnings;
};

struct BatchAnswer {
  Eigen::VectorXd answers;
  // Multiplier applied to the standard Laplace vector.
  double noise_scale = 0.0;
  std::vector<std::string> warnings;
};

// Each query sigma_j answered as PrefixSum(D, sigma_j) + Lap(sigma_j / eps')
// with eps' = epsilon / p.
absl::StatusOr<MechanismResult> SqmNoTrunc(const Dataset& d,
                                           std::span<const double> thresholds,
                                           double epsilon, RandomSource& rng);

// Per query, with eps_j = epsilon / p: pick theta_j using rho * eps_j; when
// theta_j < sigma_j answer PrefixSum(TruncateDataset(D, theta_j), sigma_j)
// + Lap(theta_j / ((1 - rho) eps_j)), otherwise the untruncated answer with
// scale sigma_j / ((1 - rho) eps_j). kFixed and kNone spend nothing on
// selection.
absl::StatusOr<MechanismResult> SqmTrunc(const Dataset& d,
                                         std::span<const double> thresholds,
                                         const PrivacyBudget& budget,
                                         const TruncationConfig& truncation,
                                         RandomSource& rng);

// `truncated` is the diagonal of T throughout.
absl::StatusOr<BatchAnswer> IdentityMechanism(const Eigen::MatrixXd& workload,
                                              const Eigen::VectorXd& truncated,
                                              const Eigen::VectorXd& counts,
                                              double epsilon2,
                                              RandomSource& rng);

absl::StatusOr<BatchAnswer> WorkloadMechanism(const Eigen::MatrixXd& workload,
                                              const Eigen::VectorXd& truncated,
                                              const Eigen::VectorXd& counts,
                                              double epsilon2,
                                              RandomSource& rng);

// When `strategy` is null it is built with GreedyH(W).
absl::StatusOr<BatchAnswer> Timm(const Eigen::MatrixXd& workload,
                                 const Eigen::VectorXd& truncated,
                                 const Eigen::VectorXd& counts,
                                 double epsilon2, RandomSource& rng,
                                 const StrategyMatrix* strategy = nullptr);

// When `strategy` is null it is built with GreedyH(W T).
absl::StatusOr<BatchAnswer> Tamm(const Eigen::MatrixXd& workload,
                                 const Eigen::VectorXd& truncated,
                                 const Eigen::VectorXd& counts,
                                 double epsilon2, RandomSource& rng,
                                 const StrategyMatrix* strategy = nullptr);

// Memoises GreedyH by input matrix. Safe for concurrent use.
class StrategyCache {
 public:
  absl::StatusOr<std::shared_ptr<const GreedyStrategy>> GetOrBuild(
      const Eigen::MatrixXd& workload);

  std::size_t size() const;

 private:
  struct Entry {
    Eigen::MatrixXd workload;
    std::shared_ptr<const GreedyStrategy> strategy;
  };
  mutable std::mutex mu_;
  std::multimap<std::uint64_t, Entry> entries_;
};

enum class BatchMechanism { kIdentity, kWorkload, kTimm, kTamm };

std::string_view BatchMechanismName(BatchMechanism m);

struct BqmOptions {
  TruncationConfig truncation;
  std::vector<BatchMechanism> mechanisms = {
      BatchMechanism::kIdentity, BatchMechanism::kWorkload,
      BatchMechanism::kTimm, BatchMechanism::kTamm};
  // Optional; strategies are rebuilt on every call without it.
  StrategyCache* cache = nullptr;
};

// Vectorizes once, selects one threshold with epsilon1 and answers the
// workload with each requested batch mechanism at epsilon2. The mechanisms
// draw their noise from copies of one stream, so their leading Laplace draws
// coincide. Each result on its own is epsilon-DP; releasing several together
// is not.
absl::StatusOr<std::vector<MechanismResult>> Bqm(const Dataset& d,
                                                 const BucketSpec& buckets,
                                                 const WorkloadMatrix& workload,
                                                 const PrivacyBudget& budget,
                                                 const BqmOptions& options,
                                                 RandomSource& rng);

}  // namespace dpsum

#endif  // DPSUM_MECHANISMS_H_
