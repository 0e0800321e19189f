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

#include "dpsum/mechanisms.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpsum {
namespace {

constexpr char kSelectionComponent[] = "threshold_selection";
constexpr char kMeasurementComponent[] = "measurement";

// Laplace noise at `scale`; a zero scale (zero sensitivity) adds nothing.
double AddLaplace(double value, double scale, RandomSource& rng) {
  if (scale == 0.0) return value;
  return value + *LaplaceSample(scale, rng);
}

absl::Status CheckBatchInputs(const Eigen::MatrixXd& w,
                              const Eigen::VectorXd& t,
                              const Eigen::VectorXd& x, double epsilon2) {
  if (t.size() != w.cols() || x.size() != w.cols()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: workload has ", w.cols(), " columns, weights ",
        t.size(), ", counts ", x.size()));
  }
  if (!(epsilon2 > 0.0) || !std::isfinite(epsilon2)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon2 must be positive, got ", epsilon2));
  }
  return absl::OkStatus();
}

// Budget actually handed to selection and measurement for a configuration.
struct Split {
  double selection;
  double measurement;
};

absl::StatusOr<Split> SplitFor(const PrivacyBudget& budget,
                               const TruncationConfig& truncation) {
  if (!truncation.selects()) return Split{0.0, budget.epsilon()};
  if (!(budget.rho() > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(TruncationModeName(truncation.mode)),
        " threshold selection needs rho > 0"));
  }
  return Split{budget.epsilon1(), budget.epsilon2()};
}

BudgetLedger MakeLedger(const Split& split) {
  BudgetLedger ledger;
  if (split.selection > 0.0) {
    ledger.push_back({kSelectionComponent, split.selection});
  }
  ledger.push_back({kMeasurementComponent, split.measurement});
  return ledger;
}

absl::StatusOr<ThresholdSelection> SelectThreshold(
    const Dataset& d, const TruncationConfig& truncation, double epsilon1,
    double epsilon2, RandomSource& rng) {
  switch (truncation.mode) {
    case TruncationMode::kSvt:
      return SelectThresholdSvt(d, truncation.svt, epsilon1, rng);
    case TruncationMode::kRecursive: {
      RecursiveThresholdParams params = truncation.recursive;
      if (!(params.beta > 0.0)) params.beta = 2.0 * epsilon2 / 5.0;
      return SelectThresholdRecursive(d, params, epsilon1, rng);
    }
    case TruncationMode::kFixed: {
      ThresholdSelection fixed;
      fixed.theta = truncation.fixed_theta;
      return fixed;
    }
    case TruncationMode::kNone:
      break;
  }
  ThresholdSelection none;
  none.theta = std::numeric_limits<double>::infinity();
  return none;
}

std::uint64_t HashMatrix(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(m.rows()));
  mix(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    std::uint64_t bits;
    const double v = m.data()[k];
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  return h;
}

}  // namespace

std::string_view TruncationModeName(TruncationMode mode) {
  switch (mode) {
    case TruncationMode::kNone:
      return "none";
    case TruncationMode::kSvt:
      return "svt";
    case TruncationMode::kRecursive:
      return "recursive";
    case TruncationMode::kFixed:
      return "fixed";
  }
  return "unknown";
}

std::string_view BatchMechanismName(BatchMechanism m) {
  switch (m) {
    case BatchMechanism::kIdentity:
      return "identity";
    case BatchMechanism::kWorkload:
      return "workload";
    case BatchMechanism::kTimm:
      return "timm";
    case BatchMechanism::kTamm:
      return "tamm";
  }
  return "unknown";
}

absl::Status ValidateTruncation(const TruncationConfig& t) {
  switch (t.mode) {
    case TruncationMode::kSvt:
      return ValidateSvtParams(t.svt);
    case TruncationMode::kRecursive: {
      RecursiveThresholdParams p = t.recursive;
      if (!(p.beta > 0.0)) p.beta = 1.0;  // Filled in from epsilon2 later.
      return ValidateRecursiveParams(p);
    }
    case TruncationMode::kFixed:
      if (!(t.fixed_theta >= 0.0) || !std::isfinite(t.fixed_theta)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "fixed truncation threshold must be non-negative, got ",
            t.fixed_theta));
      }
      return absl::OkStatus();
    case TruncationMode::kNone:
      return absl::OkStatus();
  }
  return absl::InvalidArgumentError("unknown truncation mode");
}

absl::StatusOr<MechanismResult> SqmNoTrunc(const Dataset& d,
                                           std::span<const double> thresholds,
                                           double epsilon, RandomSource& rng) {
  absl::StatusOr<PrivacyBudget> budget = PrivacyBudget::Create(epsilon, 0.0);
  if (!budget.ok()) return budget.status();
  return SqmTrunc(d, thresholds, *budget, TruncationConfig{}, rng);
}

absl::StatusOr<MechanismResult> SqmTrunc(const Dataset& d,
                                         std::span<const double> thresholds,
                                         const PrivacyBudget& budget,
                                         const TruncationConfig& truncation,
                                         RandomSource& rng) {
  if (thresholds.empty()) {
    return absl::InvalidArgumentError("SQM needs at least one query");
  }
  if (absl::Status s = ValidateTruncation(truncation); !s.ok()) return s;
  absl::StatusOr<Split> split = SplitFor(budget, truncation);
  if (!split.ok()) return split.status();

  const double p = static_cast<double>(thresholds.size());
  const double selection_share = split->selection / p;
  const double measurement_share = split->measurement / p;

  MechanismResult result;
  result.mechanism = "sqm";
  result.answers.resize(static_cast<Eigen::Index>(thresholds.size()));
  result.query_thresholds.assign(thresholds.size(),
                                 std::numeric_limits<double>::quiet_NaN());
  result.ledger = MakeLedger(*split);

  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    const double sigma = thresholds[j];
    if (!(sigma >= 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("query threshold ", sigma, " is negative"));
    }
    absl::StatusOr<ThresholdSelection> selected = SelectThreshold(
        d, truncation, selection_share, measurement_share, rng);
    if (!selected.ok()) return selected.status();
    for (std::string& w : selected->warnings) {
      result.warnings.push_back(absl::StrCat("query ", j, ": ", w));
    }
    const double theta = selected->theta;
    double answer;
    if (theta < sigma) {
      result.query_thresholds[j] = theta;
      answer = AddLaplace(PrefixSum(TruncateDataset(d, theta), sigma),
                          theta / measurement_share, rng);
    } else {
      answer =
          AddLaplace(PrefixSum(d, sigma), sigma / measurement_share, rng);
    }
    result.answers[static_cast<Eigen::Index>(j)] = answer;
  }
  return result;
}

absl::StatusOr<BatchAnswer> IdentityMechanism(const Eigen::MatrixXd& workload,
                                              const Eigen::VectorXd& truncated,
                                              const Eigen::VectorXd& counts,
                                              double epsilon2,
                                              RandomSource& rng) {
  if (absl::Status s = CheckBatchInputs(workload, truncated, counts, epsilon2);
      !s.ok()) {
    return s;
  }
  BatchAnswer out;
  out.noise_scale = 1.0 / epsilon2;
  const Eigen::VectorXd noisy =
      counts + out.noise_scale * StandardLaplaceVector(counts.size(), rng);
  out.answers = workload * truncated.cwiseProduct(noisy);
  return out;
}

absl::StatusOr<BatchAnswer> WorkloadMechanism(const Eigen::MatrixXd& workload,
                                              const Eigen::VectorXd& truncated,
                                              const Eigen::VectorXd& counts,
                                              double epsilon2,
                                              RandomSource& rng) {
  if (absl::Status s = CheckBatchInputs(workload, truncated, counts, epsilon2);
      !s.ok()) {
    return s;
  }
  const Eigen::MatrixXd weighted = workload * truncated.asDiagonal();
  BatchAnswer out;
  out.noise_scale = SensitivityL1(weighted) / epsilon2;
  out.answers = weighted * counts +
                out.noise_scale * StandardLaplaceVector(workload.rows(), rng);
  return out;
}

absl::StatusOr<BatchAnswer> Timm(const Eigen::MatrixXd& workload,
                                 const Eigen::VectorXd& truncated,
                                 const Eigen::VectorXd& counts,
                                 double epsilon2, RandomSource& rng,
                                 const StrategyMatrix* strategy) {
  if (absl::Status s = CheckBatchInputs(workload, truncated, counts, epsilon2);
      !s.ok()) {
    return s;
  }
  BatchAnswer out;
  std::optional<GreedyStrategy> built;
  if (strategy == nullptr) {
    absl::StatusOr<GreedyStrategy> greedy = GreedyH(workload);
    if (!greedy.ok()) return greedy.status();
    built = *std::move(greedy);
    out.warnings = built->warnings;
    strategy = &built->strategy;
  }
  if (strategy->cols() != workload.cols()) {
    return absl::InvalidArgumentError("strategy does not match the workload");
  }
  const Eigen::MatrixXd& a = strategy->matrix();
  out.noise_scale = SensitivityL1(a * truncated.asDiagonal()) / epsilon2;
  const Eigen::VectorXd z =
      a * truncated.cwiseProduct(counts) +
      out.noise_scale * StandardLaplaceVector(a.rows(), rng);
  absl::StatusOr<Eigen::VectorXd> estimate = LeastSquares(*strategy, z);
  if (!estimate.ok()) return estimate.status();
  out.answers = workload * *estimate;
  return out;
}

absl::StatusOr<BatchAnswer> Tamm(const Eigen::MatrixXd& workload,
                                 const Eigen::VectorXd& truncated,
                                 const Eigen::VectorXd& counts,
                                 double epsilon2, RandomSource& rng,
                                 const StrategyMatrix* strategy) {
  if (absl::Status s = CheckBatchInputs(workload, truncated, counts, epsilon2);
      !s.ok()) {
    return s;
  }
  const Eigen::MatrixXd weighted = workload * truncated.asDiagonal();
  BatchAnswer out;
  std::optional<GreedyStrategy> built;
  if (strategy == nullptr) {
    absl::StatusOr<GreedyStrategy> greedy = GreedyH(weighted);
    if (!greedy.ok()) return greedy.status();
    built = *std::move(greedy);
    out.warnings = built->warnings;
    strategy = &built->strategy;
  }
  if (strategy->cols() != workload.cols()) {
    return absl::InvalidArgumentError("strategy does not match the workload");
  }
  const Eigen::MatrixXd& a = strategy->matrix();
  out.noise_scale = strategy->sensitivity() / epsilon2;
  const Eigen::VectorXd z =
      a * counts + out.noise_scale * StandardLaplaceVector(a.rows(), rng);
  absl::StatusOr<Eigen::VectorXd> estimate = LeastSquares(*strategy, z);
  if (!estimate.ok()) return estimate.status();
  out.answers = weighted * *estimate;
  return out;
}

absl::StatusOr<std::shared_ptr<const GreedyStrategy>> StrategyCache::GetOrBuild(
    const Eigen::MatrixXd& workload) {
  const std::uint64_t key = HashMatrix(workload);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto [lo, hi] = entries_.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
      if (it->second.workload == workload) return it->second.strategy;
    }
  }
  // Built outside the lock; a concurrent duplicate build is harmless.
  absl::StatusOr<GreedyStrategy> greedy = GreedyH(workload);
  if (!greedy.ok()) return greedy.status();
  auto strategy = std::make_shared<const GreedyStrategy>(*std::move(greedy));
  std::lock_guard<std::mutex> lock(mu_);
  auto [lo, hi] = entries_.equal_range(key);
  for (auto it = lo; it != hi; ++it) {
    if (it->second.workload == workload) return it->second.strategy;
  }
  entries_.emplace(key, Entry{workload, strategy});
  return strategy;
}

std::size_t StrategyCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

absl::StatusOr<std::vector<MechanismResult>> Bqm(const Dataset& d,
                                                 const BucketSpec& buckets,
                                                 const WorkloadMatrix& workload,
                                                 const PrivacyBudget& budget,
                                                 const BqmOptions& options,
                                                 RandomSource& rng) {
  if (absl::Status s = ValidateTruncation(options.truncation); !s.ok()) {
    return s;
  }
  if (workload.matrix.cols() != static_cast<Eigen::Index>(buckets.size())) {
    return absl::InvalidArgumentError(
        "workload columns do not match the bucket count");
  }
  absl::StatusOr<Split> split = SplitFor(budget, options.truncation);
  if (!split.ok()) return split.status();
  absl::StatusOr<VectorForm> form = Vectorize(d, buckets);
  if (!form.ok()) return form.status();

  RandomSource selection_rng = rng.Split();
  const RandomSource noise_rng = rng.Split();

  absl::StatusOr<ThresholdSelection> selected =
      SelectThreshold(d, options.truncation, split->selection,
                      split->measurement, selection_rng);
  if (!selected.ok()) return selected.status();
  const TruncatedWeightMatrix t =
      TruncateWeightMatrix(form->weights, selected->theta);

  std::vector<MechanismResult> results;
  for (BatchMechanism m : options.mechanisms) {
    RandomSource stream = noise_rng;
    MechanismResult r;
    r.mechanism = std::string(BatchMechanismName(m));
    if (options.truncation.mode != TruncationMode::kNone) {
      r.threshold = selected->theta;
    }
    r.ledger = MakeLedger(*split);
    r.warnings = selected->warnings;

    const StrategyMatrix* strategy = nullptr;
    std::shared_ptr<const GreedyStrategy> cached;
    if (options.cache != nullptr &&
        (m == BatchMechanism::kTimm || m == BatchMechanism::kTamm)) {
      absl::StatusOr<std::shared_ptr<const GreedyStrategy>> got =
          m == BatchMechanism::kTimm
              ? options.cache->GetOrBuild(workload.matrix)
              : options.cache->GetOrBuild(workload.matrix *
                                          t.diagonal.asDiagonal());
      if (!got.ok()) return got.status();
      cached = *std::move(got);
      strategy = &cached->strategy;
      r.warnings.insert(r.warnings.end(), cached->warnings.begin(),
                        cached->warnings.end());
    }

    absl::StatusOr<BatchAnswer> answer;
    switch (m) {
      case BatchMechanism::kIdentity:
        answer = IdentityMechanism(workload.matrix, t.diagonal, form->counts,
                                   split->measurement, stream);
        break;
      case BatchMechanism::kWorkload:
        answer = WorkloadMechanism(workload.matrix, t.diagonal, form->counts,
                                   split->measurement, stream);
        break;
      case BatchMechanism::kTimm:
        answer = Timm(workload.matrix, t.diagonal, form->counts,
                      split->measurement, stream, strategy);
        break;
      case BatchMechanism::kTamm:
        answer = Tamm(workload.matrix, t.diagonal, form->counts,
                      split->measurement, stream, strategy);
        break;
    }
    if (!answer.ok()) return answer.status();
    r.answers = std::move(answer->answers);
    r.warnings.insert(r.warnings.end(), answer->warnings.begin(),
                      answer->warnings.end());
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace dpsum
