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

// Trial-based evaluation harness: synthetic data, repeated private runs and
// per-query error statistics.

#ifndef DPSUM_EVALUATION_H_
#define DPSUM_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsum/data_model.h"
#include "dpsum/mechanisms.h"

namespace dpsum {

// Prefix workloads over thresholds 800 * i: every threshold up to 8e5 (Q1,
// 1000 queries), every tenth (Q2, 100) or every hundredth (Q3, 10).
enum class WorkloadPreset { kQ1, kQ2, kQ3, kCustom };

enum class MechanismKind { kSqm, kIdentity, kWorkload, kTimm, kTamm };

std::string_view WorkloadPresetName(WorkloadPreset w);
std::string_view MechanismKindName(MechanismKind m);
std::optional<WorkloadPreset> ParseWorkloadPreset(std::string_view name);
std::optional<MechanismKind> ParseMechanismKind(std::string_view name);

std::vector<double> PresetThresholds(WorkloadPreset w);

// Income-like law: a log-normal body plus, with probability tail_fraction, a
// Pareto tail starting at tail_scale. Values are rounded to whole units and
// clipped to domain_top. The defaults put about 99.8% of records below 5e4.
struct SyntheticParams {
  double body_median = 1.5e4;
  double body_sigma = 0.35;
  double tail_fraction = 1e-3;
  double tail_scale = 5e4;
  double tail_alpha = 1.5;
  double domain_top = 8e5;
};

absl::StatusOr<Dataset> GenerateSynthetic(std::size_t n,
                                          const SyntheticParams& params,
                                          std::uint64_t seed);

struct ExperimentConfig {
  WorkloadPreset workload = WorkloadPreset::kQ1;
  std::vector<double> custom_thresholds;
  double bucket_width = 800.0;
  double domain_top = 8e5;
  double epsilon = 0.01;
  double rho = 0.1;
  std::vector<MechanismKind> mechanisms = {
      MechanismKind::kSqm, MechanismKind::kIdentity, MechanismKind::kWorkload,
      MechanismKind::kTimm, MechanismKind::kTamm};
  TruncationConfig truncation{TruncationMode::kSvt, {}, {}, 0.0};
  int trials = 100;
  double delta = 100.0;
  std::uint64_t seed = 0;
  bool isotonic = true;
  // Worker threads for trials; 0 picks the hardware concurrency.
  int threads = 0;
};

// Field-level validation, including workload/bucket alignment.
absl::Status ValidateConfig(const ExperimentConfig& cfg);

absl::StatusOr<BucketSpec> ResolveBuckets(const ExperimentConfig& cfg);
std::vector<double> ResolveThresholds(const ExperimentConfig& cfg);

// |estimate - truth| / max(truth, delta).
double RelativeError(double estimate, double truth, double delta);

// Nearest-rank percentile of ascending `sorted` (non-empty), percent in
// [0, 100].
double NearestRankPercentile(std::span<const double> sorted, int percent);

struct QueryStats {
  double threshold = 0.0;
  double true_answer = 0.0;
  double mean_answer = 0.0;
  double p5_answer = 0.0;
  double p95_answer = 0.0;
  double mean_rel_err = 0.0;
  double p5_rel_err = 0.0;
  double p95_rel_err = 0.0;
};

struct AggregateStats {
  std::string mechanism;
  std::vector<QueryStats> queries;
  int trials_ok = 0;
  int trials_failed = 0;
  // Mean of the truncation threshold over trials that used one.
  std::optional<double> mean_threshold;
  // Distinct warnings (first few) and how many were raised in total.
  std::vector<std::string> warnings;
  std::size_t warning_count = 0;
};

struct ExperimentReport {
  std::vector<double> thresholds;
  std::vector<AggregateStats> mechanisms;
  std::vector<std::string> failures;
};

// Runs cfg.trials independent trials, each on its own stream derived from
// cfg.seed and the trial index. Batch mechanisms share one threshold per
// trial; SQM draws its own. Errors are measured against the untruncated
// truth: W D x for batch mechanisms, exact prefix sums for SQM. The report is
// a deterministic function of (cfg, d) regardless of thread count.
absl::StatusOr<ExperimentReport> RunExperiment(const ExperimentConfig& cfg,
                                               const Dataset& d);

}  // namespace dpsum

#endif  // DPSUM_EVALUATION_H_
