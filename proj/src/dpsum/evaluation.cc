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


#include "dpsum/evaluation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpsum/isotonic.h"
#include "dpsum/noise.h"
#include "dpsum/random.h"

namespace dpsum {
namespace {

constexpr double kBaseStep = 800.0;
constexpr int kPresetQueries = 1000;
constexpr std::size_t kMaxWarningsKept = 8;

absl::Status FieldError(absl::string_view field, absl::string_view message) {
  return absl::InvalidArgumentError(absl::StrCat(field, ": ", message));
}

bool PositiveFinite(double v) { return v > 0.0 && std::isfinite(v); }

// Everything one trial produces, in the order of cfg.mechanisms.
struct TrialOutput {
  absl::Status status;
  std::vector<Eigen::VectorXd> answers;
  std::vector<std::optional<double>> thresholds;
  std::vector<std::vector<std::string>> warnings;
};

std::optional<BatchMechanism> AsBatch(MechanismKind m) {
  switch (m) {
    case MechanismKind::kIdentity:
      return BatchMechanism::kIdentity;
    case MechanismKind::kWorkload:
      return BatchMechanism::kWorkload;
    case MechanismKind::kTimm:
      return BatchMechanism::kTimm;
    case MechanismKind::kTamm:
      return BatchMechanism::kTamm;
    case MechanismKind::kSqm:
      return std::nullopt;
  }
  return std::nullopt;
}

// Mean of the finite entries of `v`; empty when none are.
std::optional<double> FiniteMean(std::span<const double> v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct Context {
  const ExperimentConfig& cfg;
  const Dataset& data;
  const BucketSpec& buckets;
  const WorkloadMatrix& workload;
  const PrivacyBudget& budget;
  StrategyCache* cache;
};

TrialOutput RunTrial(const Context& ctx, int trial) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::size_t m = cfg.mechanisms.size();
  TrialOutput out;
  out.answers.resize(m);
  out.thresholds.resize(m);
  out.warnings.resize(m);

  RandomSource root(DeriveStreamSeed(cfg.seed, static_cast<std::uint64_t>(trial)));
  RandomSource batch_rng = root.Split();
  RandomSource sqm_rng = root.Split();

  BqmOptions options;
  options.truncation = cfg.truncation;
  options.cache = ctx.cache;
  options.mechanisms.clear();
  for (MechanismKind k : cfg.mechanisms) {
    if (auto b = AsBatch(k)) options.mechanisms.push_back(*b);
  }

  std::vector<MechanismResult> batch;
  if (!options.mechanisms.empty()) {
    auto r = Bqm(ctx.data, ctx.buckets, ctx.workload, ctx.budget, options,
                 batch_rng);
    if (!r.ok()) {
      out.status = r.status();
      return out;
    }
    batch = *std::move(r);
  }

  std::size_t next_batch = 0;
  for (std::size_t i = 0; i < m; ++i) {
    MechanismResult res;
    if (cfg.mechanisms[i] == MechanismKind::kSqm) {
      auto r = SqmTrunc(ctx.data, ctx.workload.thresholds, ctx.budget,
                        cfg.truncation, sqm_rng);
      if (!r.ok()) {
        out.status = r.status();
        return out;
      }
      res = *std::move(r);
      out.thresholds[i] = FiniteMean(res.query_thresholds);
    } else {
      res = std::move(batch[next_batch++]);
      out.thresholds[i] = res.threshold;
    }
    if (cfg.isotonic) {
      const std::vector<double> fitted = IsotonicL2(
          std::span<const double>(res.answers.data(), res.answers.size()));
      res.answers = Eigen::Map<const Eigen::VectorXd>(
          fitted.data(), static_cast<Eigen::Index>(fitted.size()));
    }
    out.answers[i] = std::move(res.answers);
    out.warnings[i] = std::move(res.warnings);
  }
  return out;
}

// Mean over ascending values, so the result does not depend on trial order.
double SortedMean(const std::vector<double>& sorted) {
  double sum = 0.0;
  for (double v : sorted) sum += v;
  return sum / static_cast<double>(sorted.size());
}

}  // namespace

std::string_view WorkloadPresetName(WorkloadPreset w) {
  switch (w) {
    case WorkloadPreset::kQ1:
      return "Q1";
    case WorkloadPreset::kQ2:
      return "Q2";
    case WorkloadPreset::kQ3:
      return "Q3";
    case WorkloadPreset::kCustom:
      return "custom";
  }
  return "unknown";
}

std::string_view MechanismKindName(MechanismKind m) {
  switch (m) {
    case MechanismKind::kSqm:
      return "sqm";
    case MechanismKind::kIdentity:
      return "identity";
    case MechanismKind::kWorkload:
      return "workload";
    case MechanismKind::kTimm:
      return "timm";
    case MechanismKind::kTamm:
      return "tamm";
  }
  return "unknown";
}

std::optional<WorkloadPreset> ParseWorkloadPreset(std::string_view name) {
  for (WorkloadPreset w : {WorkloadPreset::kQ1, WorkloadPreset::kQ2,
                           WorkloadPreset::kQ3, WorkloadPreset::kCustom}) {
    if (name == WorkloadPresetName(w)) return w;
  }
  if (name == "q1") return WorkloadPreset::kQ1;
  if (name == "q2") return WorkloadPreset::kQ2;
  if (name == "q3") return WorkloadPreset::kQ3;
  return std::nullopt;
}

std::optional<MechanismKind> ParseMechanismKind(std::string_view name) {
  for (MechanismKind m :
       {MechanismKind::kSqm, MechanismKind::kIdentity, MechanismKind::kWorkload,
        MechanismKind::kTimm, MechanismKind::kTamm}) {
    if (name == MechanismKindName(m)) return m;
  }
  return std::nullopt;
}

std::vector<double> PresetThresholds(WorkloadPreset w) {
  int stride = 0;
  switch (w) {
    case WorkloadPreset::kQ1:
      stride = 1;
      break;
    case WorkloadPreset::kQ2:
      stride = 10;
      break;
    case WorkloadPreset::kQ3:
      stride = 100;
      break;
    case WorkloadPreset::kCustom:
      return {};
  }
  std::vector<double> out;
  for (int i = stride; i <= kPresetQueries; i += stride) {
    out.push_back(kBaseStep * i);
  }
  return out;
}

absl::StatusOr<Dataset> GenerateSynthetic(std::size_t n,
                                          const SyntheticParams& p,
                                          std::uint64_t seed) {
  if (n == 0) return FieldError("n", "must be positive");
  if (!PositiveFinite(p.body_median)) {
    return FieldError("body_median", "must be positive");
  }
  if (!PositiveFinite(p.body_sigma)) {
    return FieldError("body_sigma", "must be positive");
  }
  if (!(p.tail_fraction >= 0.0 && p.tail_fraction <= 1.0)) {
    return FieldError("tail_fraction", "must lie in [0, 1]");
  }
  if (!PositiveFinite(p.tail_scale)) {
    return FieldError("tail_scale", "must be positive");
  }
  if (!PositiveFinite(p.tail_alpha)) {
    return FieldError("tail_alpha", "must be positive");
  }
  if (!PositiveFinite(p.domain_top)) {
    return FieldError("domain_top", "must be positive");
  }
  RandomSource rng(MixSeed(seed));
  const double log_median = std::log(p.body_median);
  std::vector<double> values(n);
  for (double& v : values) {
    double x;
    if (rng.UniformOpen() < p.tail_fraction) {
      x = p.tail_scale * std::pow(rng.UniformOpen(), -1.0 / p.tail_alpha);
    } else {
      // Box-Muller, one normal per pair of uniforms.
      const double u1 = rng.UniformOpen();
      const double u2 = rng.UniformOpen();
      const double z = std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(2.0 * std::numbers::pi * u2);
      x = std::exp(log_median + p.body_sigma * z);
    }
    v = std::min(std::round(x), std::floor(p.domain_top));
  }
  return Dataset::Create(std::move(values));
}

absl::StatusOr<BucketSpec> ResolveBuckets(const ExperimentConfig& cfg) {
  if (!PositiveFinite(cfg.bucket_width)) {
    return FieldError("bucket_width", "must be positive");
  }
  if (!PositiveFinite(cfg.domain_top)) {
    return FieldError("domain_top", "must be positive");
  }
  const double ratio = cfg.domain_top / cfg.bucket_width;
  const double count = std::round(ratio);
  if (count < 1.0 || std::abs(ratio - count) > 1e-9 * count) {
    return FieldError("domain_top",
                      absl::StrCat("must be a whole multiple of bucket_width (",
                                   cfg.domain_top, " / ", cfg.bucket_width,
                                   ")"));
  }
  if (count > 1e6) return FieldError("bucket_width", "too many buckets");
  return BucketSpec::Uniform(cfg.bucket_width, static_cast<std::size_t>(count));
}

std::vector<double> ResolveThresholds(const ExperimentConfig& cfg) {
  if (cfg.workload == WorkloadPreset::kCustom) return cfg.custom_thresholds;
  return PresetThresholds(cfg.workload);
}

absl::Status ValidateConfig(const ExperimentConfig& cfg) {
  if (!PositiveFinite(cfg.epsilon)) {
    return FieldError("epsilon", "must be positive");
  }
  if (!(cfg.rho >= 0.0 && cfg.rho < 1.0)) {
    return FieldError("rho", "must lie in [0, 1)");
  }
  if (cfg.truncation.selects() && cfg.rho == 0.0) {
    return FieldError("rho", absl::StrCat("must be positive with trunc ",
                                          std::string(TruncationModeName(cfg.truncation.mode))));
  }
  if (absl::Status s = ValidateTruncation(cfg.truncation); !s.ok()) {
    return FieldError("trunc", s.message());
  }
  if (cfg.trials < 1) return FieldError("trials", "must be at least 1");
  if (!PositiveFinite(cfg.delta)) return FieldError("delta", "must be positive");
  if (cfg.threads < 0) return FieldError("threads", "must be non-negative");
  if (cfg.mechanisms.empty()) {
    return FieldError("mechanisms", "at least one mechanism is required");
  }
  std::set<MechanismKind> seen;
  for (MechanismKind m : cfg.mechanisms) {
    if (!seen.insert(m).second) {
      return FieldError("mechanisms",
                        absl::StrCat("duplicate entry ", std::string(MechanismKindName(m))));
    }
  }
  const std::vector<double> thresholds = ResolveThresholds(cfg);
  if (thresholds.empty()) {
    return FieldError("thresholds", "custom workload needs thresholds");
  }
  auto buckets = ResolveBuckets(cfg);
  if (!buckets.ok()) return buckets.status();
  auto w = BuildPrefixWorkload(thresholds, *buckets);
  if (!w.ok()) {
    return absl::Status(w.status().code(),
                        absl::StrCat("workload: ", w.status().message()));
  }
  return absl::OkStatus();
}

double RelativeError(double estimate, double truth, double delta) {
  return std::abs(estimate - truth) / std::max(truth, delta);
}

double NearestRankPercentile(std::span<const double> sorted, int percent) {
  const std::size_t n = sorted.size();
  // rank = ceil(percent * n / 100), at least 1.
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

absl::StatusOr<ExperimentReport> RunExperiment(const ExperimentConfig& cfg,
                                               const Dataset& d) {
  if (absl::Status s = ValidateConfig(cfg); !s.ok()) return s;
  auto buckets = ResolveBuckets(cfg);
  if (!buckets.ok()) return buckets.status();
  const std::vector<double> thresholds = ResolveThresholds(cfg);
  auto workload = BuildPrefixWorkload(thresholds, *buckets);
  if (!workload.ok()) return workload.status();
  auto form = Vectorize(d, *buckets);
  if (!form.ok()) return form.status();
  // rho only matters when a threshold is selected.
  auto budget = PrivacyBudget::Create(
      cfg.epsilon, cfg.truncation.selects() ? cfg.rho : 0.0);
  if (!budget.ok()) return budget.status();

  const std::size_t p = thresholds.size();
  const std::size_t m = cfg.mechanisms.size();

  // Untruncated truth per mechanism family.
  const Eigen::VectorXd batch_truth =
      workload->matrix * form->weights.diagonal.cwiseProduct(form->counts);
  Eigen::VectorXd sqm_truth(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    sqm_truth[static_cast<Eigen::Index>(j)] = PrefixSum(d, thresholds[j]);
  }

  StrategyCache cache;
  const Context ctx{cfg, d, *buckets, *workload, *budget, &cache};
  std::vector<TrialOutput> outputs(static_cast<std::size_t>(cfg.trials));

  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1,
                                 static_cast<unsigned>(cfg.trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < cfg.trials; t = next++) {
      outputs[static_cast<std::size_t>(t)] = RunTrial(ctx, t);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  ExperimentReport report;
  report.thresholds = thresholds;
  int ok_trials = 0;
  absl::Status first_failure;
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    if (outputs[t].status.ok()) {
      ++ok_trials;
    } else {
      if (first_failure.ok()) first_failure = outputs[t].status;
      report.failures.push_back(
          absl::StrCat("trial ", t, ": ", outputs[t].status.ToString()));
    }
  }
  if (ok_trials == 0) return first_failure;

  for (std::size_t i = 0; i < m; ++i) {
    const bool is_sqm = cfg.mechanisms[i] == MechanismKind::kSqm;
    const Eigen::VectorXd& truth = is_sqm ? sqm_truth : batch_truth;
    AggregateStats agg;
    agg.mechanism = std::string(MechanismKindName(cfg.mechanisms[i]));
    agg.trials_ok = ok_trials;
    agg.trials_failed = cfg.trials - ok_trials;

    std::vector<double> used_thresholds;
    for (const TrialOutput& o : outputs) {
      if (!o.status.ok()) continue;
      if (o.thresholds[i]) used_thresholds.push_back(*o.thresholds[i]);
      for (const std::string& w : o.warnings[i]) {
        ++agg.warning_count;
        if (agg.warnings.size() < kMaxWarningsKept &&
            std::find(agg.warnings.begin(), agg.warnings.end(), w) ==
                agg.warnings.end()) {
          agg.warnings.push_back(w);
        }
      }
    }
    if (!used_thresholds.empty()) {
      std::sort(used_thresholds.begin(), used_thresholds.end());
      agg.mean_threshold = SortedMean(used_thresholds);
    }

    std::vector<double> answers, errors;
    answers.reserve(static_cast<std::size_t>(ok_trials));
    errors.reserve(static_cast<std::size_t>(ok_trials));
    for (std::size_t j = 0; j < p; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      answers.clear();
      errors.clear();
      for (const TrialOutput& o : outputs) {
        if (!o.status.ok()) continue;
        const double a = o.answers[i][jj];
        answers.push_back(a);
        errors.push_back(RelativeError(a, truth[jj], cfg.delta));
      }
      std::sort(answers.begin(), answers.end());
      std::sort(errors.begin(), errors.end());
      QueryStats q;
      q.threshold = thresholds[j];
      q.true_answer = truth[jj];
      q.mean_answer = SortedMean(answers);
      q.p5_answer = NearestRankPercentile(answers, 5);
      q.p95_answer = NearestRankPercentile(answers, 95);
      q.mean_rel_err = SortedMean(errors);
      q.p5_rel_err = NearestRankPercentile(errors, 5);
      q.p95_rel_err = NearestRankPercentile(errors, 95);
      agg.queries.push_back(q);
    }
    report.mechanisms.push_back(std::move(agg));
  }
  return report;
}

}  // namespace dpsum
