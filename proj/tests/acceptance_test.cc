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


// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "dpsum/data_model.h"
#include "dpsum/evaluation.h"
#include "dpsum/isotonic.h"
#include "dpsum/mechanisms.h"
#include "dpsum/noise.h"
#include "dpsum/strategy.h"
#include "dpsum/threshold_selection.h"

namespace dpsum {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Dataset Make(std::vector<double> v) { return *Dataset::Create(std::move(v)); }

Eigen::MatrixXd Prefix(Eigen::Index n) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) w.row(j).head(j + 1).setOnes();
  return w;
}

using BatchFn = std::function<absl::StatusOr<BatchAnswer>(
    const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
    double, RandomSource&)>;

std::vector<std::pair<std::string, BatchFn>> BatchMechanisms() {
  return {
      {"identity", IdentityMechanism},
      {"workload", WorkloadMechanism},
      {"timm", [](const auto& w, const auto& t, const auto& x, double e,
                  RandomSource& r) { return Timm(w, t, x, e, r); }},
      {"tamm", [](const auto& w, const auto& t, const auto& x, double e,
                  RandomSource& r) { return Tamm(w, t, x, e, r); }},
  };
}

// Every multiset of size <= max_size over {0..top}.
void Multisets(int top, int max_size, std::vector<double>& cur, int from,
               const std::function<void(const std::vector<double>&)>& f) {
  f(cur);
  if (static_cast<int>(cur.size()) == max_size) return;
  for (int v = from; v <= top; ++v) {
    cur.push_back(v);
    Multisets(top, max_size, cur, v, f);
    cur.pop_back();
  }
}

Outcome SensitivityExactness() {
  constexpr int kTop = 12;
  // worst[i][theta] over all neighbouring pairs.
  std::vector<std::vector<double>> worst(kTop + 1,
                                         std::vector<double>(kTop + 1, 0.0));
  std::vector<double> cur;
  long pairs = 0;
  Multisets(kTop, 3, cur, 0, [&](const std::vector<double>& base) {
    const Dataset d = Make(base);
    for (int v = 0; v <= kTop; ++v) {
      std::vector<double> bigger = base;
      bigger.push_back(v);
      const Dataset d2 = Make(bigger);
      ++pairs;
      for (int i = 0; i <= kTop; ++i) {
        for (int th = 0; th <= kTop; ++th) {
          worst[i][th] = std::max(
              worst[i][th], std::abs(TruncQuery(d2, i, th) - TruncQuery(d, i, th)));
        }
      }
    }
  });
  int bad = 0;
  for (int i = 0; i <= kTop; ++i) {
    for (int th = 0; th <= kTop; ++th) {
      if (worst[i][th] != std::min(i, th)) ++bad;
    }
  }
  return {bad == 0, absl::StrCat(pairs, " neighbour pairs, ", bad,
                                 " of 169 (i, theta) mismatches")};
}

Outcome SecondPartMinIdentity() {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> size(0, 200);
  std::uniform_real_distribution<double> value(0.0, 1e5);
  int bad = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<double> v(static_cast<std::size_t>(size(gen)));
    for (double& x : v) x = std::round(value(gen) * (rep % 2 ? 1.0 : 1e-3));
    const Dataset d = Make(v);
    const double cap = value(gen) * (rep % 3 ? 1.0 : 1e-3);
    double direct = 0.0;
    for (double t : v) direct += std::min(t, cap);
    const double got = SecondPartMin(d, cap);
    if (std::abs(got - direct) > 1e-9 * std::max(1.0, std::abs(direct))) ++bad;
  }
  return {bad == 0, absl::StrCat(bad, " of 1000 datasets off")};
}

Outcome ClosedFormError() {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> frac(0.2, 1.0);
  std::uniform_int_distribution<int> count(0, 10);
  std::string detail;
  bool pass = true;
  for (Eigen::Index n : {4, 8, 16}) {
    const Eigen::MatrixXd w = Prefix(n);
    Eigen::VectorXd d(n), t(n), x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d[i] = 10.0 * static_cast<double>(i + 1);
      t[i] = d[i] * frac(gen);
      x[i] = count(gen);
    }
    const Eigen::VectorXd truth = w * d.cwiseProduct(x);
    const StrategyMatrix a_timm = GreedyH(w)->strategy;
    const StrategyMatrix a_tamm = GreedyH(w * t.asDiagonal())->strategy;
    const double want_timm = *ExpectedErrorTimm(w, d, t, x, a_timm, 1.0);
    const double want_tamm = *ExpectedErrorTamm(w, d, t, x, a_tamm, 1.0);
    RandomSource rng(static_cast<std::uint64_t>(n));
    double timm = 0.0, tamm = 0.0;
    constexpr int kTrials = 20000;
    for (int k = 0; k < kTrials; ++k) {
      timm += (Timm(w, t, x, 1.0, rng, &a_timm)->answers - truth).squaredNorm();
      tamm += (Tamm(w, t, x, 1.0, rng, &a_tamm)->answers - truth).squaredNorm();
    }
    const double dev_timm = std::abs(timm / kTrials / want_timm - 1.0);
    const double dev_tamm = std::abs(tamm / kTrials / want_tamm - 1.0);
    pass = pass && dev_timm <= 0.05 && dev_tamm <= 0.05;
    absl::StrAppend(&detail, detail.empty() ? "" : "; ", "n=", n,
                    " timm dev ", absl::SixDigits(100 * dev_timm), "% tamm dev ",
                    absl::SixDigits(100 * dev_tamm), "%");
  }
  return {pass, detail};
}

Outcome NoiselessLimit() {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 10);
  const Eigen::Index n = 100;
  const Eigen::MatrixXd w = Prefix(n);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    Eigen::VectorXd t(n), x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      t[i] = 1.0 - frac(gen);  // (0, 1]
      x[i] = count(gen);
    }
    const Eigen::VectorXd truth = w * t.cwiseProduct(x);
    for (const auto& [name, fn] : BatchMechanisms()) {
      RandomSource rng(static_cast<std::uint64_t>(inst));
      auto r = fn(w, t, x, 1e6, rng);
      if (!r.ok()) return {false, absl::StrCat(name, ": ", r.status().message())};
      worst = std::max(worst, (r->answers - truth).lpNorm<Eigen::Infinity>());
    }
  }
  return {worst <= 1e-3, absl::StrCat("max abs deviation ", worst)};
}

Outcome SvtCorrectness() {
  std::mt19937_64 gen(5);
  RandomSource rng(5);
  int bad = 0;
  // Raw sparse vector over counting queries.
  for (int rep = 0; rep < 1000; ++rep) {
    std::uniform_int_distribution<int> size(1, 100), value(0, 1000);
    std::vector<double> v(static_cast<std::size_t>(size(gen)));
    for (double& x : v) x = value(gen);
    const Dataset d = Make(v);
    std::vector<double> bounds;
    for (int k = 0; k < 12; ++k) bounds.push_back(value(gen));
    std::sort(bounds.begin(), bounds.end());
    const double t = std::uniform_int_distribution<int>(0, 100)(gen) + 0.5;
    std::optional<std::size_t> oracle;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
      if (static_cast<double>(CountingQuery(d, bounds[k])) > t) {
        oracle = k;
        break;
      }
    }
    auto got = SparseVectorOverValues(
        [&](std::size_t k) { return static_cast<double>(CountingQuery(d, bounds[k])); },
        bounds.size(), t, 1e6, rng);
    if (!got.ok() || *got != oracle) ++bad;
  }
  // Threshold selection against a noiseless geometric scan.
  for (int rep = 0; rep < 1000; ++rep) {
    std::uniform_int_distribution<int> size(1, 500);
    std::lognormal_distribution<double> law(std::log(1e4), 1.0);
    std::vector<double> v(static_cast<std::size_t>(size(gen)));
    for (double& x : v) x = std::round(law(gen));
    const Dataset d = Make(v);
    const SvtThresholdParams p{
        .keep_ratio = std::uniform_real_distribution<double>(0.5, 0.999)(gen),
        .growth = 1.2,
        .start = 1000};
    const double need = std::ceil(p.keep_ratio * static_cast<double>(d.size()) - 1e-9);
    double oracle = p.start;
    for (std::size_t k = 0; k < kMaxSvtCandidates; ++k) {
      oracle = p.start * std::pow(p.growth, static_cast<double>(k));
      if (static_cast<double>(CountingQuery(d, oracle)) >= need) break;
    }
    auto got = SelectThresholdSvt(d, p, 1e6, rng);
    if (!got.ok() || std::abs(got->theta - oracle) > 1e-9 * oracle) ++bad;
  }
  return {bad == 0, absl::StrCat(bad, " of 2000 instances disagree")};
}

Outcome IsotonicOracle() {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> val(-100.0, 100.0);
  int bad = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const std::size_t p = 1 + rep % 6;
    std::vector<double> y(p);
    for (double& v : y) v = val(gen);
    // Exhaustive block partitions with per-block means.
    std::vector<double> best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << (p - 1)); ++mask) {
      std::vector<double> fit(p);
      std::size_t start = 0;
      for (std::size_t i = 0; i < p; ++i) {
        if (i != p - 1 && !((mask >> i) & 1u)) continue;
        const double mean =
            std::accumulate(y.begin() + start, y.begin() + i + 1, 0.0) /
            static_cast<double>(i + 1 - start);
        std::fill(fit.begin() + start, fit.begin() + i + 1, mean);
        start = i + 1;
      }
      if (!std::is_sorted(fit.begin(), fit.end())) continue;
      double sse = 0.0;
      for (std::size_t i = 0; i < p; ++i) sse += (fit[i] - y[i]) * (fit[i] - y[i]);
      if (sse < best_sse) {
        best_sse = sse;
        best = fit;
      }
    }
    const std::vector<double> got = IsotonicL2(y);
    for (std::size_t i = 0; i < p; ++i) {
      if (std::abs(got[i] - best[i]) > 1e-9) {
        ++bad;
        break;
      }
    }
  }
  int bad_props = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t p = 1 + static_cast<std::size_t>(rep);
    std::vector<double> y(p);
    double level = 0.0, abs_sum = 0.0;
    for (double& v : y) {
      level += std::abs(val(gen)) * 0.05;
      v = level + val(gen);
      abs_sum += std::abs(v);
    }
    const std::vector<double> fit = IsotonicL2(y);
    const double s_in = std::accumulate(y.begin(), y.end(), 0.0);
    const double s_out = std::accumulate(fit.begin(), fit.end(), 0.0);
    if (IsotonicL2(fit) != fit) ++bad_props;
    if (std::abs(s_in - s_out) > 1e-9 * std::max(1.0, abs_sum)) ++bad_props;
  }
  return {bad == 0 && bad_props == 0,
          absl::StrCat(bad, " of 10000 oracle mismatches, ", bad_props,
                       " property violations on p <= 1000")};
}

Outcome LedgerExactness() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long checks = 0, bad = 0;
  for (int k = 0; k < 100000; ++k) {
    const double eps = std::exp(std::log(1e-4) + u(gen) * std::log(1e8));
    const double rho = u(gen) * 0.999;
    auto b = PrivacyBudget::Create(eps, rho);
    ++checks;
    if (!b.ok() || b->epsilon1() + b->epsilon2() != eps) ++bad;
  }
  const Dataset data = Make({100, 700, 900, 1500, 1550, 2300, 3100, 3150, 3199});
  const BucketSpec buckets = *BucketSpec::Uniform(800, 4);
  const std::vector<double> thresholds{800, 1600, 2400, 3200};
  const WorkloadMatrix workload = *BuildPrefixWorkload(thresholds, buckets);
  for (double eps : {0.01, 0.1, 0.3, 1.0, 7.0}) {
    for (double rho : {0.0, 0.1, 0.25, 0.5}) {
      for (TruncationMode mode : {TruncationMode::kNone, TruncationMode::kSvt,
                                  TruncationMode::kRecursive,
                                  TruncationMode::kFixed}) {
        TruncationConfig t{.mode = mode, .fixed_theta = 1000};
        t.svt.start = 500;
        if (t.selects() && rho == 0.0) continue;
        const PrivacyBudget budget = *PrivacyBudget::Create(eps, rho);
        ++checks;
        if (budget.epsilon1() + budget.epsilon2() != eps) ++bad;
        RandomSource rng(static_cast<std::uint64_t>(checks));
        auto sqm = SqmTrunc(data, thresholds, budget, t, rng);
        ++checks;
        if (!sqm.ok() || LedgerTotal(sqm->ledger) != eps) ++bad;
        BqmOptions options;
        options.truncation = t;
        auto batch = Bqm(data, buckets, workload, budget, options, rng);
        if (!batch.ok()) {
          ++bad;
          continue;
        }
        for (const MechanismResult& m : *batch) {
          ++checks;
          if (LedgerTotal(m.ledger) != eps) ++bad;
        }
      }
    }
  }
  return {bad == 0, absl::StrCat(checks, " exact checks, ", bad, " failures")};
}

ExperimentConfig HarnessConfig(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.epsilon = 0.01;
  cfg.rho = 0.1;
  cfg.trials = 100;
  cfg.seed = seed;
  return cfg;
}

Outcome TruncationBenefit() {
  int wins = 0;
  std::string detail;
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = *GenerateSynthetic(40000, {}, 100 + rep);
    ExperimentConfig cfg = HarnessConfig(rep);
    cfg.workload = WorkloadPreset::kQ3;
    cfg.mechanisms = {MechanismKind::kIdentity};
    cfg.truncation.mode = TruncationMode::kSvt;
    auto svt = RunExperiment(cfg, d);
    cfg.truncation.mode = TruncationMode::kNone;
    auto none = RunExperiment(cfg, d);
    if (!svt.ok() || !none.ok()) return {false, "experiment failed"};
    const auto& qs = svt->mechanisms[0].queries;
    const auto& qn = none->mechanisms[0].queries;
    int below = 0;
    for (std::size_t j = qs.size() - 5; j < qs.size(); ++j) {
      if (qs[j].p95_rel_err < qn[j].p95_rel_err) ++below;
    }
    if (below == 5) ++wins;
    absl::StrAppend(&detail, below);
  }
  return {wins >= 9, absl::StrCat(wins, " of 10 repetitions (top-5 wins per rep: ",
                                  detail, ")")};
}

Outcome TammBeatsIdentity() {
  int wins = 0;
  std::string detail;
  for (int rep = 0; rep < 10; ++rep) {
    const Dataset d = *GenerateSynthetic(40000, {}, 200 + rep);
    ExperimentConfig cfg = HarnessConfig(rep);
    cfg.workload = WorkloadPreset::kQ2;
    cfg.bucket_width = 8000;
    cfg.mechanisms = {MechanismKind::kIdentity, MechanismKind::kTamm};
    auto r = RunExperiment(cfg, d);
    if (!r.ok()) return {false, "experiment failed"};
    const auto& id = r->mechanisms[0].queries;
    const auto& tamm = r->mechanisms[1].queries;
    std::size_t le = 0;
    for (std::size_t j = 0; j < id.size(); ++j) {
      if (tamm[j].mean_rel_err <= id[j].mean_rel_err) ++le;
    }
    const double share = static_cast<double>(le) / static_cast<double>(id.size());
    if (share >= 0.6) ++wins;
    absl::StrAppend(&detail, detail.empty() ? "" : " ", le);
  }
  return {wins >= 8, absl::StrCat(wins, " of 10 repetitions (queries of 100 won: ",
                                  detail, ")")};
}

Outcome Unbiasedness() {
  const Eigen::Index n = 16;
  const Eigen::MatrixXd w = Prefix(n);
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> frac(0.2, 1.0);
  std::uniform_int_distribution<int> count(0, 20);
  Eigen::VectorXd t(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = 100.0 * static_cast<double>(i + 1) * frac(gen);
    x[i] = count(gen);
  }
  const Eigen::VectorXd truth = w * t.cwiseProduct(x);
  constexpr int kTrials = 10000;
  std::string detail;
  bool pass = true;
  for (const auto& [name, fn] : BatchMechanisms()) {
    RandomSource rng(10);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n), sum_sq = sum;
    for (int k = 0; k < kTrials; ++k) {
      const Eigen::VectorXd a = fn(w, t, x, 1.0, rng)->answers;
      sum += a;
      sum_sq += a.cwiseProduct(a);
    }
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double mean = sum[j] / kTrials;
      const double var = sum_sq[j] / kTrials - mean * mean;
      worst = std::max(worst, std::abs(mean - truth[j]) / std::sqrt(var / kTrials));
    }
    pass = pass && worst <= 4.0;
    absl::StrAppend(&detail, detail.empty() ? "" : ", ", name, " max ",
                    absl::SixDigits(worst), " SE");
  }
  return {pass, detail};
}

}  // namespace
}  // namespace dpsum

int main() {
  struct Criterion {
    const char* name;
    dpsum::Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"sensitivity exactness", dpsum::SensitivityExactness},
      {"clipped-sum identity", dpsum::SecondPartMinIdentity},
      {"closed-form error oracles", dpsum::ClosedFormError},
      {"noiseless-limit equivalence", dpsum::NoiselessLimit},
      {"sparse vector correctness", dpsum::SvtCorrectness},
      {"isotonic oracle", dpsum::IsotonicOracle},
      {"budget ledger", dpsum::LedgerExactness},
      {"truncation lowers p95 error", dpsum::TruncationBenefit},
      {"tamm beats identity", dpsum::TammBeatsIdentity},
      {"unbiased for truncated truth", dpsum::Unbiasedness},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    const dpsum::Outcome o = c.run();
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    if (!o.pass) ++failed;
    std::printf("[%s] criterion %d: %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL",
                index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
