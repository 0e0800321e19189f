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

#include "dpsum/noise.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpsum {
namespace {

double StandardLaplace(RandomSource& rng) {
  const double u = rng.UniformOpen() - 0.5;
  const double magnitude = -std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

}  // namespace

PrivacyBudget::PrivacyBudget(double epsilon, double rho)
    : epsilon_(epsilon), rho_(rho) {
  // Recomputing epsilon1 from the rounded epsilon2 makes the subtraction
  // exact (Sterbenz) in whichever direction is needed, so the shares add
  // back to epsilon with no rounding error.
  epsilon2_ = epsilon - rho * epsilon;
  epsilon1_ = epsilon - epsilon2_;
}

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double epsilon,
                                                    double rho) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("epsilon must be positive and finite, got ", epsilon));
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("rho must lie in [0, 1), got ", rho));
  }
  return PrivacyBudget(epsilon, rho);
}

double LedgerTotal(const BudgetLedger& ledger) {
  double total = 0.0;
  for (const BudgetEntry& e : ledger) total += e.epsilon;
  return total;
}

absl::StatusOr<double> LaplaceSample(double scale, RandomSource& rng) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    return absl::InvalidArgumentError(
        absl::StrCat("Laplace scale must be positive, got ", scale));
  }
  return scale * StandardLaplace(rng);
}

Eigen::VectorXd StandardLaplaceVector(Eigen::Index size, RandomSource& rng) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out[i] = StandardLaplace(rng);
  return out;
}

double SensitivityL1(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

std::size_t CountingQuery(const Dataset& d, double bound) {
  return d.CountAtMost(bound);
}

absl::StatusOr<std::optional<std::size_t>> SparseVectorOverValues(
    const std::function<double(std::size_t)>& value, std::size_t num_queries,
    double threshold, double epsilon, RandomSource& rng) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sparse vector epsilon must be positive, got ", epsilon));
  }
  const double noisy_threshold = threshold + (2.0 / epsilon) * StandardLaplace(rng);
  const double query_scale = 4.0 / epsilon;
  for (std::size_t k = 0; k < num_queries; ++k) {
    if (value(k) + query_scale * StandardLaplace(rng) > noisy_threshold) {
      return std::optional<std::size_t>(k);
    }
  }
  return std::optional<std::size_t>();
}

absl::StatusOr<std::optional<std::size_t>> SparseVector(
    const Dataset& d, std::span<const SensitivityOneQuery> queries,
    double threshold, double epsilon, RandomSource& rng) {
  return SparseVectorOverValues(
      [&](std::size_t k) { return queries[k](d); }, queries.size(), threshold,
      epsilon, rng);
}

}  // namespace dpsum
