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

// Noise primitives and budget accounting. Neighbouring datasets differ by the
// addition or removal of one record.

#ifndef DPSUM_NOISE_H_
#define DPSUM_NOISE_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpsum/data_model.h"
#include "dpsum/random.h"

namespace dpsum {

// Total budget epsilon split into a threshold-selection share
// epsilon1 = rho * epsilon and a measurement share epsilon2.
class PrivacyBudget {
 public:
  // Requires epsilon > 0 and 0 <= rho < 1.
  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double rho);

  double epsilon() const { return epsilon_; }
  double rho() const { return rho_; }
  double epsilon1() const { return epsilon1_; }
  // epsilon - epsilon1, so that epsilon1 + epsilon2 == epsilon.
  double epsilon2() const { return epsilon2_; }

 private:
  PrivacyBudget(double epsilon, double rho);

  double epsilon_;
  double rho_;
  double epsilon1_;
  double epsilon2_;
};

struct BudgetEntry {
  std::string component;
  double epsilon;
};

using BudgetLedger = std::vector<BudgetEntry>;

double LedgerTotal(const BudgetLedger& ledger);

// One draw from Laplace(0, scale) by inverse-CDF. InvalidArgument unless
// scale > 0.
absl::StatusOr<double> LaplaceSample(double scale, RandomSource& rng);

// `size` i.i.d. standard Laplace draws (location 0, scale 1).
Eigen::VectorXd StandardLaplaceVector(Eigen::Index size, RandomSource& rng);

// Maximum column sum of absolute entries. Zero for an empty matrix.
double SensitivityL1(const Eigen::MatrixXd& m);

// |{t in D : t <= bound}|.
std::size_t CountingQuery(const Dataset& d, double bound);

using SensitivityOneQuery = std::function<double(const Dataset&)>;

// Above-threshold sparse vector: threshold noise Laplace(2/epsilon), fresh
// per-query noise Laplace(4/epsilon), halts at the first query whose noisy
// value exceeds the noisy threshold. The whole call is epsilon-DP for queries
// of sensitivity at most one. nullopt means the list ran out.
absl::StatusOr<std::optional<std::size_t>> SparseVector(
    const Dataset& d, std::span<const SensitivityOneQuery> queries,
    double threshold, double epsilon, RandomSource& rng);

// Same procedure over query values already evaluated on the data; `values[k]`
// is only read once the first k-1 comparisons have failed.
absl::StatusOr<std::optional<std::size_t>> SparseVectorOverValues(
    const std::function<double(std::size_t)>& value, std::size_t num_queries,
    double threshold, double epsilon, RandomSource& rng);

}  // namespace dpsum

#endif  // DPSUM_NOISE_H_
