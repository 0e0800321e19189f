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

// Deterministic substrate for prefix-sum workloads: datasets, buckets, the
// vector form of a dataset, prefix workload matrices and the truncation
// operator. Nothing in this file consumes privacy budget.

#ifndef DPSUM_DATA_MODEL_H_
#define DPSUM_DATA_MODEL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace dpsum {

// A multiset of non-negative records, one per individual. Values are kept
// sorted so that order never matters and threshold queries are logarithmic.
class Dataset {
 public:
  Dataset() = default;

  // Fails with InvalidArgument if any value is negative or not finite.
  static absl::StatusOr<Dataset> Create(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  // Sorted ascending.
  std::span<const double> values() const { return values_; }
  double max() const { return values_.empty() ? 0.0 : values_.back(); }

  // Number of records with value <= bound.
  std::size_t CountAtMost(double bound) const;
  // Sum of the `count` smallest records.
  double SumOfSmallest(std::size_t count) const { return prefix_[count]; }

 private:
  explicit Dataset(std::vector<double> sorted_values);

  std::vector<double> values_;
  // prefix_[k] = sum of the k smallest values.
  std::vector<double> prefix_{0.0};
};

// Ordered half-open buckets (l_i, u_i]. Consecutive buckets share a boundary:
// l_{i+1} = u_i. The first bucket's lower bound is below zero so that a zero
// record has a home.
class BucketSpec {
 public:
  static absl::StatusOr<BucketSpec> FromUpperBounds(
      std::vector<double> upper_bounds, double first_lower = -1.0);
  // `count` buckets of equal `width`: (-1, w], (w, 2w], ...
  static absl::StatusOr<BucketSpec> Uniform(double width, std::size_t count);

  std::size_t size() const { return upper_.size(); }
  double lower(std::size_t i) const { return i == 0 ? first_lower_ : upper_[i - 1]; }
  double upper(std::size_t i) const { return upper_[i]; }
  std::span<const double> upper_bounds() const { return upper_; }
  double top() const { return upper_.back(); }

  // Index of the bucket holding `value`, or OutOfRange.
  absl::StatusOr<std::size_t> Locate(double value) const;

 private:
  BucketSpec(std::vector<double> upper, double first_lower)
      : upper_(std::move(upper)), first_lower_(first_lower) {}

  std::vector<double> upper_;
  double first_lower_;
};

// Diagonal bucket weights; entry i is the upper bound u_i of bucket i.
struct WeightMatrix {
  Eigen::VectorXd diagonal;

  Eigen::MatrixXd Dense() const { return diagonal.asDiagonal(); }
};

// Weights clipped at `threshold`: entry i is min(u_i, threshold).
struct TruncatedWeightMatrix {
  Eigen::VectorXd diagonal;
  double threshold = 0.0;

  Eigen::MatrixXd Dense() const { return diagonal.asDiagonal(); }
};

// 0-1 prefix workload: row j has a one in column i iff u_i <= sigma_j.
struct WorkloadMatrix {
  Eigen::MatrixXd matrix;
  std::vector<double> thresholds;

  std::size_t num_queries() const { return thresholds.size(); }
};

// Vector form of a dataset over a bucket spec.
struct VectorForm {
  Eigen::VectorXd counts;
  WeightMatrix weights;
};

// Sum of record values <= threshold.
double PrefixSum(const Dataset& d, double threshold);

// Sum over records t <= threshold of min(t, theta). Membership is decided by
// the original value; only the contribution is clipped.
double TruncQuery(const Dataset& d, double threshold, double theta);

// Every record v replaced by min(v, theta).
Dataset TruncateDataset(const Dataset& d, double theta);

// Fails with OutOfRange naming the first record that falls outside every
// bucket.
absl::StatusOr<VectorForm> Vectorize(const Dataset& d, const BucketSpec& b);

// Fails with FailedPrecondition when a threshold is not a bucket upper bound,
// and with InvalidArgument when thresholds are empty or not increasing.
absl::StatusOr<WorkloadMatrix> BuildPrefixWorkload(
    std::span<const double> thresholds, const BucketSpec& b);

TruncatedWeightMatrix TruncateWeightMatrix(const WeightMatrix& w,
                                           double theta);

}  // namespace dpsum

#endif  // DPSUM_DATA_MODEL_H_
