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

#include "dpsum/data_model.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpsum {

Dataset::Dataset(std::vector<double> sorted_values)
    : values_(std::move(sorted_values)) {
  prefix_.resize(values_.size() + 1);
  prefix_[0] = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    prefix_[k + 1] = prefix_[k] + values_[k];
  }
}

absl::StatusOr<Dataset> Dataset::Create(std::vector<double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!std::isfinite(values[k]) || values[k] < 0.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", k, " has invalid value ", values[k],
                       "; records must be finite and non-negative"));
    }
  }
  std::sort(values.begin(), values.end());
  return Dataset(std::move(values));
}

std::size_t Dataset::CountAtMost(double bound) const {
  return static_cast<std::size_t>(
      std::upper_bound(values_.begin(), values_.end(), bound) -
      values_.begin());
}

absl::StatusOr<BucketSpec> BucketSpec::FromUpperBounds(
    std::vector<double> upper_bounds, double first_lower) {
  if (upper_bounds.empty()) {
    return absl::InvalidArgumentError("bucket spec needs at least one bucket");
  }
  double prev = first_lower;
  for (std::size_t i = 0; i < upper_bounds.size(); ++i) {
    if (!std::isfinite(upper_bounds[i]) || upper_bounds[i] <= prev) {
      return absl::InvalidArgumentError(absl::StrCat(
          "bucket ", i, " upper bound ", upper_bounds[i],
          " must exceed its lower bound ", prev));
    }
    prev = upper_bounds[i];
  }
  if (first_lower >= 0.0) {
    return absl::InvalidArgumentError(
        "first bucket lower bound must be negative so zero is covered");
  }
  return BucketSpec(std::move(upper_bounds), first_lower);
}

absl::StatusOr<BucketSpec> BucketSpec::Uniform(double width,
                                               std::size_t count) {
  if (!(width > 0.0) || !std::isfinite(width) || count == 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "uniform buckets need a positive width and count, got width=", width,
        " count=", count));
  }
  std::vector<double> upper(count);
  for (std::size_t i = 0; i < count; ++i) {
    upper[i] = width * static_cast<double>(i + 1);
  }
  return FromUpperBounds(std::move(upper));
}

absl::StatusOr<std::size_t> BucketSpec::Locate(double value) const {
  if (!(value > first_lower_) || value > upper_.back()) {
    return absl::OutOfRangeError(absl::StrCat(
        "value ", value, " lies outside the bucket domain (", first_lower_,
        ", ", upper_.back(), "]"));
  }
  // First bucket whose upper bound is >= value.
  return static_cast<std::size_t>(
      std::lower_bound(upper_.begin(), upper_.end(), value) - upper_.begin());
}

double PrefixSum(const Dataset& d, double threshold) {
  return d.SumOfSmallest(d.CountAtMost(threshold));
}

double TruncQuery(const Dataset& d, double threshold, double theta) {
  const std::size_t members = d.CountAtMost(threshold);
  const std::size_t unclipped = std::min(members, d.CountAtMost(theta));
  return d.SumOfSmallest(unclipped) +
         static_cast<double>(members - unclipped) * theta;
}

Dataset TruncateDataset(const Dataset& d, double theta) {
  std::vector<double> out(d.values().begin(), d.values().end());
  for (double& v : out) v = std::min(v, theta);
  // Clipping preserves order, so Create's sort is a no-op pass.
  return *Dataset::Create(std::move(out));
}

absl::StatusOr<VectorForm> Vectorize(const Dataset& d, const BucketSpec& b) {
  VectorForm form;
  form.counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.size()));
  form.weights.diagonal.resize(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    form.weights.diagonal[static_cast<Eigen::Index>(i)] = b.upper(i);
  }
  for (double v : d.values()) {
    absl::StatusOr<std::size_t> bucket = b.Locate(v);
    if (!bucket.ok()) return bucket.status();
    form.counts[static_cast<Eigen::Index>(*bucket)] += 1.0;
  }
  return form;
}

absl::StatusOr<WorkloadMatrix> BuildPrefixWorkload(
    std::span<const double> thresholds, const BucketSpec& b) {
  if (thresholds.empty()) {
    return absl::InvalidArgumentError("workload needs at least one threshold");
  }
  const auto p = static_cast<Eigen::Index>(thresholds.size());
  const auto n = static_cast<Eigen::Index>(b.size());
  WorkloadMatrix w;
  w.matrix = Eigen::MatrixXd::Zero(p, n);
  w.thresholds.assign(thresholds.begin(), thresholds.end());
  const auto upper = b.upper_bounds();
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sigma = thresholds[static_cast<std::size_t>(j)];
    if (j > 0 && !(sigma > thresholds[static_cast<std::size_t>(j - 1)])) {
      return absl::InvalidArgumentError(
          absl::StrCat("thresholds must be strictly increasing; threshold ", j,
                       " (", sigma, ") is not"));
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(sigma));
    auto it = std::lower_bound(upper.begin(), upper.end(), sigma - tol);
    if (it == upper.end() || std::abs(*it - sigma) > tol) {
      return absl::FailedPreconditionError(absl::StrCat(
          "threshold ", sigma, " is not aligned to any bucket upper bound"));
    }
    const auto last = static_cast<Eigen::Index>(it - upper.begin());
    w.matrix.row(j).head(last + 1).setOnes();
  }
  return w;
}

TruncatedWeightMatrix TruncateWeightMatrix(const WeightMatrix& w,
                                           double theta) {
  TruncatedWeightMatrix t;
  t.threshold = theta;
  t.diagonal = w.diagonal.cwiseMin(theta);
  return t;
}

}  // namespace dpsum
