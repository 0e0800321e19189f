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

// Private selection of the truncation threshold.

#ifndef DPSUM_THRESHOLD_SELECTION_H_
#define DPSUM_THRESHOLD_SELECTION_H_

#include <cstddef>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsum/data_model.h"
#include "dpsum/random.h"

namespace dpsum {

inline constexpr std::size_t kMaxSvtCandidates = 200;

// Candidates u_k = start * growth^k; the SVT threshold targets
// keep_ratio * |D| records at or below the chosen candidate.
struct SvtThresholdParams {
  double keep_ratio = 0.998;
  double growth = 1.2;
  double start = 5e4;
};

// Candidate grid theta_init * shrink^k, k = 0..K, stopping before a value
// drops below one. `beta` trades clipping bias against noise scale.
struct RecursiveThresholdParams {
  double beta = 0.0;
  double theta_init = 5e4;
  double shrink = 0.5;

  // beta = 2 * epsilon2 / 5 with the other defaults.
  static RecursiveThresholdParams Defaults(double epsilon2);
};

struct ThresholdSelection {
  double theta = 0.0;
  // Budget this call consumed.
  double epsilon = 0.0;
  std::vector<std::string> warnings;
};

absl::Status ValidateSvtParams(const SvtThresholdParams& p);
absl::Status ValidateRecursiveParams(const RecursiveThresholdParams& p);

// The first candidate whose record count reaches keep_ratio * |D|, found with
// the sparse vector technique at budget epsilon1. When no candidate fires
// within kMaxSvtCandidates the last candidate is returned with a warning.
absl::StatusOr<ThresholdSelection> SelectThresholdSvt(
    const Dataset& d, const SvtThresholdParams& p, double epsilon1,
    RandomSource& rng);

// Report-noisy-min over the candidate grid. Records are first clipped at
// theta_init; the score of candidate c is the extra clipping loss
// sum(min(t, theta_init) - min(t, c)) plus c / beta. Scores have sensitivity
// theta_init and move together when a record is added, so Laplace noise of
// scale theta_init / epsilon1 makes the selection epsilon1-DP.
absl::StatusOr<ThresholdSelection> SelectThresholdRecursive(
    const Dataset& d, const RecursiveThresholdParams& p, double epsilon1,
    RandomSource& rng);

// The candidate grid used by SelectThresholdRecursive.
std::vector<double> RecursiveCandidateGrid(const RecursiveThresholdParams& p);

// min over i in [0, N] of (sum of the i smallest records) + (N - i) * cap.
double SecondPartMin(const Dataset& d, double cap);

}  // namespace dpsum

#endif  // DPSUM_THRESHOLD_SELECTION_H_
