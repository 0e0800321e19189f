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

#ifndef DPSUM_ISOTONIC_H_
#define DPSUM_ISOTONIC_H_

#include <span>
#include <vector>

namespace dpsum {

// L2 projection of `y` onto non-decreasing sequences (pool adjacent
// violators). Empty input gives empty output.
std::vector<double> IsotonicL2(std::span<const double> y);

// Weighted variant minimising sum w_i (out_i - y_i)^2; weights must be
// positive and match `y` in length.
std::vector<double> IsotonicL2Weighted(std::span<const double> y,
                                       std::span<const double> weights);

}  // namespace dpsum

#endif  // DPSUM_ISOTONIC_H_
