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

#include "dpsum/isotonic.h"

#include <cassert>
#include <cstddef>

namespace dpsum {
namespace {

struct Block {
  double mean;
  double weight;
  std::size_t length;
};

}  // namespace

std::vector<double> IsotonicL2Weighted(std::span<const double> y,
                                       std::span<const double> weights) {
  assert(y.size() == weights.size());
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], weights[i], 1});
    // Pool while the last two blocks violate monotonicity.
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double total = prev.weight + top.weight;
      // Running-mean update instead of sum / weight.
      prev.mean += (top.mean - prev.mean) * (top.weight / total);
      prev.weight = total;
      prev.length += top.length;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const Block& b : blocks) out.insert(out.end(), b.length, b.mean);
  return out;
}

std::vector<double> IsotonicL2(std::span<const double> y) {
  const std::vector<double> ones(y.size(), 1.0);
  return IsotonicL2Weighted(y, ones);
}

}  // namespace dpsum
