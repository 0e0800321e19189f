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

#ifndef DPSUM_RANDOM_H_
#define DPSUM_RANDOM_H_

#include <cstdint>
#include <random>

namespace dpsum {

// Stateless 64-bit mixer used to derive independent stream seeds.
std::uint64_t MixSeed(std::uint64_t x);

// Seed of trial `trial` under experiment seed `seed`.
std::uint64_t DeriveStreamSeed(std::uint64_t seed, std::uint64_t trial);

// Seedable pseudo-random stream. Single owner: never share one instance
// across threads; hand each worker its own via Split() or a derived seed.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1), built from 53 random bits.
  double UniformOpen();

  // Independent child stream; advances this stream by one draw.
  RandomSource Split();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dpsum

#endif  // DPSUM_RANDOM_H_
