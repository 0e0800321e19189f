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


// Experiment configuration as a flat JSON document. Keys mirror
// ExperimentConfig:
//
//   workload       "Q1" | "Q2" | "Q3" | "custom"
//   thresholds     array of numbers (custom workload)
//   bucket_width, domain_top, epsilon, rho, delta        numbers
//   mechanisms     array of names, or one comma-separated string
//   trunc          "none" | "svt" | "recursive" | "fixed"
//   svt_keep_ratio, svt_growth, svt_start                numbers
//   recursive_beta, recursive_theta_init, recursive_shrink
//   fixed_theta    number
//   trials         integer
//   seed           unsigned integer
//   isotonic       bool (or "on" / "off")
//
// A non-positive recursive_beta selects the default 2 * epsilon2 / 5.

#ifndef DPSUM_CONFIG_H_
#define DPSUM_CONFIG_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsum/evaluation.h"

namespace dpsum {

// Applies one field given as text, as on a command line. Errors name the
// field.
absl::Status SetConfigField(ExperimentConfig& cfg, std::string_view key,
                            std::string_view value);

// Parses a flat object, or an object whose "config" member is one (a run
// manifest). Fields not present keep their defaults.
absl::StatusOr<ExperimentConfig> ConfigFromJson(std::string_view text);

// Overlays the fields present in `text` onto `cfg`.
absl::Status MergeConfigJson(ExperimentConfig& cfg, std::string_view text);

// Every field, in a fixed order. Numbers round-trip exactly.
std::string ConfigToJson(const ExperimentConfig& cfg, int indent = 2);

}  // namespace dpsum

#endif  // DPSUM_CONFIG_H_
