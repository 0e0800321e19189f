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


// Plain-text input and output: single-column datasets and per-mechanism
// result tables.

#ifndef DPSUM_CSV_IO_H_
#define DPSUM_CSV_IO_H_

#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpsum/data_model.h"
#include "dpsum/evaluation.h"

namespace dpsum {

// One numeric value per line; a non-numeric first line is taken as a header
// and blank lines are ignored. Malformed or negative rows fail with DataLoss
// naming the line.
absl::StatusOr<Dataset> ParseDatasetCsv(std::string_view text);

// As ParseDatasetCsv; a missing or unreadable file is NotFound.
absl::StatusOr<Dataset> IngestCsv(const std::string& path);

// Header "value", then one shortest round-trip number per line.
std::string DatasetCsv(const Dataset& d);

// Nine significant digits in plain decimal notation (no exponent).
std::string FormatNumber(double v);

// Columns query_threshold, true_answer, mean_answer, mean_rel_err,
// p5_rel_err, p95_rel_err; one row per query.
std::string MechanismCsv(const AggregateStats& stats);

absl::StatusOr<std::string> ReadTextFile(const std::string& path);
absl::Status WriteTextFile(const std::string& path, std::string_view text);

}  // namespace dpsum

#endif  // DPSUM_CSV_IO_H_
