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


#include "dpsum/csv_io.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"

namespace dpsum {
namespace {

constexpr int kSignificant = 9;

std::string ShortestNumber(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

absl::StatusOr<Dataset> ParseDatasetCsv(std::string_view text_in) {
  const absl::string_view text(text_in.data(), text_in.size());
  std::vector<double> values;
  std::size_t line_no = 0;
  for (absl::string_view raw : absl::StrSplit(text, '\n')) {
    ++line_no;
    const absl::string_view line = absl::StripAsciiWhitespace(raw);
    if (line.empty()) continue;
    double v;
    if (!absl::SimpleAtod(line, &v) || !std::isfinite(v)) {
      if (line_no == 1) continue;  // header
      return absl::DataLossError(absl::StrCat(
          "line ", line_no, ": not a number: \"", line, "\""));
    }
    if (v < 0.0) {
      return absl::DataLossError(
          absl::StrCat("line ", line_no, ": negative value ", line));
    }
    values.push_back(v);
  }
  if (values.empty()) return absl::DataLossError("no data rows");
  return Dataset::Create(std::move(values));
}

absl::StatusOr<std::string> ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  return ss.str();
}

absl::Status WriteTextFile(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) {
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> IngestCsv(const std::string& path) {
  auto text = ReadTextFile(path);
  if (!text.ok()) return text.status();
  auto d = ParseDatasetCsv(*text);
  if (!d.ok()) {
    return absl::Status(d.status().code(),
                        absl::StrCat(path, ": ", d.status().message()));
  }
  return d;
}

std::string DatasetCsv(const Dataset& d) {
  std::string out = "value\n";
  for (double v : d.values()) absl::StrAppend(&out, ShortestNumber(v), "\n");
  return out;
}

std::string FormatNumber(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v,
                         std::chars_format::scientific, kSignificant - 1);
  const std::string_view sci(buf, static_cast<std::size_t>(r.ptr - buf));
  // sci looks like [-]d.dddddddde[+-]XX.
  const bool negative = sci.front() == '-';
  const std::size_t epos = sci.find('e');
  std::string digits;
  for (char c : sci.substr(0, epos)) {
    if (c >= '0' && c <= '9') digits.push_back(c);
  }
  const int exponent = std::atoi(std::string(sci.substr(epos + 1)).c_str());
  std::string out = negative ? "-" : "";
  const int n = static_cast<int>(digits.size());
  if (exponent >= n - 1) {
    out += digits;
    out.append(static_cast<std::size_t>(exponent - (n - 1)), '0');
  } else if (exponent >= 0) {
    out += digits.substr(0, static_cast<std::size_t>(exponent + 1));
    out += '.';
    out += digits.substr(static_cast<std::size_t>(exponent + 1));
  } else {
    out += "0.";
    out.append(static_cast<std::size_t>(-exponent - 1), '0');
    out += digits;
  }
  return out;
}

std::string MechanismCsv(const AggregateStats& stats) {
  std::string out =
      "query_threshold,true_answer,mean_answer,mean_rel_err,p5_rel_err,"
      "p95_rel_err\n";
  for (const QueryStats& q : stats.queries) {
    absl::StrAppend(&out, FormatNumber(q.threshold), ",",
                    FormatNumber(q.true_answer), ",",
                    FormatNumber(q.mean_answer), ",",
                    FormatNumber(q.mean_rel_err), ",",
                    FormatNumber(q.p5_rel_err), ",",
                    FormatNumber(q.p95_rel_err), "\n");
  }
  return out;
}

}  // namespace dpsum
