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


#include "dpsum/config.h"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"

namespace dpsum {
namespace {

using Json = nlohmann::ordered_json;

absl::Status Bad(absl::string_view key, absl::string_view what,
                 absl::string_view value) {
  return absl::InvalidArgumentError(
      absl::StrCat(key, ": ", what, ", got \"", value, "\""));
}

absl::Status ParseDouble(absl::string_view key, absl::string_view value,
                         double& out) {
  double v;
  if (!absl::SimpleAtod(absl::StripAsciiWhitespace(value), &v) ||
      !std::isfinite(v)) {
    return Bad(key, "expected a finite number", value);
  }
  out = v;
  return absl::OkStatus();
}

absl::Status ParseDoubleList(absl::string_view key, absl::string_view value,
                             std::vector<double>& out) {
  std::vector<double> parsed;
  for (absl::string_view part : absl::StrSplit(value, ',', absl::SkipWhitespace())) {
    double v;
    if (absl::Status s = ParseDouble(key, part, v); !s.ok()) return s;
    parsed.push_back(v);
  }
  if (parsed.empty()) return Bad(key, "expected a list of numbers", value);
  out = std::move(parsed);
  return absl::OkStatus();
}

absl::Status ParseMechanisms(absl::string_view key, absl::string_view value,
                             std::vector<MechanismKind>& out) {
  std::vector<MechanismKind> parsed;
  for (absl::string_view part : absl::StrSplit(value, ',', absl::SkipWhitespace())) {
    const std::string name =
        absl::AsciiStrToLower(absl::StripAsciiWhitespace(part));
    auto m = ParseMechanismKind(std::string_view(name));
    if (!m) {
      return Bad(key, "unknown mechanism (sqm, identity, workload, timm, tamm)",
                 part);
    }
    parsed.push_back(*m);
  }
  if (parsed.empty()) return Bad(key, "expected at least one mechanism", value);
  out = std::move(parsed);
  return absl::OkStatus();
}

absl::Status ParseBool(absl::string_view key, absl::string_view value,
                       bool& out) {
  const std::string v = absl::AsciiStrToLower(absl::StripAsciiWhitespace(value));
  if (v == "on" || v == "true" || v == "1") {
    out = true;
  } else if (v == "off" || v == "false" || v == "0") {
    out = false;
  } else {
    return Bad(key, "expected on or off", value);
  }
  return absl::OkStatus();
}

std::string ValueText(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::vector<std::string> parts;
    for (const Json& e : v) parts.push_back(ValueText(e));
    return absl::StrJoin(parts, ",");
  }
  return v.dump();
}

}  // namespace

absl::Status SetConfigField(ExperimentConfig& cfg, std::string_view key_in,
                            std::string_view value_in) {
  const absl::string_view key(key_in.data(), key_in.size());
  const absl::string_view value(value_in.data(), value_in.size());
  if (key == "workload") {
    const absl::string_view name = absl::StripAsciiWhitespace(value);
    auto w = ParseWorkloadPreset(std::string_view(name.data(), name.size()));
    if (!w) return Bad(key, "expected Q1, Q2, Q3 or custom", value);
    cfg.workload = *w;
    return absl::OkStatus();
  }
  if (key == "thresholds") {
    if (absl::Status s = ParseDoubleList(key, value, cfg.custom_thresholds);
        !s.ok()) {
      return s;
    }
    cfg.workload = WorkloadPreset::kCustom;
    return absl::OkStatus();
  }
  if (key == "bucket_width") return ParseDouble(key, value, cfg.bucket_width);
  if (key == "domain_top") return ParseDouble(key, value, cfg.domain_top);
  if (key == "epsilon") return ParseDouble(key, value, cfg.epsilon);
  if (key == "rho") return ParseDouble(key, value, cfg.rho);
  if (key == "delta") return ParseDouble(key, value, cfg.delta);
  if (key == "mechanisms") return ParseMechanisms(key, value, cfg.mechanisms);
  if (key == "trunc") {
    const std::string v =
        absl::AsciiStrToLower(absl::StripAsciiWhitespace(value));
    for (TruncationMode m : {TruncationMode::kNone, TruncationMode::kSvt,
                             TruncationMode::kRecursive, TruncationMode::kFixed}) {
      if (v == TruncationModeName(m)) {
        cfg.truncation.mode = m;
        return absl::OkStatus();
      }
    }
    return Bad(key, "expected none, svt, recursive or fixed", value);
  }
  if (key == "svt_keep_ratio") {
    return ParseDouble(key, value, cfg.truncation.svt.keep_ratio);
  }
  if (key == "svt_growth") {
    return ParseDouble(key, value, cfg.truncation.svt.growth);
  }
  if (key == "svt_start") {
    return ParseDouble(key, value, cfg.truncation.svt.start);
  }
  if (key == "recursive_beta") {
    return ParseDouble(key, value, cfg.truncation.recursive.beta);
  }
  if (key == "recursive_theta_init") {
    return ParseDouble(key, value, cfg.truncation.recursive.theta_init);
  }
  if (key == "recursive_shrink") {
    return ParseDouble(key, value, cfg.truncation.recursive.shrink);
  }
  if (key == "fixed_theta") {
    return ParseDouble(key, value, cfg.truncation.fixed_theta);
  }
  if (key == "trials") {
    int v;
    if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(value), &v) || v < 1) {
      return Bad(key, "expected a positive integer", value);
    }
    cfg.trials = v;
    return absl::OkStatus();
  }
  if (key == "threads") {
    int v;
    if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(value), &v) || v < 0) {
      return Bad(key, "expected a non-negative integer", value);
    }
    cfg.threads = v;
    return absl::OkStatus();
  }
  if (key == "seed") {
    std::uint64_t v;
    if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(value), &v)) {
      return Bad(key, "expected an unsigned integer", value);
    }
    cfg.seed = v;
    return absl::OkStatus();
  }
  if (key == "isotonic") return ParseBool(key, value, cfg.isotonic);
  return absl::InvalidArgumentError(absl::StrCat("unknown field \"", key, "\""));
}

absl::Status MergeConfigJson(ExperimentConfig& cfg, std::string_view text) {
  Json doc = Json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::DataLossError("config: not valid JSON");
  }
  if (doc.is_object() && doc.contains("config")) doc = doc["config"];
  if (!doc.is_object()) {
    return absl::InvalidArgumentError("config: expected a JSON object");
  }
  ExperimentConfig updated = cfg;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object() || value.is_null()) {
      return absl::InvalidArgumentError(
          absl::StrCat(key, ": expected a scalar or array"));
    }
    if (absl::Status s = SetConfigField(updated, key, ValueText(value));
        !s.ok()) {
      return s;
    }
  }
  cfg = std::move(updated);
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ConfigFromJson(std::string_view text) {
  ExperimentConfig cfg;
  if (absl::Status s = MergeConfigJson(cfg, text); !s.ok()) return s;
  return cfg;
}

std::string ConfigToJson(const ExperimentConfig& cfg, int indent) {
  Json j;
  j["workload"] = std::string(WorkloadPresetName(cfg.workload));
  if (cfg.workload == WorkloadPreset::kCustom) {
    j["thresholds"] = cfg.custom_thresholds;
  }
  j["bucket_width"] = cfg.bucket_width;
  j["domain_top"] = cfg.domain_top;
  j["epsilon"] = cfg.epsilon;
  j["rho"] = cfg.rho;
  Json mechs = Json::array();
  for (MechanismKind m : cfg.mechanisms) {
    mechs.push_back(std::string(MechanismKindName(m)));
  }
  j["mechanisms"] = mechs;
  j["trunc"] = std::string(TruncationModeName(cfg.truncation.mode));
  j["svt_keep_ratio"] = cfg.truncation.svt.keep_ratio;
  j["svt_growth"] = cfg.truncation.svt.growth;
  j["svt_start"] = cfg.truncation.svt.start;
  j["recursive_beta"] = cfg.truncation.recursive.beta;
  j["recursive_theta_init"] = cfg.truncation.recursive.theta_init;
  j["recursive_shrink"] = cfg.truncation.recursive.shrink;
  j["fixed_theta"] = cfg.truncation.fixed_theta;
  j["trials"] = cfg.trials;
  j["delta"] = cfg.delta;
  j["seed"] = cfg.seed;
  j["isotonic"] = cfg.isotonic;
  return j.dump(indent);
}

}  // namespace dpsum
