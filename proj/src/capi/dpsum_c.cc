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


#include "dpsum/dpsum.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "dpsum/config.h"
#include "dpsum/csv_io.h"
#include "dpsum/data_model.h"
#include "dpsum/evaluation.h"
#include "dpsum/isotonic.h"

struct dpsum_dataset {
  dpsum::Dataset data;
};

struct dpsum_config {
  dpsum::ExperimentConfig cfg;
};

struct dpsum_report {
  dpsum::ExperimentReport report;
};

namespace {

thread_local std::string last_error;

dpsum_status ToCode(absl::StatusCode code) {
  switch (code) {
    case absl::StatusCode::kOk:
      return DPSUM_OK;
    case absl::StatusCode::kInvalidArgument:
      return DPSUM_ERR_INVALID_ARGUMENT;
    case absl::StatusCode::kOutOfRange:
      return DPSUM_ERR_OUT_OF_DOMAIN;
    case absl::StatusCode::kFailedPrecondition:
      return DPSUM_ERR_MISALIGNED;
    case absl::StatusCode::kDataLoss:
      return DPSUM_ERR_PARSE;
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kPermissionDenied:
      return DPSUM_ERR_IO;
    default:
      return DPSUM_ERR_RUNTIME;
  }
}

dpsum_status Fail(dpsum_status code, std::string message) {
  last_error = std::move(message);
  return code;
}

dpsum_status Report(const absl::Status& s) {
  if (s.ok()) return DPSUM_OK;
  return Fail(ToCode(s.code()), std::string(s.message()));
}

dpsum_status NullArgument(const char* name) {
  return Fail(DPSUM_ERR_INVALID_ARGUMENT,
              std::string(name) + " must not be null");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs `body`, turning escaping C++ exceptions into status codes.
template <typename F>
dpsum_status Guard(F&& body) {
  try {
    return body();
  } catch (const std::bad_alloc&) {
    return Fail(DPSUM_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(DPSUM_ERR_RUNTIME, e.what());
  } catch (...) {
    return Fail(DPSUM_ERR_RUNTIME, "unknown error");
  }
}

dpsum_status CheckValues(const double* values, size_t n) {
  if (values == nullptr && n > 0) return NullArgument("values");
  return DPSUM_OK;
}

}  // namespace

extern "C" {

const char* dpsum_version(void) { return DPSUM_VERSION; }

const char* dpsum_last_error(void) { return last_error.c_str(); }

const char* dpsum_status_name(dpsum_status status) {
  switch (status) {
    case DPSUM_OK:
      return "ok";
    case DPSUM_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case DPSUM_ERR_OUT_OF_DOMAIN:
      return "out of domain";
    case DPSUM_ERR_MISALIGNED:
      return "misaligned workload";
    case DPSUM_ERR_PARSE:
      return "parse error";
    case DPSUM_ERR_IO:
      return "i/o error";
    case DPSUM_ERR_RUNTIME:
      return "runtime error";
  }
  return "unknown status";
}

void dpsum_string_free(char* s) { std::free(s); }

dpsum_status dpsum_dataset_from_values(const double* values, size_t n,
                                       dpsum_dataset** out) {
  return Guard([&] {
    if (out == nullptr) return NullArgument("out");
    if (dpsum_status s = CheckValues(values, n); s != DPSUM_OK) return s;
    auto d = dpsum::Dataset::Create(std::vector<double>(values, values + n));
    if (!d.ok()) return Report(d.status());
    *out = new dpsum_dataset{*std::move(d)};
    return DPSUM_OK;
  });
}

dpsum_status dpsum_dataset_load_csv(const char* path, dpsum_dataset** out) {
  return Guard([&] {
    if (path == nullptr) return NullArgument("path");
    if (out == nullptr) return NullArgument("out");
    auto d = dpsum::IngestCsv(path);
    if (!d.ok()) return Report(d.status());
    *out = new dpsum_dataset{*std::move(d)};
    return DPSUM_OK;
  });
}

dpsum_status dpsum_dataset_generate(size_t n, uint64_t seed, double domain_top,
                                    dpsum_dataset** out) {
  return Guard([&] {
    if (out == nullptr) return NullArgument("out");
    dpsum::SyntheticParams params;
    params.domain_top = domain_top;
    auto d = dpsum::GenerateSynthetic(n, params, seed);
    if (!d.ok()) return Report(d.status());
    *out = new dpsum_dataset{*std::move(d)};
    return DPSUM_OK;
  });
}

dpsum_status dpsum_dataset_write_csv(const dpsum_dataset* d,
                                     const char* path) {
  return Guard([&] {
    if (d == nullptr) return NullArgument("dataset");
    if (path == nullptr) return NullArgument("path");
    return Report(dpsum::WriteTextFile(path, dpsum::DatasetCsv(d->data)));
  });
}

size_t dpsum_dataset_size(const dpsum_dataset* d) {
  return d == nullptr ? 0 : d->data.size();
}

const double* dpsum_dataset_values(const dpsum_dataset* d) {
  return d == nullptr ? nullptr : d->data.values().data();
}

void dpsum_dataset_free(dpsum_dataset* d) { delete d; }

dpsum_status dpsum_config_create(dpsum_config** out) {
  return Guard([&] {
    if (out == nullptr) return NullArgument("out");
    *out = new dpsum_config{};
    return DPSUM_OK;
  });
}

dpsum_status dpsum_config_set(dpsum_config* c, const char* key,
                              const char* value) {
  return Guard([&] {
    if (c == nullptr) return NullArgument("config");
    if (key == nullptr) return NullArgument("key");
    if (value == nullptr) return NullArgument("value");
    return Report(dpsum::SetConfigField(c->cfg, key, value));
  });
}

dpsum_status dpsum_config_load_json(dpsum_config* c, const char* json_text) {
  return Guard([&] {
    if (c == nullptr) return NullArgument("config");
    if (json_text == nullptr) return NullArgument("json_text");
    return Report(dpsum::MergeConfigJson(c->cfg, json_text));
  });
}

dpsum_status dpsum_config_validate(const dpsum_config* c) {
  return Guard([&] {
    if (c == nullptr) return NullArgument("config");
    return Report(dpsum::ValidateConfig(c->cfg));
  });
}

dpsum_status dpsum_config_to_json(const dpsum_config* c, char** out) {
  return Guard([&] {
    if (c == nullptr) return NullArgument("config");
    if (out == nullptr) return NullArgument("out");
    *out = CopyString(dpsum::ConfigToJson(c->cfg));
    if (*out == nullptr) return Fail(DPSUM_ERR_RUNTIME, "out of memory");
    return DPSUM_OK;
  });
}

void dpsum_config_free(dpsum_config* c) { delete c; }

dpsum_status dpsum_experiment_run(const dpsum_config* c,
                                  const dpsum_dataset* d,
                                  dpsum_report** out) {
  return Guard([&] {
    if (c == nullptr) return NullArgument("config");
    if (d == nullptr) return NullArgument("dataset");
    if (out == nullptr) return NullArgument("out");
    auto r = dpsum::RunExperiment(c->cfg, d->data);
    if (!r.ok()) return Report(r.status());
    *out = new dpsum_report{*std::move(r)};
    return DPSUM_OK;
  });
}

size_t dpsum_report_mechanism_count(const dpsum_report* r) {
  return r == nullptr ? 0 : r->report.mechanisms.size();
}

const char* dpsum_report_mechanism_name(const dpsum_report* r, size_t mech) {
  if (r == nullptr || mech >= r->report.mechanisms.size()) return nullptr;
  return r->report.mechanisms[mech].mechanism.c_str();
}

size_t dpsum_report_query_count(const dpsum_report* r) {
  return r == nullptr ? 0 : r->report.thresholds.size();
}

dpsum_status dpsum_report_get_row(const dpsum_report* r, size_t mech,
                                  size_t query, dpsum_query_row* out) {
  if (r == nullptr) return NullArgument("report");
  if (out == nullptr) return NullArgument("out");
  if (mech >= r->report.mechanisms.size()) {
    return Fail(DPSUM_ERR_INVALID_ARGUMENT, "mechanism index out of range");
  }
  const auto& queries = r->report.mechanisms[mech].queries;
  if (query >= queries.size()) {
    return Fail(DPSUM_ERR_INVALID_ARGUMENT, "query index out of range");
  }
  const dpsum::QueryStats& q = queries[query];
  *out = {q.threshold,   q.true_answer,  q.mean_answer, q.p5_answer,
          q.p95_answer,  q.mean_rel_err, q.p5_rel_err,  q.p95_rel_err};
  return DPSUM_OK;
}

dpsum_status dpsum_report_mechanism_info(const dpsum_report* r, size_t mech,
                                         int* trials_ok, int* trials_failed,
                                         double* mean_threshold,
                                         size_t* warning_count) {
  if (r == nullptr) return NullArgument("report");
  if (mech >= r->report.mechanisms.size()) {
    return Fail(DPSUM_ERR_INVALID_ARGUMENT, "mechanism index out of range");
  }
  const dpsum::AggregateStats& a = r->report.mechanisms[mech];
  if (trials_ok != nullptr) *trials_ok = a.trials_ok;
  if (trials_failed != nullptr) *trials_failed = a.trials_failed;
  if (mean_threshold != nullptr) {
    *mean_threshold = a.mean_threshold.value_or(
        std::numeric_limits<double>::quiet_NaN());
  }
  if (warning_count != nullptr) *warning_count = a.warning_count;
  return DPSUM_OK;
}

size_t dpsum_report_failure_count(const dpsum_report* r) {
  return r == nullptr ? 0 : r->report.failures.size();
}

dpsum_status dpsum_report_csv(const dpsum_report* r, size_t mech, char** out) {
  return Guard([&] {
    if (r == nullptr) return NullArgument("report");
    if (out == nullptr) return NullArgument("out");
    if (mech >= r->report.mechanisms.size()) {
      return Fail(DPSUM_ERR_INVALID_ARGUMENT, "mechanism index out of range");
    }
    *out = CopyString(dpsum::MechanismCsv(r->report.mechanisms[mech]));
    if (*out == nullptr) return Fail(DPSUM_ERR_RUNTIME, "out of memory");
    return DPSUM_OK;
  });
}

dpsum_status dpsum_report_write_csv(const dpsum_report* r, size_t mech,
                                    const char* path) {
  return Guard([&] {
    if (r == nullptr) return NullArgument("report");
    if (path == nullptr) return NullArgument("path");
    if (mech >= r->report.mechanisms.size()) {
      return Fail(DPSUM_ERR_INVALID_ARGUMENT, "mechanism index out of range");
    }
    return Report(dpsum::WriteTextFile(
        path, dpsum::MechanismCsv(r->report.mechanisms[mech])));
  });
}

void dpsum_report_free(dpsum_report* r) { delete r; }

dpsum_status dpsum_prefix_sum(const double* values, size_t n,
                              double threshold, double* out) {
  return dpsum_trunc_query(values, n, threshold,
                           std::numeric_limits<double>::infinity(), out);
}

dpsum_status dpsum_trunc_query(const double* values, size_t n,
                               double threshold, double theta, double* out) {
  return Guard([&] {
    if (out == nullptr) return NullArgument("out");
    if (dpsum_status s = CheckValues(values, n); s != DPSUM_OK) return s;
    if (std::isnan(threshold) || std::isnan(theta)) {
      return Fail(DPSUM_ERR_INVALID_ARGUMENT, "threshold and theta must be numbers");
    }
    if (theta < 0) {
      return Fail(DPSUM_ERR_INVALID_ARGUMENT, "theta must be non-negative");
    }
    auto d = dpsum::Dataset::Create(std::vector<double>(values, values + n));
    if (!d.ok()) return Report(d.status());
    *out = std::isinf(theta) ? dpsum::PrefixSum(*d, threshold)
                             : dpsum::TruncQuery(*d, threshold, theta);
    return DPSUM_OK;
  });
}

dpsum_status dpsum_isotonic_l2(const double* y, size_t n, double* out) {
  return Guard([&] {
    if (out == nullptr && n > 0) return NullArgument("out");
    if (dpsum_status s = CheckValues(y, n); s != DPSUM_OK) return s;
    for (size_t i = 0; i < n; ++i) {
      if (!std::isfinite(y[i])) {
        return Fail(DPSUM_ERR_INVALID_ARGUMENT, "y must be finite");
      }
    }
    const std::vector<double> fitted = dpsum::IsotonicL2({y, n});
    std::copy(fitted.begin(), fitted.end(), out);
    return DPSUM_OK;
  });
}

}  // extern "C"
