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


// dpsum command-line tool.
//
//   dpsum run [--config FILE] [flags...] (--data CSV | --synthetic)
//   dpsum gen-data --n N [--seed S] [--domain-top TOP] --out FILE
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
// error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpsum/dpsum.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

constexpr char kThreadsEnv[] = "DP_SUMQUERY_THREADS";

using Json = nlohmann::ordered_json;

struct ConfigDeleter {
  void operator()(dpsum_config* c) const { dpsum_config_free(c); }
};
struct DatasetDeleter {
  void operator()(dpsum_dataset* d) const { dpsum_dataset_free(d); }
};
struct ReportDeleter {
  void operator()(dpsum_report* r) const { dpsum_report_free(r); }
};
using ConfigPtr = std::unique_ptr<dpsum_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<dpsum_dataset, DatasetDeleter>;
using ReportPtr = std::unique_ptr<dpsum_report, ReportDeleter>;

int ExitCodeFor(dpsum_status s) {
  switch (s) {
    case DPSUM_OK:
      return kExitOk;
    case DPSUM_ERR_INVALID_ARGUMENT:
    case DPSUM_ERR_MISALIGNED:
      return kExitConfig;
    case DPSUM_ERR_OUT_OF_DOMAIN:
    case DPSUM_ERR_PARSE:
    case DPSUM_ERR_IO:
      return kExitData;
    case DPSUM_ERR_RUNTIME:
      return kExitRuntime;
  }
  return kExitRuntime;
}

int Complain(int code, const std::string& what) {
  std::cerr << "dpsum: " << what << "\n";
  return code;
}

int ComplainStatus(dpsum_status s, const std::string& context) {
  return Complain(ExitCodeFor(s), context + ": " + dpsum_last_error());
}

std::optional<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunOptions {
  std::string config_path;
  std::string workload;
  std::string thresholds_file;
  std::string epsilon;
  std::string rho;
  std::string trunc;
  std::string mechanisms;
  std::string trials;
  std::string delta;
  std::string seed;
  std::string isotonic;
  std::string bucket_width;
  std::string domain_top;
  std::string data_path;
  bool synthetic = false;
  std::size_t n = 40000;
  std::uint64_t synthetic_seed = 1;
  std::string out_dir = "results";
};

struct DataSpec {
  std::string source;  // "csv" or "synthetic"
  std::string path;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

// Writes one file per mechanism plus the manifest; removes everything it
// wrote if any step fails.
int WriteOutputs(const RunOptions& opt, const dpsum_report* report,
                 const Json& config_json, const Json& data_json,
                 double seconds) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) {
    return Complain(kExitRuntime,
                    "cannot create " + opt.out_dir + ": " + ec.message());
  }
  std::vector<fs::path> written;
  auto rollback = [&](const std::string& why) {
    for (const fs::path& p : written) {
      if (fs::is_regular_file(p, ec)) fs::remove(p, ec);
    }
    return Complain(kExitRuntime, why);
  };

  Json outputs = Json::array();
  const std::size_t mechs = dpsum_report_mechanism_count(report);
  for (std::size_t i = 0; i < mechs; ++i) {
    const std::string name = dpsum_report_mechanism_name(report, i);
    const fs::path file = fs::path(opt.out_dir) / (name + ".csv");
    written.push_back(file);
    if (dpsum_status s =
            dpsum_report_write_csv(report, i, file.string().c_str());
        s != DPSUM_OK) {
      return rollback(std::string("writing results: ") + dpsum_last_error());
    }
    int ok = 0, failed = 0;
    double theta = 0.0;
    std::size_t warnings = 0;
    dpsum_report_mechanism_info(report, i, &ok, &failed, &theta, &warnings);
    Json entry;
    entry["mechanism"] = name;
    entry["file"] = file.filename().string();
    entry["trials_ok"] = ok;
    entry["trials_failed"] = failed;
    entry["mean_threshold"] = std::isnan(theta) ? Json(nullptr) : Json(theta);
    entry["warnings"] = warnings;
    outputs.push_back(entry);
    if (warnings > 0) {
      std::cerr << "dpsum: " << name << ": " << warnings
                << " warning(s) during threshold selection\n";
    }
  }

  Json manifest;
  manifest["version"] = dpsum_version();
  manifest["seed"] = config_json.value("seed", Json(0));
  manifest["config"] = config_json;
  manifest["data"] = data_json;
  manifest["outputs"] = outputs;
  manifest["duration_seconds"] = seconds;
  const fs::path manifest_path = fs::path(opt.out_dir) / "manifest.json";
  written.push_back(manifest_path);
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << "\n";
  out.close();
  if (!out) return rollback("cannot write " + manifest_path.string());

  std::cout << "wrote " << mechs << " result file(s) and manifest.json to "
            << opt.out_dir << "\n";
  return kExitOk;
}

int Run(const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  dpsum_config* raw_cfg = nullptr;
  if (dpsum_config_create(&raw_cfg) != DPSUM_OK) {
    return Complain(kExitRuntime, dpsum_last_error());
  }
  ConfigPtr cfg(raw_cfg);

  std::optional<DataSpec> manifest_data;
  if (!opt.config_path.empty()) {
    auto text = ReadFile(opt.config_path);
    if (!text) return Complain(kExitConfig, "cannot read " + opt.config_path);
    if (dpsum_status s = dpsum_config_load_json(cfg.get(), text->c_str());
        s != DPSUM_OK) {
      return Complain(kExitConfig,
                      opt.config_path + ": " + dpsum_last_error());
    }
    // A run manifest also names its input data.
    const Json doc = Json::parse(*text, nullptr, false);
    if (doc.is_object() && doc.contains("data") && doc["data"].is_object()) {
      const Json& d = doc["data"];
      DataSpec spec;
      spec.source = d.value("source", std::string());
      spec.path = d.value("path", std::string());
      spec.n = d.value("n", std::size_t{0});
      spec.seed = d.value("seed", std::uint64_t{0});
      manifest_data = spec;
    }
  }

  const std::pair<const char*, const std::string*> overrides[] = {
      {"workload", &opt.workload},     {"bucket_width", &opt.bucket_width},
      {"domain_top", &opt.domain_top}, {"epsilon", &opt.epsilon},
      {"rho", &opt.rho},               {"trunc", &opt.trunc},
      {"mechanisms", &opt.mechanisms}, {"trials", &opt.trials},
      {"delta", &opt.delta},           {"seed", &opt.seed},
      {"isotonic", &opt.isotonic},
  };
  for (const auto& [key, value] : overrides) {
    if (value->empty()) continue;
    if (dpsum_config_set(cfg.get(), key, value->c_str()) != DPSUM_OK) {
      return Complain(kExitConfig, dpsum_last_error());
    }
  }
  if (!opt.thresholds_file.empty()) {
    auto text = ReadFile(opt.thresholds_file);
    if (!text) {
      return Complain(kExitConfig, "cannot read " + opt.thresholds_file);
    }
    for (char& c : *text) {
      if (c == '\n' || c == '\r') c = ',';
    }
    if (dpsum_config_set(cfg.get(), "thresholds", text->c_str()) != DPSUM_OK) {
      return Complain(kExitConfig,
                      opt.thresholds_file + ": " + dpsum_last_error());
    }
  }
  if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env) {
    if (dpsum_config_set(cfg.get(), "threads", env) != DPSUM_OK) {
      return Complain(kExitConfig,
                      std::string(kThreadsEnv) + ": " + dpsum_last_error());
    }
  }
  if (dpsum_status s = dpsum_config_validate(cfg.get()); s != DPSUM_OK) {
    return Complain(kExitConfig, std::string("config: ") + dpsum_last_error());
  }

  char* json_text = nullptr;
  if (dpsum_config_to_json(cfg.get(), &json_text) != DPSUM_OK) {
    return Complain(kExitRuntime, dpsum_last_error());
  }
  const Json config_json = Json::parse(json_text);
  dpsum_string_free(json_text);

  // Data source: flags first, then the manifest being replayed.
  DataSpec spec;
  if (!opt.data_path.empty()) {
    spec.source = "csv";
    spec.path = opt.data_path;
  } else if (opt.synthetic) {
    spec.source = "synthetic";
    spec.n = opt.n;
    spec.seed = opt.synthetic_seed;
  } else if (manifest_data) {
    spec = *manifest_data;
  } else {
    return Complain(kExitConfig, "no input data: pass --data or --synthetic");
  }

  dpsum_dataset* raw_data = nullptr;
  Json data_json;
  data_json["source"] = spec.source;
  if (spec.source == "csv") {
    if (dpsum_status s = dpsum_dataset_load_csv(spec.path.c_str(), &raw_data);
        s != DPSUM_OK) {
      return ComplainStatus(s, "data");
    }
    data_json["path"] =
        std::filesystem::absolute(spec.path).lexically_normal().string();
  } else if (spec.source == "synthetic") {
    const double top = config_json.value("domain_top", 8e5);
    if (dpsum_status s =
            dpsum_dataset_generate(spec.n, spec.seed, top, &raw_data);
        s != DPSUM_OK) {
      return ComplainStatus(s, "synthetic data");
    }
    data_json["n"] = spec.n;
    data_json["seed"] = spec.seed;
  } else {
    return Complain(kExitConfig, "data: unknown source \"" + spec.source + "\"");
  }
  DatasetPtr data(raw_data);
  data_json["rows"] = dpsum_dataset_size(data.get());
  std::cerr << "dpsum: " << dpsum_dataset_size(data.get()) << " records\n";

  dpsum_report* raw_report = nullptr;
  if (dpsum_status s =
          dpsum_experiment_run(cfg.get(), data.get(), &raw_report);
      s != DPSUM_OK) {
    return ComplainStatus(s, "run");
  }
  ReportPtr report(raw_report);
  if (std::size_t f = dpsum_report_failure_count(report.get()); f > 0) {
    std::cerr << "dpsum: " << f << " trial(s) failed and were skipped\n";
  }

  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return WriteOutputs(opt, report.get(), config_json, data_json, seconds);
}

int GenData(std::size_t n, std::uint64_t seed, double domain_top,
            const std::string& out) {
  dpsum_dataset* raw = nullptr;
  if (dpsum_status s = dpsum_dataset_generate(n, seed, domain_top, &raw);
      s != DPSUM_OK) {
    return Complain(kExitConfig, dpsum_last_error());
  }
  DatasetPtr data(raw);
  if (dpsum_dataset_write_csv(data.get(), out.c_str()) != DPSUM_OK) {
    return Complain(kExitRuntime, dpsum_last_error());
  }
  std::cout << "wrote " << dpsum_dataset_size(data.get()) << " rows to " << out
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private prefix-sum workloads"};
  app.set_version_flag("--version", dpsum_version());
  app.require_subcommand(1);

  RunOptions opt;
  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("--config", opt.config_path,
                  "JSON config or run manifest; flags override it");
  auto* workload = run->add_option("--workload", opt.workload, "Q1, Q2 or Q3");
  auto* tfile = run->add_option("--thresholds-file", opt.thresholds_file,
                                "Custom query thresholds, one per line");
  workload->excludes(tfile);
  run->add_option("--epsilon", opt.epsilon, "Total privacy budget");
  run->add_option("--rho", opt.rho, "Share of epsilon for threshold selection");
  run->add_option("--trunc", opt.trunc, "none, svt, recursive or fixed");
  run->add_option("--mechanisms", opt.mechanisms,
                  "Comma-separated: sqm,identity,workload,timm,tamm");
  run->add_option("--trials", opt.trials, "Number of trials");
  run->add_option("--delta", opt.delta, "Relative error floor");
  run->add_option("--seed", opt.seed, "Experiment seed");
  run->add_option("--isotonic", opt.isotonic, "on or off");
  run->add_option("--bucket-width", opt.bucket_width, "Vectorization bucket width");
  run->add_option("--domain-top", opt.domain_top, "Upper end of the domain");
  auto* data = run->add_option("--data", opt.data_path, "Single-column CSV");
  auto* synth = run->add_flag("--synthetic", opt.synthetic,
                              "Use generated heavy-tailed data");
  data->excludes(synth);
  run->add_option("--n", opt.n, "Synthetic record count")
      ->capture_default_str();
  run->add_option("--synthetic-seed", opt.synthetic_seed,
                  "Synthetic data seed")
      ->capture_default_str();
  run->add_option("--out-dir", opt.out_dir, "Output directory")
      ->capture_default_str();

  std::size_t gen_n = 0;
  std::uint64_t gen_seed = 1;
  double gen_top = 8e5;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic dataset");
  gen->add_option("--n", gen_n, "Record count")->required();
  gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen->add_option("--domain-top", gen_top, "Clip values to this maximum")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (run->parsed()) return Run(opt);
  return GenData(gen_n, gen_seed, gen_top, gen_out);
}
