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


// End-to-end tests of the dpsum command-line tool.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using ::testing::ElementsAre;
using ::testing::StartsWith;

int Cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " DPSUM_CLI_PATH " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> Lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Listing(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dpsum_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

// Q2 on 100 buckets keeps these runs fast.
const char kSmall[] =
    "run --workload Q2 --bucket-width 8000 --trials 20 --epsilon 0.1 ";

TEST_F(CliTest, Q3RunWritesTenRowsPerMechanism) {
  ASSERT_EQ(Cli("run --workload Q3 --epsilon 0.01 --trials 100 --trunc svt "
                "--seed 7 --synthetic --out-dir " + P("out")),
            0);
  EXPECT_THAT(Listing(dir_ / "out"),
              ElementsAre("identity.csv", "manifest.json", "sqm.csv",
                          "tamm.csv", "timm.csv", "workload.csv"));
  for (const char* m : {"sqm", "identity", "workload", "timm", "tamm"}) {
    const auto lines = Lines(dir_ / "out" / (std::string(m) + ".csv"));
    ASSERT_EQ(lines.size(), 11u) << m;
    EXPECT_EQ(lines[0],
              "query_threshold,true_answer,mean_answer,mean_rel_err,"
              "p5_rel_err,p95_rel_err");
    EXPECT_THAT(lines[1], StartsWith("80000.0000,"));
    EXPECT_THAT(lines[10], StartsWith("800000.000,"));
  }
  const auto manifest =
      nlohmann::json::parse(Slurp(dir_ / "out" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 7);
  EXPECT_EQ(manifest["config"]["workload"], "Q3");
  EXPECT_EQ(manifest["data"]["rows"], 40000);
  EXPECT_EQ(manifest["outputs"].size(), 5u);
  EXPECT_TRUE(manifest.contains("version"));
  EXPECT_TRUE(manifest.contains("duration_seconds"));
}

TEST_F(CliTest, MechanismSubsetWritesExactlyThoseFiles) {
  ASSERT_EQ(Cli(std::string(kSmall) +
                "--mechanisms identity,tamm --trunc none --synthetic --n 2000 "
                "--out-dir " + P("out")),
            0);
  EXPECT_THAT(Listing(dir_ / "out"),
              ElementsAre("identity.csv", "manifest.json", "tamm.csv"));
}

TEST_F(CliTest, RerunsAndManifestReplayAreByteIdentical) {
  ASSERT_EQ(Cli("gen-data --n 3000 --seed 4 --out " + P("d.csv")), 0);
  const std::string base = std::string(kSmall) + "--trunc recursive --seed 3 " +
                           "--data " + P("d.csv") + " --out-dir ";
  ASSERT_EQ(Cli(base + P("a")), 0);
  ASSERT_EQ(Cli(base + P("b"), "DP_SUMQUERY_THREADS=3"), 0);
  ASSERT_EQ(Cli("run --config " + P("a/manifest.json") + " --out-dir " + P("c")),
            0);
  for (const char* m : {"sqm", "identity", "workload", "timm", "tamm"}) {
    const std::string f = std::string(m) + ".csv";
    const std::string a = Slurp(dir_ / "a" / f);
    ASSERT_FALSE(a.empty());
    EXPECT_EQ(a, Slurp(dir_ / "b" / f)) << m;
    EXPECT_EQ(a, Slurp(dir_ / "c" / f)) << m;
  }
  // Synthetic inputs replay from the manifest alone.
  ASSERT_EQ(Cli(std::string(kSmall) + "--synthetic --n 1500 --synthetic-seed 8 "
                "--mechanisms tamm --out-dir " + P("s1")),
            0);
  ASSERT_EQ(Cli("run --config " + P("s1/manifest.json") + " --out-dir " + P("s2")),
            0);
  EXPECT_EQ(Slurp(dir_ / "s1" / "tamm.csv"), Slurp(dir_ / "s2" / "tamm.csv"));
}

TEST_F(CliTest, ConfigFileWithFlagOverrides) {
  std::ofstream(P("cfg.json"))
      << R"({"workload": "Q2", "bucket_width": 8000, "trials": 5,
             "mechanisms": ["identity", "timm"], "trunc": "none"})";
  ASSERT_EQ(Cli("run --config " + P("cfg.json") +
                " --mechanisms timm --synthetic --n 1000 --out-dir " + P("o")),
            0);
  EXPECT_THAT(Listing(dir_ / "o"), ElementsAre("manifest.json", "timm.csv"));
  EXPECT_EQ(Lines(dir_ / "o" / "timm.csv").size(), 101u);
}

TEST_F(CliTest, ThresholdsFile) {
  std::ofstream(P("t.txt")) << "8000\n16000\n400000\n";
  ASSERT_EQ(Cli("run --thresholds-file " + P("t.txt") +
                " --bucket-width 8000 --trials 5 --mechanisms tamm "
                "--synthetic --n 1000 --out-dir " + P("o")),
            0);
  EXPECT_EQ(Lines(dir_ / "o" / "tamm.csv").size(), 4u);
  std::ofstream(P("bad.txt")) << "8000\n12000\n";
  EXPECT_EQ(Cli("run --thresholds-file " + P("bad.txt") +
                " --bucket-width 8000 --synthetic --n 100 --out-dir " + P("x")),
            2);
}

TEST_F(CliTest, GenData) {
  ASSERT_EQ(Cli("gen-data --n 40000 --seed 1 --out " + P("d.csv")), 0);
  ASSERT_EQ(Cli("gen-data --n 40000 --seed 1 --out " + P("e.csv")), 0);
  const auto lines = Lines(dir_ / "d.csv");
  ASSERT_EQ(lines.size(), 40001u);
  EXPECT_EQ(lines[0], "value");
  EXPECT_EQ(Slurp(dir_ / "d.csv"), Slurp(dir_ / "e.csv"));
  EXPECT_NE(Cli("gen-data --n 0 --seed 1 --out " + P("z.csv")), 0);
  EXPECT_FALSE(fs::exists(dir_ / "z.csv"));
  EXPECT_EQ(Cli("gen-data --n 10 --out " + P("nodir/z.csv")), 4);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  const std::string tail = " --synthetic --n 100 --out-dir " + P("o");
  EXPECT_EQ(Cli("run --epsilon -1" + tail), 2);
  EXPECT_EQ(Cli("run --epsilon abc" + tail), 2);
  EXPECT_EQ(Cli("run --trunc median" + tail), 2);
  EXPECT_EQ(Cli("run --mechanisms identity,foo" + tail), 2);
  EXPECT_EQ(Cli("run --trunc svt --rho 0" + tail), 2);
  EXPECT_EQ(Cli("run --bucket-width 700 --domain-top 700000" + tail), 2);
  EXPECT_EQ(Cli("run --bogus-flag" + tail), 2);
  EXPECT_EQ(Cli("run --out-dir " + P("o")), 2);
  EXPECT_EQ(Cli("run --config " + P("missing.json") + tail), 2);
  EXPECT_EQ(Cli("run --data x.csv --synthetic --out-dir " + P("o")), 2);
  EXPECT_EQ(Cli("run --workload Q3 --thresholds-file t" + tail), 2);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, DataErrorsExitThree) {
  const auto run = [&](const std::string& data) {
    return Cli(std::string(kSmall) + "--data " + P(data) + " --out-dir " + P("o"));
  };
  EXPECT_EQ(run("missing.csv"), 3);
  std::ofstream(P("neg.csv")) << "10\n-5\n";
  EXPECT_EQ(run("neg.csv"), 3);
  std::ofstream(P("text.csv")) << "value\n10\nabc\n";
  EXPECT_EQ(run("text.csv"), 3);
  std::ofstream(P("big.csv")) << "10\n900000\n";
  EXPECT_EQ(run("big.csv"), 3);
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, WriteFailureRemovesPartialOutputs) {
  fs::create_directories(dir_ / "o" / "tamm.csv");
  EXPECT_EQ(Cli(std::string(kSmall) + "--mechanisms identity,tamm --synthetic "
                "--n 500 --out-dir " + P("o")),
            4);
  EXPECT_THAT(Listing(dir_ / "o"), ElementsAre("tamm.csv"));
  std::ofstream(P("file")) << "x";
  EXPECT_EQ(Cli(std::string(kSmall) + "--synthetic --n 500 --out-dir " +
                P("file/sub")),
            4);
}

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(Cli("--help"), 0);
  EXPECT_EQ(Cli("run --help"), 0);
  EXPECT_EQ(Cli("--version"), 0);
  EXPECT_EQ(Cli(""), 2);
}

}  // namespace
