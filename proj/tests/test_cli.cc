/*
 * Copyright 2026 The tempeq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "tempeq/trainer.h"
#include "test_util.h"

namespace tempeq {
namespace {

namespace fs = std::filesystem;

struct Result {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Result run_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + " " + std::string(TEMPEQ_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.output += buf;
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    config_ = dir_.path() / "tiny.json";
    out_ = dir_.path() / "out";
    std::ofstream(config_) << R"({
  "output_dir": ")" << out_.string() << R"(",
  "arms": ["vicreg_only", "tc"],
  "generator": {"n_patients": 40, "obs_dim": 12, "identity_dim": 3,
                "progression_rate_range": [0.03, 0.12]},
  "model": {"encoder_hidden": [16], "rep_dim": 8, "proj_hidden": 16, "pred_hidden": 8},
  "trainer": {"epochs": 3, "batch_size": 8, "warmup_epochs": 1},
  "probe": {"epochs": 3}
})";
  }
  std::string base() const { return "--config " + config_.string(); }

  testing::TempDir dir_{"cli"};
  fs::path config_;
  fs::path out_;
};

TEST_F(Cli, GenDataThenPretrainSmoke) {
  auto r = run_cli("gen-data " + base());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(fs::exists(out_ / "data" / "manifest.json"));
  EXPECT_TRUE(fs::exists(out_ / "data" / "visits.jsonl"));
  EXPECT_TRUE(fs::exists(out_ / "data" / "splits.json"));
  r = run_cli("pretrain --arm vicreg_only --set trainer.epochs=1 " + base());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const fs::path run = out_ / "runs" / "vicreg_only";
  EXPECT_TRUE(fs::exists(run / "checkpoint.json"));
  EXPECT_TRUE(fs::exists(run / "tensors.bin"));
  EXPECT_TRUE(fs::exists(run / "train_log.csv"));
  EXPECT_EQ(load_checkpoint(run).arm, Arm::kVicregOnly);
  EXPECT_FALSE(fs::exists(out_ / "runs" / "tc"));
}

TEST_F(Cli, FullPipelineWritesEveryArtifact) {
  auto r = run_cli("run-all " + base());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const char* f : {"metrics.json", "report.csv", "report.txt", "runs/tc/embeddings.csv",
                        "diagnostics/tc/diagnostics.json", "diagnostics/tc/distance_table.csv"})
    EXPECT_TRUE(fs::exists(out_ / f)) << f;
  const std::string csv = testing::slurp(out_ / "report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "arm,window,auroc_mean,auroc_std,prauc_mean,prauc_std,bacc_mean,bacc_std");
  // vicreg_only, tc and tc_syn, two windows each.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(csv.find("\ntc_syn,6,"), std::string::npos);
  EXPECT_NE(r.output.find("tc_syn"), std::string::npos);

  r = run_cli("report " + base());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  r = run_cli("diagnose --arm vicreg_only " + base());
  EXPECT_EQ(r.exit_code, 2) << r.output;
  r = run_cli("tc-syn --arm tc_no_dm " + base());
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST_F(Cli, GradCheckPasses) {
  const auto r = run_cli("grad-check " + base());
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("total_tc "), std::string::npos) << r.output;
  EXPECT_TRUE(fs::exists(out_ / "grad_check.json"));
}

TEST_F(Cli, GradCheckFailsWithImpossibleTolerance) {
  const auto r = run_cli("grad-check --set grad_check.tol=1e-300 " + base());
  EXPECT_EQ(r.exit_code, 3) << r.output;
}

TEST_F(Cli, InvalidConfigExitsTwoWithFieldName) {
  auto r = run_cli("gen-data --set trainer.epochs=0 " + base());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("trainer.epochs"), std::string::npos) << r.output;
  r = run_cli("gen-data --set trainer.epoch=3 " + base());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("unknown config key 'trainer.epoch'"), std::string::npos) << r.output;
  r = run_cli("gen-data --config " + (dir_.path() / "absent.json").string());
  EXPECT_EQ(r.exit_code, 2) << r.output;
  r = run_cli("pretrain --arm bogus " + base());
  EXPECT_EQ(r.exit_code, 2) << r.output;
  r = run_cli("no-such-command");
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST_F(Cli, MissingInputsNameThePath) {
  const auto r = run_cli("pretrain --arm tc " + base());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.output.find((out_ / "data").string()), std::string::npos) << r.output;
}

TEST_F(Cli, BadThreadCap) {
  auto r = run_cli("gen-data " + base(), "TEMPEQ_THREADS=0");
  EXPECT_EQ(r.exit_code, 2) << r.output;
  r = run_cli("gen-data " + base(), "TEMPEQ_THREADS=2");
  EXPECT_EQ(r.exit_code, 0) << r.output;
}

}  // namespace
}  // namespace tempeq
