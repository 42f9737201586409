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

// tempeq <command> --config <path> [--set key=value]... [--arm name]
//
// Exit codes: 0 ok, 2 configuration error, 3 runtime or numerical error
// (including a failed gradient audit).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tempeq/error.h"
#include "tempeq/kernels.h"
#include "tempeq/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void apply_thread_cap() {
  const char* env = std::getenv("TEMPEQ_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw tempeq::ConfigError("TEMPEQ_THREADS must be a positive integer");
  tempeq::kernels::set_thread_cap(static_cast<int>(n));
}

void print_report(const tempeq::ExperimentConfig& cfg) {
  std::ifstream in(std::filesystem::path(cfg.output_dir) / "report.txt");
  std::cout << in.rdbuf();
}

int run(const std::string& command, const tempeq::ExperimentConfig& cfg,
        std::optional<tempeq::Arm> arm) {
  namespace p = tempeq::pipeline;
  if (command == "gen-data") {
    p::gen_data(cfg);
    std::cout << "dataset written to " << p::data_dir(cfg).string() << "\n";
  } else if (command == "pretrain") {
    for (tempeq::Arm a : p::selected_arms(cfg, arm)) {
      p::pretrain(cfg, {a});
      std::cout << "pretrained " << tempeq::arm_name(a) << " -> " << p::run_dir(cfg, a).string()
                << "\n";
    }
  } else if (command == "probe") {
    p::probe(cfg, p::selected_arms(cfg, arm));
    std::cout << "metrics written to " << p::metrics_path(cfg).string() << "\n";
  } else if (command == "tc-syn") {
    p::tc_syn(cfg, arm.value_or(tempeq::Arm::kTc));
    std::cout << "tc_syn metrics added to " << p::metrics_path(cfg).string() << "\n";
  } else if (command == "diagnose") {
    const auto a = arm.value_or(tempeq::Arm::kTc);
    const auto diag = p::diagnose(cfg, a);
    std::printf("mean dm norm %.6g, distance rank correlation %.4f, composition gap %.6g\n",
                diag.collapse.mean_dm_norm, diag.distance_rank_correlation,
                diag.composition_gap);
  } else if (command == "grad-check") {
    bool ok = true;
    for (const auto& e : p::grad_check(cfg)) {
      std::printf("%-22s %s max_rel_err=%.3e (%zu entries, worst %s)\n", e.name.c_str(),
                  e.audit.pass ? "PASS" : "FAIL", e.audit.max_rel_err, e.audit.checked,
                  e.audit.worst_location.c_str());
      ok = ok && e.audit.pass;
    }
    return ok ? kExitOk : kExitRuntime;
  } else if (command == "report") {
    p::report(cfg);
    print_report(cfg);
  } else if (command == "run-all") {
    p::run_all(cfg);
    print_report(cfg);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-equivariant contrastive pretraining on a synthetic cohort"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string arm_text;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Generate the synthetic cohort"},
      {"pretrain", "Pretrain every configured arm (or --arm)"},
      {"probe", "Linear-probe evaluation of pretrained encoders"},
      {"tc-syn", "Probe the propagate-and-average representations"},
      {"diagnose", "Displacement-map collapse and distance diagnostics"},
      {"grad-check", "Finite-difference audit of every loss"},
      {"report", "Consolidated results table"},
      {"run-all", "gen-data, pretrain, probe, tc-syn, diagnose, report"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Experiment config (JSON)");
    sub->add_option("--set", overrides, "Override one field, e.g. trainer.epochs=1");
    sub->add_option("--arm", arm_text, "tc, tc_no_dm, tc_no_reg or vicreg_only");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    apply_thread_cap();
    std::optional<tempeq::Arm> arm;
    if (!arm_text.empty()) arm = tempeq::parse_arm(arm_text);
    const auto cfg = tempeq::load_experiment_config(config_path, overrides);
    return run(command, cfg, arm);
  } catch (const tempeq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
