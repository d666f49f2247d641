// tools/avvp_main.cpp

// Copyright 2026  The avvp-labelkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line driver for the pseudo-label pipeline.
//
//   avvp synth --data D --run R --seed S [--n-calib N --n-test N]
//   avvp calibrate-tau --data D/calib --run R
//   avvp plg --data D/train --run R [--tau X | --tau-file R/tau.json]
//   avvp train --data D/train --run R --seed S
//   avvp pld --data D/train --run R
//   avvp retrain --data D/train --run R --seed S
//   avvp eval --data D/test --run R [--checkpoint model_retrained.ckpt]
//   avvp label-quality --data D/train --run R
//   avvp validate --data D/train

#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "avvp/io.hpp"
#include "avvp/pipeline.hpp"

namespace {

using avvp::pipeline::RunConfig;

void add_paths(CLI::App* cmd, RunConfig& run, bool needs_run) {
  cmd->add_option("--data", run.data_dir, "dataset root (one sub-directory per video)")
      ->required();
  auto* opt = cmd->add_option("--run", run.run_dir, "run directory for checkpoints and reports");
  if (needs_run) opt->required();
}

void add_seed(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--seed", run.seed, "random seed")->required();
}

void add_plg(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--tau", run.plg.tau, "similarity threshold")->capture_default_str();
  cmd->add_option("--tau-file", run.tau_file, "read tau from a calibrate-tau output");
  cmd->add_option("--prompt-id", run.plg.prompt_id, "prompt template tag, recorded only")
      ->capture_default_str();
}

void add_pld(CLI::App* cmd, RunConfig& run) {
  cmd->add_option("--k", run.pld.k, "smallest losses averaged per category")
      ->capture_default_str();
  cmd->add_option("--alpha", run.pld.alpha, "threshold scale")->capture_default_str();
}

void add_train(CLI::App* cmd, RunConfig& run) {
  auto& t = run.train;
  cmd->add_option("--lambda", t.loss.lambda, "richness loss weight")->capture_default_str();
  cmd->add_option("--epsilon", t.smoothing_eps, "audio label smoothing")->capture_default_str();
  cmd->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size)->capture_default_str();
  cmd->add_option("--epochs", t.epochs)->capture_default_str();
  cmd->add_option("--d-model", t.d_model)->capture_default_str();
  cmd->add_option("--heads", t.heads)->capture_default_str();
}

void add_scenario(CLI::App* cmd, RunConfig& run) {
  auto& s = run.scenario;
  cmd->add_option("--n-videos", s.n_videos, "training videos")->capture_default_str();
  cmd->add_option("--n-calib", run.n_calib, "calibration videos")->capture_default_str();
  cmd->add_option("--n-test", run.n_test, "held-out test videos")->capture_default_str();
  cmd->add_option("--segments", s.T)->capture_default_str();
  cmd->add_option("--classes", s.C)->capture_default_str();
  cmd->add_option("--max-events", s.max_events_per_modality)->capture_default_str();
  cmd->add_option("--min-span", s.min_span)->capture_default_str();
  cmd->add_option("--max-span", s.max_span)->capture_default_str();
  cmd->add_option("--shared-prob", s.shared_event_prob)->capture_default_str();
  cmd->add_option("--signal", s.signal, "similarity logit gap")->capture_default_str();
  cmd->add_option("--noise", s.noise_sigma, "similarity logit noise")->capture_default_str();
  cmd->add_option("--feature-dim", s.feature_dim)->capture_default_str();
  cmd->add_option("--feature-noise", s.feature_noise)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  namespace pl = avvp::pipeline;
  CLI::App app{"Pseudo-label generation, denoising and training for audio-visual video parsing"};
  app.set_version_flag("--version", AVVP_VERSION);
  app.require_subcommand(1);

  RunConfig run;
  std::function<int(const RunConfig&, std::ostream&)> action;
  auto sub = [&](const char* name, const char* help, auto fn) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->callback([&action, fn] { action = fn; });
    return cmd;
  };

  auto* synth = sub("synth", "generate a seeded synthetic dataset", pl::cmd_synth);
  add_paths(synth, run, true);
  add_seed(synth, run);
  add_scenario(synth, run);

  auto* calib = sub("calibrate-tau", "choose tau against visual truth", pl::cmd_calibrate_tau);
  add_paths(calib, run, true);

  auto* plg = sub("plg", "generate pseudo labels from similarities", pl::cmd_plg);
  add_paths(plg, run, true);
  add_plg(plg, run);

  auto* train = sub("train", "train the parser on plg.csv", pl::cmd_train);
  add_paths(train, run, true);
  add_seed(train, run);
  add_train(train, run);

  auto* pld = sub("pld", "denoise plg.csv with the trained parser", pl::cmd_pld);
  add_paths(pld, run, true);
  add_pld(pld, run);

  auto* retrain = sub("retrain", "train a fresh parser on pld.csv", pl::cmd_retrain);
  add_paths(retrain, run, true);
  add_seed(retrain, run);
  add_train(retrain, run);

  auto* eval = sub("eval", "score a checkpoint against gt_audio/gt_visual", pl::cmd_eval);
  add_paths(eval, run, true);
  eval->add_option("--checkpoint", run.checkpoint, "checkpoint file in the run directory")
      ->capture_default_str();
  eval->add_option("--threshold", run.threshold, "binarization threshold")
      ->capture_default_str();
  eval->add_option("--miou", run.miou_threshold, "event IoU threshold")->capture_default_str();

  auto* quality = sub("label-quality", "score plg.csv and pld.csv against gt_visual",
                      pl::cmd_label_quality);
  add_paths(quality, run, true);

  auto* validate = sub("validate", "check every file of every video", pl::cmd_validate);
  add_paths(validate, run, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!run.run_dir.empty()) std::filesystem::create_directories(run.run_dir);
    return action(run, std::cout);
  } catch (const avvp::ViolationError& e) {
    std::cerr << "avvp: " << e.what() << "\n";
    for (const auto& v : e.violations())
      std::cerr << "  [" << avvp::violation_kind_name(v.kind) << "] " << v.message << "\n";
    return pl::kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << "avvp: " << e.what() << "\n";
    return pl::kExitError;
  }
}
