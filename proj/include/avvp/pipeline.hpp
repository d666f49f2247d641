// avvp/pipeline.hpp

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

#ifndef AVVP_PIPELINE_HPP_
#define AVVP_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "avvp/parser_net.hpp"
#include "avvp/plg.hpp"
#include "avvp/pld.hpp"
#include "avvp/synth.hpp"

namespace avvp::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kRunFile = "run.json";
inline constexpr const char* kTauFile = "tau.json";
inline constexpr const char* kPretrainCheckpoint = "model.ckpt";
inline constexpr const char* kRetrainCheckpoint = "model_retrained.ckpt";
inline constexpr const char* kReportFile = "report.json";
inline constexpr const char* kLabelQualityFile = "label_quality.json";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;      // missing or malformed inputs, bad config
inline constexpr int kExitViolation = 2;  // label/similarity invariant violations

/// Everything a stage may consult. Stages ignore the fields they do not use.
struct RunConfig {
  fs::path data_dir;
  fs::path run_dir;
  std::optional<std::uint64_t> seed;

  PlgConfig plg;
  std::optional<fs::path> tau_file;  // overrides plg.tau when set
  PldConfig pld;
  TrainConfig train;                 // also carries LossConfig and smoothing
  ScenarioConfig scenario;
  int n_calib = 0;
  int n_test = 0;

  double threshold = 0.5;            // binarization of predictions
  double miou_threshold = 0.5;
  std::string checkpoint = kRetrainCheckpoint;
};

/// synth: writes <data>/train, and <data>/calib, <data>/test when requested.
int cmd_synth(const RunConfig& run, std::ostream& log);
/// calibrate-tau: picks tau on a split with visual truth, writes <run>/tau.json.
int cmd_calibrate_tau(const RunConfig& run, std::ostream& log);
/// plg: writes plg.csv for every video.
int cmd_plg(const RunConfig& run, std::ostream& log);
/// train: fits the parser on plg.csv, writes <run>/model.ckpt.
int cmd_train(const RunConfig& run, std::ostream& log);
/// pld: denoises plg.csv with <run>/model.ckpt, writes pld.csv.
int cmd_pld(const RunConfig& run, std::ostream& log);
/// retrain: fits a fresh parser on pld.csv, writes <run>/model_retrained.ckpt.
int cmd_retrain(const RunConfig& run, std::ostream& log);
/// eval: scores <run>/<checkpoint> against the truth files, writes report.json.
int cmd_eval(const RunConfig& run, std::ostream& log);
/// label-quality: precision/recall/F of plg.csv and pld.csv against gt_visual.
int cmd_label_quality(const RunConfig& run, std::ostream& log);
/// validate: checks every file of every video; nonzero exit on violations.
int cmd_validate(const RunConfig& run, std::ostream& log);

}  // namespace avvp::pipeline

#endif  // AVVP_PIPELINE_HPP_
