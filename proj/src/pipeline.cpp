// src/pipeline.cpp

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

#include "avvp/pipeline.hpp"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "avvp/io.hpp"
#include "avvp/metrics.hpp"

namespace avvp::pipeline {

using nlohmann::json;

namespace {

std::uint64_t require_seed(const RunConfig& run, const char* stage) {
  if (!run.seed)
    throw std::invalid_argument(std::string(stage) + ": --seed is required");
  return *run.seed;
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw io::FileError("missing input: " + p.string());
}

json hyperparameters(const RunConfig& run, double tau) {
  return {{"lambda", run.train.loss.lambda},
          {"tau", tau},
          {"k", run.pld.k},
          {"alpha", run.pld.alpha},
          {"epsilon", run.train.smoothing_eps}};
}

json train_config_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
          {"epochs", t.epochs},               {"beta1", t.beta1},
          {"beta2", t.beta2},                 {"adam_eps", t.adam_eps},
          {"d_model", t.d_model},             {"heads", t.heads},
          {"smoothing_eps", t.smoothing_eps}, {"lambda", t.loss.lambda},
          {"clamp_eps", t.loss.clamp_eps}};
}

json scenario_json(const ScenarioConfig& s) {
  return {{"n_videos", s.n_videos},
          {"T", s.T},
          {"C", s.C},
          {"max_events_per_modality", s.max_events_per_modality},
          {"min_span", s.min_span},
          {"max_span", s.max_span},
          {"shared_event_prob", s.shared_event_prob},
          {"signal", s.signal},
          {"noise_sigma", s.noise_sigma},
          {"feature_dim", s.feature_dim},
          {"feature_noise", s.feature_noise},
          {"seed", s.seed}};
}

// Input digests keyed by a location-independent name.
class Digests {
 public:
  Digests(const RunConfig& run) : run_(run) {}

  void add(const fs::path& p) {
    std::string key;
    if (auto rel = relative_to(p, run_.data_dir)) key = "data/" + *rel;
    else if (auto rel2 = relative_to(p, run_.run_dir)) key = "run/" + *rel2;
    else key = p.generic_string();
    map_[key] = io::sha256_file(p);
  }
  json to_json() const { return json(map_); }

 private:
  static std::optional<std::string> relative_to(const fs::path& p, const fs::path& base) {
    if (base.empty()) return std::nullopt;
    const fs::path rel = fs::weakly_canonical(p).lexically_relative(fs::weakly_canonical(base));
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    return rel.generic_string();
  }

  const RunConfig& run_;
  std::map<std::string, std::string> map_;
};

void record_stage(const RunConfig& run, const std::string& stage, json config,
                  const Digests& inputs, std::vector<std::string> outputs) {
  const fs::path path = run.run_dir / kRunFile;
  json doc;
  if (fs::exists(path)) {
    try {
      doc = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw io::FileError(path.string() + ": invalid JSON: " + e.what());
    }
  }
  doc["schema_version"] = io::kSchemaVersion;
  doc["toolkit_version"] = AVVP_VERSION;
  json rec;
  rec["config"] = std::move(config);
  rec["seed"] = run.seed ? json(*run.seed) : json(nullptr);
  rec["inputs"] = inputs.to_json();
  rec["outputs"] = std::move(outputs);
  doc["stages"][stage] = std::move(rec);
  io::write_file_atomic(path, doc.dump(2) + "\n");
}

void write_json(const fs::path& path, const json& j) {
  io::write_file_atomic(path, j.dump(2) + "\n");
}

void throw_violations(const std::string& where, std::vector<Violation> v) {
  std::ostringstream os;
  os << where << ": " << v.size() << " invariant violation(s)";
  throw ViolationError(os.str(), std::move(v));
}

PseudoLabelMatrix load_checked_labels(const io::VideoEntry& v, LabelStage stage) {
  const fs::path p = v.dir / (stage == LabelStage::kPlg ? io::kPlgFile : io::kPldFile);
  require_file(p);
  PseudoLabelMatrix pseudo = io::read_pseudo_labels(v, stage);
  auto violations = validate(v.manifest.label_set(), pseudo);
  if (!violations.empty()) throw_violations(p.string(), std::move(violations));
  return pseudo;
}

SimilarityMatrix load_similarity(const RunConfig& run, const io::VideoEntry& v,
                                 Digests& digests) {
  const fs::path sim_path = v.dir / io::kSimilarityFile;
  const LabelSet labels = v.manifest.label_set();
  if (fs::exists(sim_path)) {
    digests.add(sim_path);
    Matrix raw = io::read_scores_csv(sim_path, v.manifest.categories);
    auto violations = validate(labels, raw);
    if (!violations.empty()) throw_violations(sim_path.string(), std::move(violations));
    return SimilarityMatrix(std::move(raw));
  }
  const fs::path img = v.dir / io::kImageFeatureFile;
  const fs::path txt = run.data_dir / io::kTextFeatureFile;
  if (!fs::exists(img))
    throw io::FileError("missing input: " + sim_path.string() + " (or " + img.string() +
                        " with " + txt.string() + ")");
  require_file(txt);
  digests.add(img);
  digests.add(txt);
  FeaturePair fp{io::read_matrix_csv(img), io::read_matrix_csv(txt)};
  if (fp.text_features.rows() != labels.num_classes() ||
      fp.image_features.rows() != labels.num_segments())
    throw io::FileError(v.dir.string() + ": feature files do not match the manifest shape");
  return similarity_from_features(fp);
}

std::vector<TrainingExample> load_training_set(const RunConfig& run, LabelStage stage,
                                               Digests& digests, std::ostream& log) {
  std::vector<TrainingExample> out;
  int skipped = 0;
  for (const auto& v : io::list_videos(run.data_dir)) {
    const LabelSet labels = v.manifest.label_set();
    if (labels.num_positive() == 0) {
      ++skipped;
      continue;
    }
    digests.add(v.dir / io::kManifestFile);
    digests.add(v.dir / io::kAudioFile);
    digests.add(v.dir / io::kVisualFile);
    PseudoLabelMatrix pseudo = load_checked_labels(v, stage);
    digests.add(v.dir / (stage == LabelStage::kPlg ? io::kPlgFile : io::kPldFile));
    out.push_back({io::read_features(v), labels, std::move(pseudo)});
  }
  if (skipped) log << "skipped " << skipped << " video(s) with an empty video label\n";
  if (out.empty()) throw std::invalid_argument("no trainable videos under " + run.data_dir.string());
  return out;
}

io::Checkpoint load_model(const RunConfig& run, const std::string& name,
                          const std::vector<std::string>& categories, Digests& digests) {
  const fs::path path = run.run_dir / name;
  if (!fs::exists(path)) throw io::FileError("missing checkpoint: " + path.string());
  digests.add(path);
  io::Checkpoint ck = io::load_checkpoint(path);
  if (ck.categories != categories)
    throw io::FileError(path.string() + ": checkpoint categories differ from the dataset");
  return ck;
}

int run_training(const RunConfig& run, LabelStage stage, const char* stage_name,
                 const char* checkpoint, const char* log_file, std::ostream& log) {
  TrainConfig cfg = run.train;
  cfg.seed = require_seed(run, stage_name);
  Digests digests(run);
  const auto data = load_training_set(run, stage, digests, log);
  log << stage_name << ": " << data.size() << " videos, " << cfg.epochs << " epochs\n";
  const TrainResult res = train(data, cfg, [&](int epoch, double loss) {
    log << "  epoch " << epoch << " loss " << loss << "\n";
  });
  io::save_checkpoint(run.run_dir / checkpoint, res.params, data.front().labels.categories());
  std::string csv = "epoch,loss_total\n";
  for (std::size_t e = 0; e < res.epoch_loss.size(); ++e)
    csv += std::to_string(e) + "," + io::format_double(res.epoch_loss[e]) + "\n";
  io::write_file_atomic(run.run_dir / log_file, csv);
  json config = {{"train", train_config_json(cfg)},
                 {"hyperparameters", hyperparameters(run, run.plg.tau)},
                 {"labels", stage == LabelStage::kPlg ? "plg" : "pld"}};
  record_stage(run, stage_name, std::move(config), digests, {checkpoint, log_file});
  return 0;
}

void write_video(const fs::path& dir, const SyntheticVideo& v,
                 const std::vector<std::string>& categories) {
  io::Manifest m;
  m.video_id = v.id;
  m.T = v.labels.num_segments();
  m.categories = categories;
  m.video_label.assign(v.labels.video_label().data(),
                       v.labels.video_label().data() + v.labels.video_label().size());
  io::write_file_atomic(dir / io::kManifestFile, io::format_manifest(m));
  io::write_file_atomic(dir / io::kAudioFile, io::format_matrix_csv(v.features.audio));
  io::write_file_atomic(dir / io::kVisualFile, io::format_matrix_csv(v.features.visual));
  io::write_file_atomic(dir / io::kSimilarityFile,
                        io::format_scores_csv(v.similarity.values(), categories));
  io::write_file_atomic(dir / io::kGtAudioFile, io::format_label_csv(v.gt_audio, categories));
  io::write_file_atomic(dir / io::kGtVisualFile, io::format_label_csv(v.gt_visual, categories));
}

}  // namespace

int cmd_synth(const RunConfig& run, std::ostream& log) {
  ScenarioConfig cfg = run.scenario;
  cfg.seed = require_seed(run, "synth");
  struct Split {
    const char* name;
    int first, count;
  };
  const Split splits[] = {{"train", 0, cfg.n_videos},
                          {"calib", cfg.n_videos, run.n_calib},
                          {"test", cfg.n_videos + run.n_calib, run.n_test}};
  std::vector<std::string> outputs;
  for (const Split& s : splits) {
    if (s.count <= 0) continue;
    ScenarioConfig part = cfg;
    part.first_video = s.first;
    part.n_videos = s.count;
    const Scenario sc = generate_scenario(part);
    for (const auto& v : sc.videos) write_video(run.data_dir / s.name / v.id, v, sc.categories);
    outputs.push_back(s.name);
    log << "synth: wrote " << s.count << " videos to " << (run.data_dir / s.name).string() << "\n";
  }
  json scenario = scenario_json(cfg);
  scenario["n_calib"] = run.n_calib;
  scenario["n_test"] = run.n_test;
  write_json(run.data_dir / "scenario.json",
             {{"schema_version", io::kSchemaVersion}, {"scenario", scenario}});
  record_stage(run, "synth", {{"scenario", scenario}}, Digests(run), outputs);
  return 0;
}

int cmd_calibrate_tau(const RunConfig& run, std::ostream& log) {
  Digests digests(run);
  std::vector<SimilarityMatrix> sims;
  std::vector<LabelSet> labels;
  std::vector<BinaryMatrix> gts;
  for (const auto& v : io::list_videos(run.data_dir)) {
    const fs::path gt = v.dir / io::kGtVisualFile;
    require_file(gt);
    digests.add(v.dir / io::kManifestFile);
    digests.add(gt);
    sims.push_back(load_similarity(run, v, digests));
    labels.push_back(v.manifest.label_set());
    gts.push_back(io::read_label_csv(gt, v.manifest.categories));
  }
  const double tau = calibrate_tau(sims, labels, gts);
  log << "calibrate-tau: tau = " << io::format_double(tau) << " over " << sims.size()
      << " videos\n";
  write_json(run.run_dir / kTauFile, {{"schema_version", io::kSchemaVersion},
                                      {"tau", tau},
                                      {"num_videos", sims.size()}});
  record_stage(run, "calibrate_tau", {{"tau", tau}}, digests, {kTauFile});
  return 0;
}

namespace {

double resolve_tau(const RunConfig& run, Digests& digests) {
  if (!run.tau_file) return run.plg.tau;
  require_file(*run.tau_file);
  digests.add(*run.tau_file);
  const json j = json::parse(io::read_file(*run.tau_file));
  return j.at("tau").get<double>();
}

}  // namespace

int cmd_plg(const RunConfig& run, std::ostream& log) {
  Digests digests(run);
  PlgConfig cfg = run.plg;
  cfg.tau = resolve_tau(run, digests);
  cfg.check();
  int n = 0;
  for (const auto& v : io::list_videos(run.data_dir)) {
    digests.add(v.dir / io::kManifestFile);
    const SimilarityMatrix sim = load_similarity(run, v, digests);
    const PseudoLabelMatrix pseudo = generate_pseudo_labels(sim, v.manifest.label_set(), cfg);
    io::write_file_atomic(v.dir / io::kPlgFile,
                          io::format_label_csv(pseudo.values(), v.manifest.categories));
    ++n;
  }
  log << "plg: wrote " << n << " pseudo label files (tau = " << io::format_double(cfg.tau)
      << ")\n";
  record_stage(run, "plg",
               {{"tau", cfg.tau},
                {"prompt_id", cfg.prompt_id},
                {"hyperparameters", hyperparameters(run, cfg.tau)}},
               digests, {"data/*/plg.csv"});
  return 0;
}

int cmd_train(const RunConfig& run, std::ostream& log) {
  return run_training(run, LabelStage::kPlg, "train", kPretrainCheckpoint, "train_log.csv",
                      log);
}

int cmd_retrain(const RunConfig& run, std::ostream& log) {
  return run_training(run, LabelStage::kPld, "retrain", kRetrainCheckpoint,
                      "retrain_log.csv", log);
}

int cmd_pld(const RunConfig& run, std::ostream& log) {
  run.pld.check();
  Digests digests(run);
  const auto videos = io::list_videos(run.data_dir);
  const io::Checkpoint ck =
      load_model(run, kPretrainCheckpoint, videos.front().manifest.categories, digests);
  int n = 0, flips = 0;
  for (const auto& v : videos) {
    digests.add(v.dir / io::kManifestFile);
    const PseudoLabelMatrix pseudo = load_checked_labels(v, LabelStage::kPlg);
    digests.add(v.dir / io::kPlgFile);
    digests.add(v.dir / io::kAudioFile);
    digests.add(v.dir / io::kVisualFile);
    const PredictionSet preds = han_forward(io::read_features(v), ck.params);
    const PseudoLabelMatrix denoised = denoise_with_predictions(preds.visual, pseudo, run.pld);
    flips += static_cast<int>((denoised.values() - pseudo.values()).cwiseAbs().sum());
    auto violations = validate(v.manifest.label_set(), denoised);
    if (!violations.empty()) throw_violations(v.id + " after denoising", std::move(violations));
    io::write_file_atomic(v.dir / io::kPldFile,
                          io::format_label_csv(denoised.values(), v.manifest.categories));
    ++n;
  }
  log << "pld: denoised " << n << " videos, " << flips << " entries flipped\n";
  record_stage(run, "pld",
               {{"k", run.pld.k},
                {"alpha", run.pld.alpha},
                {"clamp_eps", run.pld.clamp_eps},
                {"hyperparameters", hyperparameters(run, run.plg.tau)}},
               digests, {"data/*/pld.csv"});
  return 0;
}

namespace {

json counts_json(const Counts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

json level_json(const LevelScores& s) {
  return {{"A", s.f[0]},
          {"V", s.f[1]},
          {"AV", s.f[2]},
          {"Type@AV", s.type_at_av},
          {"Event@AV", s.event_at_av},
          {"counts",
           {{"A", counts_json(s.counts[0])},
            {"V", counts_json(s.counts[1])},
            {"AV", counts_json(s.counts[2])},
            {"Event@AV", counts_json(s.pooled)}}}};
}

json prf_json(const PrfScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f", s.f},
          {"tp", s.tp},               {"fp", s.fp},         {"fn", s.fn}};
}

}  // namespace

int cmd_eval(const RunConfig& run, std::ostream& log) {
  Digests digests(run);
  const auto videos = io::list_videos(run.data_dir);
  const io::Checkpoint ck =
      load_model(run, run.checkpoint, videos.front().manifest.categories, digests);
  std::vector<VideoDecisions> preds, gts;
  std::vector<std::string> ids;
  for (const auto& v : videos) {
    const fs::path ga = v.dir / io::kGtAudioFile, gv = v.dir / io::kGtVisualFile;
    require_file(ga);
    require_file(gv);
    for (const char* f : {io::kManifestFile, io::kAudioFile, io::kVisualFile})
      digests.add(v.dir / f);
    digests.add(ga);
    digests.add(gv);
    const BinaryPrediction b =
        binarize(han_forward(io::read_features(v), ck.params), run.threshold);
    preds.push_back({b.audio, b.visual, b.audio_visual});
    gts.push_back(ground_truth_decisions(io::read_label_csv(ga, v.manifest.categories),
                                         io::read_label_csv(gv, v.manifest.categories)));
    ids.push_back(v.id);
  }
  const MetricsReport r = report(preds, gts, run.miou_threshold);
  std::vector<std::string> zero_support;
  for (int i : r.zero_support_videos) zero_support.push_back(ids[static_cast<std::size_t>(i)]);
  const json doc = {{"schema_version", io::kSchemaVersion},
                    {"checkpoint", run.checkpoint},
                    {"num_videos", r.num_videos},
                    {"threshold", run.threshold},
                    {"miou_threshold", run.miou_threshold},
                    {"segment", level_json(r.segment)},
                    {"event", level_json(r.event)},
                    {"zero_support_videos", zero_support}};
  write_json(run.run_dir / kReportFile, doc);
  log << "eval: segment Type@AV " << r.segment.type_at_av << ", event Type@AV "
      << r.event.type_at_av << "\n";
  record_stage(run, "eval",
               {{"checkpoint", run.checkpoint},
                {"threshold", run.threshold},
                {"miou_threshold", run.miou_threshold}},
               digests, {kReportFile});
  return 0;
}

int cmd_label_quality(const RunConfig& run, std::ostream& log) {
  Digests digests(run);
  const auto videos = io::list_videos(run.data_dir);
  json doc = {{"schema_version", io::kSchemaVersion}};
  for (LabelStage stage : {LabelStage::kPlg, LabelStage::kPld}) {
    const char* file = stage == LabelStage::kPlg ? io::kPlgFile : io::kPldFile;
    if (!fs::exists(videos.front().dir / file)) continue;
    std::vector<PseudoLabelMatrix> labels;
    std::vector<BinaryMatrix> gts;
    for (const auto& v : videos) {
      const fs::path gv = v.dir / io::kGtVisualFile;
      require_file(gv);
      labels.push_back(load_checked_labels(v, stage));
      digests.add(v.dir / file);
      digests.add(gv);
      gts.push_back(io::read_label_csv(gv, v.manifest.categories));
    }
    const PseudoLabelQuality q = evaluate_pseudo_labels(labels, gts);
    doc[stage_name(stage)] = {{"segment", prf_json(q.segment)}, {"video", prf_json(q.video)}};
    log << stage_name(stage) << ": segment P/R/F " << q.segment.precision << " / "
        << q.segment.recall << " / " << q.segment.f << "\n";
  }
  write_json(run.run_dir / kLabelQualityFile, doc);
  record_stage(run, "label_quality", json::object(), digests, {kLabelQualityFile});
  return 0;
}

int cmd_validate(const RunConfig& run, std::ostream& log) {
  int bad = 0;
  for (const auto& v : io::list_videos(run.data_dir)) {
    const LabelSet labels = v.manifest.label_set();
    std::vector<std::string> problems;
    auto collect = [&](const std::string& file, const std::vector<Violation>& vs) {
      for (const auto& x : vs)
        problems.push_back(file + ": [" + violation_kind_name(x.kind) + "] " + x.message);
    };
    auto guarded = [&](const std::string& file, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        problems.push_back(file + ": " + e.what());
      }
    };
    if (fs::exists(v.dir / io::kSimilarityFile)) {
      guarded(io::kSimilarityFile, [&] {
        collect(io::kSimilarityFile,
                validate(labels, io::read_scores_csv(v.dir / io::kSimilarityFile,
                                                     v.manifest.categories)));
      });
    }
    for (LabelStage stage : {LabelStage::kPlg, LabelStage::kPld}) {
      const char* file = stage == LabelStage::kPlg ? io::kPlgFile : io::kPldFile;
      if (!fs::exists(v.dir / file)) continue;
      guarded(file, [&] { collect(file, validate(labels, io::read_pseudo_labels(v, stage))); });
    }
    for (const char* file : {io::kGtAudioFile, io::kGtVisualFile}) {
      if (!fs::exists(v.dir / file)) continue;
      guarded(file, [&] {
        const BinaryMatrix gt = io::read_label_csv(v.dir / file, v.manifest.categories);
        collect(file, validate(labels, PseudoLabelMatrix(gt, LabelStage::kPlg)));
      });
    }
    if (fs::exists(v.dir / io::kAudioFile) || fs::exists(v.dir / io::kVisualFile))
      guarded("features", [&] { io::read_features(v).check(); });
    for (const auto& p : problems) log << v.id << "/" << p << "\n";
    bad += !problems.empty();
  }
  if (bad) {
    log << "validate: " << bad << " video(s) with violations\n";
    return kExitViolation;
  }
  log << "validate: ok\n";
  return 0;
}

}  // namespace avvp::pipeline
