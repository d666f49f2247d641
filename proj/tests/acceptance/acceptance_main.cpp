// tests/acceptance/acceptance_main.cpp

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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and seed counts are fixed here.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../support/brute_force_matcher.hpp"
#include "../support/fd_oracle.hpp"
#include "../support/fixtures.hpp"
#include "avvp/io.hpp"
#include "avvp/metrics.hpp"
#include "avvp/pipeline.hpp"
#include "avvp/plg.hpp"
#include "avvp/pld.hpp"
#include "avvp/synth.hpp"

namespace {

using namespace avvp;
namespace fs = std::filesystem;
namespace pl = avvp::pipeline;
using nlohmann::json;

constexpr double kGradTolerance = 1e-3;
constexpr double kGradBudgetSec = 30.0;
constexpr double kPldBudgetSec = 5.0;
constexpr double kE2eBudgetSecPerSeed = 120.0;
constexpr int kE2eSeeds = 10;
constexpr int kE2eMinWins = 8;
constexpr int kLambdaMinWins = 7;
constexpr double kExactTolerance = 1e-15;

struct Outcome {
  bool pass;
  std::string detail;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// --- gradients -------------------------------------------------------------

Outcome gradients() {
  const double t0 = cpu_seconds();
  Rng rng(2024);
  LossConfig cfg;
  cfg.lambda = 0.5;
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < 50; ++i) {
    ScenarioConfig sc;
    sc.n_videos = 1;
    sc.T = rng.uniform_int(2, 6);
    sc.C = rng.uniform_int(2, 5);
    sc.min_span = 1;
    sc.max_span = sc.T;
    sc.feature_dim = 8;
    sc.seed = static_cast<std::uint64_t>(i);
    const SyntheticVideo v = generate_scenario(sc).videos.front();
    PlgConfig plg;
    plg.tau = rng.uniform(0.05, 0.4);
    const LossTargets targets = make_loss_targets(
        v.labels, generate_pseudo_labels(v.similarity, v.labels, plg), 0.1);
    const ModelParams params =
        ModelParams::initialized({8, 8, 8, 2, sc.C}, static_cast<std::uint64_t>(1000 + i));
    const auto model = testing::check_model_gradients(v.features, params, targets, cfg);

    LossInputs in;
    in.segment_visual = testing::random_probs(rng, sc.T, sc.C);
    in.video_union = testing::random_probs(rng, sc.C, 1);
    in.video_audio = testing::random_probs(rng, sc.C, 1);
    in.video_visual = testing::random_probs(rng, sc.C, 1);
    const auto preds = testing::check_prediction_gradients(in, targets, cfg);

    for (const auto* r : {&model, &preds})
      if (r->max_rel_err > worst) {
        worst = r->max_rel_err;
        where = r->where;
      }
  }
  const double elapsed = cpu_seconds() - t0;
  return {worst <= kGradTolerance && elapsed < kGradBudgetSec,
          "50 instances, max rel err " + fmt(worst) + " at " + where + ", " + fmt(elapsed, 3) +
              " s"};
}

// --- richness constants ----------------------------------------------------

Outcome richness_constants() {
  auto exact = [](double got, double want) { return std::abs(got - want) <= kExactTolerance; };
  const BinaryMatrix three = testing::three_event_example();
  const Vector cr3 = category_richness(three.cast<double>(), testing::label_set_of(three));
  const Vector sr3 = segment_richness(three.cast<double>());
  const BinaryMatrix vac = testing::vacuum_speech_example();
  const Vector cr2 = category_richness(vac.cast<double>(), testing::label_set_of(vac));
  const Vector sr2 = segment_richness(vac.cast<double>());
  const bool ok = exact(cr3(0), 1.0) && exact(cr3(3), 1.0 / 3.0) && exact(sr3(0), 1.0) &&
                  exact(sr3(2), 1.0 / 4.0) && exact(cr2(3), 1.0) && exact(cr2(0), 1.0 / 2.0) &&
                  exact(sr2(0), 4.0 / 5.0) && exact(sr2(1), 1.0 / 5.0);
  std::ostringstream os;
  os << "three-event cr=(" << cr3(0) << ", " << cr3(3) << ") sr=(" << sr3(0) << ", " << sr3(2)
     << "); vacuum/speech cr=(" << cr2(3) << ", " << cr2(0) << ") sr=(" << sr2(0) << ", "
     << sr2(1) << ")";
  return {ok, os.str()};
}

// --- PLD -------------------------------------------------------------------

Outcome pld_properties() {
  const double t0 = cpu_seconds();
  Matrix column(4, 1);
  column << 0.1, 0.2, 5.0, 0.15;
  const BinaryVector one = BinaryVector::Ones(1);
  const FlipMask oracle = flip_mask(column, one, PldConfig{2, 10.0});
  const bool oracle_ok = oracle.count() == 1 && oracle.values()(2, 0) == 1;

  Rng rng(77);
  int involution_bad = 0, carve_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int T = rng.uniform_int(5, 12), C = rng.uniform_int(1, 8);
    const BinaryMatrix y = testing::random_binary(rng, T, C, rng.uniform(0.05, 0.6));
    const PseudoLabelMatrix pseudo(y, LabelStage::kPlg);
    const BinaryVector yv = derive_video_label(pseudo);
    const Matrix p = testing::random_probs(rng, T, C, 0.001, 0.999);
    PldConfig cfg;
    cfg.k = rng.uniform_int(1, 5);
    cfg.alpha = rng.uniform(1.0, 20.0);
    const FlipMask f = flip_mask(mask_loss_matrix(loss_matrix(p, pseudo), yv), yv, cfg);
    if (denoise(denoise(pseudo, f), f).values() != y) ++involution_bad;
    for (int c = 0; c < C; ++c)
      if (yv(c) == 0 && f.values().col(c).any()) ++carve_bad;
  }
  const double elapsed = cpu_seconds() - t0;
  return {oracle_ok && involution_bad == 0 && carve_bad == 0 && elapsed < kPldBudgetSec,
          std::string("oracle column flips ") + (oracle_ok ? "index 2 only" : "wrong entries") +
              ", involution failures " + std::to_string(involution_bad) +
              ", carve-out failures " + std::to_string(carve_bad) + " over 1000, " +
              fmt(elapsed, 3) + " s"};
}

// --- metrics ---------------------------------------------------------------

Outcome metrics_oracles() {
  Rng rng(9);
  int mismatches = 0, cases = 0;
  while (cases < 500) {
    const int T = rng.uniform_int(4, 12), C = rng.uniform_int(1, 3);
    const BinaryMatrix a = testing::random_binary(rng, T, C, rng.uniform(0.2, 0.6));
    const BinaryMatrix b = testing::random_binary(rng, T, C, rng.uniform(0.2, 0.6));
    const auto pe = extract_events(a), ge = extract_events(b);
    std::map<int, int> per_cat;
    for (const auto& e : pe) per_cat[e.category * 2]++;
    for (const auto& e : ge) per_cat[e.category * 2 + 1]++;
    bool small = true;
    for (const auto& [k, n] : per_cat) small = small && n <= 4;
    if (!small) continue;
    ++cases;
    const Counts greedy = event_f1(pe, ge, 0.5);
    const Counts brute = testing::brute_force_event_counts(pe, ge, 0.5);
    if (greedy.tp != brute.tp || greedy.fp != brute.fp || greedy.fn != brute.fn) ++mismatches;
  }

  struct Fixture {
    const char* name;
    std::vector<std::string> categories;
    long tp, fp, fn;
  };
  const std::vector<Fixture> fixtures{{"mixed", {"dog", "cat", "car"}, 5, 3, 2},
                                      {"small", {"dog", "cat"}, 2, 1, 1},
                                      {"empty", {"dog", "cat"}, 0, 0, 0}};
  int fixture_bad = 0;
  const fs::path dir = fs::path(AVVP_TEST_FIXTURES) / "segment_f1";
  for (const auto& f : fixtures) {
    const std::string n = f.name;
    const Counts c = segment_f1(io::read_label_csv(dir / (n + "_pred.csv"), f.categories),
                                io::read_label_csv(dir / (n + "_gt.csv"), f.categories));
    if (c.tp != f.tp || c.fp != f.fp || c.fn != f.fn) ++fixture_bad;
  }
  return {mismatches == 0 && fixture_bad == 0,
          "greedy vs brute force mismatches " + std::to_string(mismatches) + "/500, fixture " +
              "mismatches " + std::to_string(fixture_bad) + "/" +
              std::to_string(fixtures.size())};
}

// --- end-to-end ------------------------------------------------------------

json load_json(const fs::path& p) { return json::parse(io::read_file(p)); }

pl::RunConfig e2e_config(const fs::path& root, std::uint64_t seed) {
  pl::RunConfig run;
  run.data_dir = root / "data";
  run.run_dir = root / "run";
  run.seed = seed;
  run.scenario.n_videos = 50;
  run.scenario.T = 10;
  run.scenario.C = 8;
  run.n_calib = 20;
  run.n_test = 30;
  run.train.epochs = 100;
  run.train.learning_rate = 1e-3;
  run.train.batch_size = 8;
  run.train.d_model = 64;
  run.train.heads = 4;
  run.train.loss.lambda = 0.5;
  run.pld = PldConfig{5, 10.0};
  return run;
}

pl::RunConfig on_split(pl::RunConfig run, const fs::path& root, const char* split) {
  run.data_dir = root / "data" / split;
  return run;
}

struct SeedResult {
  double plg_f = 0, pld_f = 0;
  double type_av_richness = 0, type_av_plain = 0;
  double seconds = 0;
};

SeedResult run_seed(const fs::path& root, std::uint64_t seed) {
  fs::remove_all(root);
  fs::create_directories(root / "run");
  fs::create_directories(root / "run_plain");
  std::ostringstream log;
  const double t0 = cpu_seconds();
  pl::RunConfig run = e2e_config(root, seed);
  pl::cmd_synth(run, log);
  pl::cmd_calibrate_tau(on_split(run, root, "calib"), log);
  pl::RunConfig plg = on_split(run, root, "train");
  plg.tau_file = root / "run" / pl::kTauFile;
  pl::cmd_plg(plg, log);
  pl::cmd_train(on_split(run, root, "train"), log);
  pl::cmd_pld(on_split(run, root, "train"), log);
  pl::cmd_label_quality(on_split(run, root, "train"), log);
  pl::cmd_retrain(on_split(run, root, "train"), log);
  pl::cmd_eval(on_split(run, root, "test"), log);
  SeedResult r;
  r.seconds = cpu_seconds() - t0;

  pl::RunConfig plain = on_split(run, root, "train");
  plain.run_dir = root / "run_plain";
  plain.train.loss.lambda = 0.0;
  pl::cmd_retrain(plain, log);
  plain.data_dir = root / "data" / "test";
  pl::cmd_eval(plain, log);

  const json q = load_json(root / "run" / pl::kLabelQualityFile);
  r.plg_f = q["plg"]["segment"]["f"].get<double>();
  r.pld_f = q["pld"]["segment"]["f"].get<double>();
  r.type_av_richness = load_json(root / "run" / pl::kReportFile)["segment"]["Type@AV"].get<double>();
  r.type_av_plain =
      load_json(root / "run_plain" / pl::kReportFile)["segment"]["Type@AV"].get<double>();
  return r;
}

// --- determinism -----------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file())
      files[fs::relative(e.path(), root).string()] = io::read_file(e.path());
  return files;
}

std::map<std::string, std::string> small_pipeline(const fs::path& root) {
  fs::remove_all(root);
  fs::create_directories(root / "run");
  std::ostringstream log;
  pl::RunConfig run = e2e_config(root, 11);
  run.scenario.n_videos = 12;
  run.n_calib = 6;
  run.n_test = 6;
  run.train.epochs = 5;
  run.train.d_model = 16;
  pl::cmd_synth(run, log);
  pl::cmd_calibrate_tau(on_split(run, root, "calib"), log);
  pl::RunConfig plg = on_split(run, root, "train");
  plg.tau_file = root / "run" / pl::kTauFile;
  pl::cmd_plg(plg, log);
  pl::cmd_train(on_split(run, root, "train"), log);
  pl::cmd_pld(on_split(run, root, "train"), log);
  pl::cmd_retrain(on_split(run, root, "train"), log);
  pl::cmd_eval(on_split(run, root, "test"), log);
  pl::cmd_label_quality(on_split(run, root, "train"), log);
  return snapshot(root);
}

Outcome determinism(const fs::path& root) {
  const auto first = small_pipeline(root);
  const auto second = small_pipeline(root);
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes) differing.push_back(name);
  }
  const bool ok = differing.empty() && first.size() == second.size();
  return {ok, std::to_string(first.size()) + " artifacts compared, " +
                  std::to_string(differing.size()) + " differ" +
                  (differing.empty() ? "" : " (first: " + differing.front() + ")")};
}

// --- PLG invariants ---------------------------------------------------------

Outcome plg_invariants() {
  Rng rng(31);
  int monotone_bad = 0, filter_bad = 0, stochastic_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int T = rng.uniform_int(1, 12), C = rng.uniform_int(1, 10);
    Matrix logits(T, C);
    for (Eigen::Index k = 0; k < logits.size(); ++k) logits.data()[k] = 3.0 * rng.normal();
    Matrix probs = logits.array().exp().matrix();
    for (int t = 0; t < T; ++t) probs.row(t) /= probs.row(t).sum();
    BinaryVector y(C);
    for (int c = 0; c < C; ++c) y(c) = rng.uniform() < 0.4 ? 1 : 0;
    const LabelSet labels(testing::names(C), y, T);

    if (!validate(labels, probs).empty()) ++stochastic_bad;
    Matrix broken = probs;
    broken(rng.uniform_int(0, T - 1), rng.uniform_int(0, C - 1)) += 0.01;
    bool rejected = false;
    try {
      SimilarityMatrix{broken};
    } catch (const std::invalid_argument&) {
      rejected = true;
    }
    if (!rejected || validate(labels, broken).empty()) ++stochastic_bad;

    const SimilarityMatrix sim(probs);
    double lo = rng.uniform(0.01, 0.98), hi = rng.uniform(0.01, 0.98);
    if (lo > hi) std::swap(lo, hi);
    PlgConfig a, b;
    a.tau = lo;
    b.tau = hi;
    const BinaryMatrix ya = generate_pseudo_labels(sim, labels, a).values();
    const PseudoLabelMatrix yb = generate_pseudo_labels(sim, labels, b);
    if (((yb.values() - ya).array() > 0).any()) ++monotone_bad;
    if (((derive_video_label(yb) - y).array() > 0).any()) ++filter_bad;
  }
  return {monotone_bad == 0 && filter_bad == 0 && stochastic_bad == 0,
          "1000 instances: tau-monotonicity failures " + std::to_string(monotone_bad) +
              ", label-filter failures " + std::to_string(filter_bad) +
              ", row-stochastic check failures " + std::to_string(stochastic_bad)};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "avvp_acceptance";
  fs::remove_all(scratch);
  int failures = 0;
  auto report = [&](const char* name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  };
  auto guarded = [&](const char* name, const std::function<Outcome()>& fn) {
    try {
      report(name, fn());
    } catch (const std::exception& e) {
      report(name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded("gradient-correctness", gradients);
  guarded("richness-constants", richness_constants);
  guarded("pld-oracle-and-properties", pld_properties);
  guarded("metrics-oracle-equivalence", metrics_oracles);

  std::vector<SeedResult> seeds;
  try {
    for (int s = 0; s < kE2eSeeds; ++s) {
      seeds.push_back(run_seed(scratch / ("seed_" + std::to_string(s)), static_cast<std::uint64_t>(s)));
      const SeedResult& r = seeds.back();
      std::cout << "  seed " << s << ": label F plg " << fmt(r.plg_f) << " pld " << fmt(r.pld_f)
                << ", Type@AV lambda=0.5 " << fmt(r.type_av_richness) << " lambda=0 "
                << fmt(r.type_av_plain) << ", " << fmt(r.seconds, 3) << " s" << std::endl;
    }
  } catch (const std::exception& e) {
    std::cout << "  end-to-end run aborted: " << e.what() << std::endl;
  }
  {
    int wins = 0;
    double gain = 0, slowest = 0;
    for (const auto& r : seeds) {
      wins += r.pld_f >= r.plg_f;
      gain += r.pld_f - r.plg_f;
      slowest = std::max(slowest, r.seconds);
    }
    const double mean_gain = seeds.empty() ? 0.0 : gain / static_cast<double>(seeds.size());
    const bool ok = static_cast<int>(seeds.size()) == kE2eSeeds && wins >= kE2eMinWins &&
                    mean_gain > 0 && slowest < kE2eBudgetSecPerSeed;
    report("pld-improves-labels",
           {ok, "PLD >= PLG in " + std::to_string(wins) + "/" + std::to_string(seeds.size()) +
                    " seeds, mean F change " + fmt(mean_gain) + ", slowest seed " +
                    fmt(slowest, 3) + " s"});
  }
  {
    int wins = 0;
    for (const auto& r : seeds) wins += r.type_av_richness >= r.type_av_plain;
    const bool ok = static_cast<int>(seeds.size()) == kE2eSeeds && wins >= kLambdaMinWins;
    report("richness-loss-helps-type-at-av",
           {ok, "lambda=0.5 >= lambda=0 in " + std::to_string(wins) + "/" +
                    std::to_string(seeds.size()) + " seeds"});
  }

  guarded("determinism", [&] { return determinism(scratch / "determinism"); });
  guarded("plg-invariants", plg_invariants);

  fs::remove_all(scratch);
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criterion(s) failed"
                         : std::string("acceptance: all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
