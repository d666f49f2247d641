// avvp/synth.hpp

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

#ifndef AVVP_SYNTH_HPP_
#define AVVP_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "avvp/label_model.hpp"
#include "avvp/parser_net.hpp"
#include "avvp/rng.hpp"

namespace avvp {

/// Synthetic scenario with known segment-level truth for both modalities.
///
/// Category prototypes (the "world") depend only on `seed`; each video depends
/// on `seed` and its global index, so splits drawn with different
/// `first_video` offsets share a world but not videos.
struct ScenarioConfig {
  int n_videos = 50;
  int first_video = 0;
  int T = 10;
  int C = 8;
  int max_events_per_modality = 2;
  int min_span = 2;
  int max_span = 5;
  double shared_event_prob = 0.5;  // visual event reuses an audio event
  double signal = 3.0;             // added to true-category similarity logits
  double noise_sigma = 1.0;        // similarity logit noise
  int feature_dim = 16;
  double feature_noise = 1.0;      // std of per-entry feature noise
  std::uint64_t seed = 0;

  void check() const;
};

struct SyntheticVideo {
  std::string id;
  BinaryMatrix gt_audio;   // T x C
  BinaryMatrix gt_visual;  // T x C
  LabelSet labels;         // union of both modalities
  FeatureBundle features;
  SimilarityMatrix similarity;
};

struct Scenario {
  std::vector<std::string> categories;
  std::vector<SyntheticVideo> videos;
};

std::vector<std::string> synthetic_categories(int C);

Scenario generate_scenario(const ScenarioConfig& cfg);

/// Row t = softmax(signal * gt_visual[t] + N(0, noise_sigma^2)).
SimilarityMatrix synth_similarities(const BinaryMatrix& gt_visual,
                                    const ScenarioConfig& cfg, Rng& rng);

struct PrfScore {
  double precision = 1.0;
  double recall = 1.0;
  double f = 1.0;
  long tp = 0, fp = 0, fn = 0;

  /// Precision is 1 without predicted positives, recall is 1 without
  /// true positives in the reference; F is 0 when both P and R are 0.
  static PrfScore from_counts(long tp, long fp, long fn);
};

struct PseudoLabelQuality {
  PrfScore segment;
  PrfScore video;
};

PseudoLabelQuality evaluate_pseudo_labels(const PseudoLabelMatrix& pseudo,
                                          const BinaryMatrix& gt_visual);

/// Pooled (micro) quality over many videos.
PseudoLabelQuality evaluate_pseudo_labels(const std::vector<PseudoLabelMatrix>& pseudo,
                                          const std::vector<BinaryMatrix>& gt_visual);

/// The threshold maximizing pooled segment-level F of the generated pseudo
/// labels against the visual truth. Candidates are the similarity values of
/// categories present in each weak label; the smallest maximizer wins.
double calibrate_tau(const std::vector<SimilarityMatrix>& sims,
                     const std::vector<LabelSet>& labels,
                     const std::vector<BinaryMatrix>& gt_visual);

}  // namespace avvp

#endif  // AVVP_SYNTH_HPP_
