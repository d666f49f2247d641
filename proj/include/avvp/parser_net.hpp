// avvp/parser_net.hpp

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

#ifndef AVVP_PARSER_NET_HPP_
#define AVVP_PARSER_NET_HPP_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "avvp/attention.hpp"
#include "avvp/label_model.hpp"
#include "avvp/richness_loss.hpp"

namespace avvp {

/// Raw per-segment audio and visual features of one video. The two
/// modalities may have different widths; the model projects both to d.
struct FeatureBundle {
  Matrix audio;   // T x audio_dim
  Matrix visual;  // T x visual_dim

  int num_segments() const { return static_cast<int>(audio.rows()); }
  /// Throws std::invalid_argument on row mismatch or non-finite entries.
  void check() const;
};

struct ModelShape {
  int audio_dim = 0;
  int visual_dim = 0;
  int d_model = 64;
  int heads = 4;
  int classes = 0;

  void check() const;
  bool operator==(const ModelShape&) const = default;
};

/// All learnable blocks of the hybrid attention parser. The same type holds
/// gradients and optimizer moments.
struct ModelParams {
  ModelShape shape;
  Matrix proj_audio_w, proj_audio_b;
  Matrix proj_visual_w, proj_visual_b;
  AttentionBlock self_audio, cross_audio, self_visual, cross_visual;
  Matrix classifier_w, classifier_b;          // shared by both modalities
  Matrix temporal_att_w, temporal_att_b;      // pooling over segments
  Matrix modality_att_w, modality_att_b;      // pooling over modalities

  static ModelParams zeros(const ModelShape& shape);
  /// Glorot-uniform weights and zero biases from `seed`.
  static ModelParams initialized(const ModelShape& shape, std::uint64_t seed);

  /// Throws when a block has the wrong shape or a non-finite entry.
  void check() const;

  template <typename F>
  void for_each_block(F&& f) {
    f("proj_audio.w", proj_audio_w);
    f("proj_audio.b", proj_audio_b);
    f("proj_visual.w", proj_visual_w);
    f("proj_visual.b", proj_visual_b);
    self_audio.for_each_block([&](const char* n, Matrix& m) { f(std::string("self_audio.") + n, m); });
    cross_audio.for_each_block([&](const char* n, Matrix& m) { f(std::string("cross_audio.") + n, m); });
    self_visual.for_each_block([&](const char* n, Matrix& m) { f(std::string("self_visual.") + n, m); });
    cross_visual.for_each_block([&](const char* n, Matrix& m) { f(std::string("cross_visual.") + n, m); });
    f("classifier.w", classifier_w);
    f("classifier.b", classifier_b);
    f("temporal_att.w", temporal_att_w);
    f("temporal_att.b", temporal_att_b);
    f("modality_att.w", modality_att_w);
    f("modality_att.b", modality_att_b);
  }
  template <typename F>
  void for_each_block(F&& f) const {
    const_cast<ModelParams*>(this)->for_each_block(
        [&](const std::string& n, Matrix& m) { f(n, static_cast<const Matrix&>(m)); });
  }

  std::size_t num_scalars() const;
};

/// Segment- and video-level event probabilities for one video.
struct PredictionSet {
  Matrix audio;         // T x C
  Matrix visual;        // T x C
  Matrix audio_visual;  // audio .* visual
  Vector video_audio;
  Vector video_visual;
  Vector video_union;
};

/// Inputs of attentive multi-modal multi-instance pooling.
struct PoolingInputs {
  Matrix prob_audio;              // T x C segment probabilities
  Matrix prob_visual;
  Matrix temporal_logits_audio;   // T x C, softmax over segments per class
  Matrix temporal_logits_visual;
  Vector modality_logits_audio;   // C, softmax over the two modalities
  Vector modality_logits_visual;
};

struct PooledPredictions {
  Vector audio, visual, union_;
  Matrix temporal_weights_audio, temporal_weights_visual;
  Vector audio_weight;  // modality weight of audio per class; visual gets 1 - it
};

/// Video-level probabilities: attention-weighted temporal sums per modality,
/// then a per-class convex combination of the two modalities for the union.
PooledPredictions mmil_pool(const PoolingInputs& in);

struct ForwardCache {
  Matrix proj_audio, proj_visual;  // F^a, F^v after projection
  Matrix fused_audio, fused_visual;
  AttentionCache self_audio, cross_audio, self_visual, cross_visual;
  PoolingInputs pooling;
  PooledPredictions pooled;
};

PredictionSet han_forward(const FeatureBundle& features, const ModelParams& params,
                          ForwardCache* cache = nullptr);

/// Gradient of a scalar loss with respect to every parameter, given the loss
/// gradient with respect to the predictions consumed by loss_total.
ModelParams han_backward(const FeatureBundle& features, const ModelParams& params,
                         const ForwardCache& cache, const LossGradients& d_loss);

struct VideoLoss {
  LossResult loss;
  ModelParams grad;
};

VideoLoss video_loss_and_grad(const FeatureBundle& features,
                              const ModelParams& params,
                              const LossTargets& targets, const LossConfig& cfg);

struct BinaryPrediction {
  BinaryMatrix audio, visual, audio_visual;
};

/// 1 iff probability >= threshold; the audio-visual decision thresholds the
/// product matrix.
BinaryPrediction binarize(const PredictionSet& preds, double threshold = 0.5);

// ---------------------------------------------------------------------------
// Training

struct TrainingExample {
  FeatureBundle features;
  LabelSet labels;
  PseudoLabelMatrix pseudo;
};

struct TrainConfig {
  double learning_rate = 3e-4;
  int batch_size = 32;
  int epochs = 30;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int d_model = 64;
  int heads = 4;
  double smoothing_eps = 0.1;
  LossConfig loss;
  std::uint64_t seed = 0;

  void check() const;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean loss_total over the epoch's videos
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, int step, const std::string& what)
      : std::runtime_error(what), epoch_(epoch), step_(step) {}
  int epoch() const { return epoch_; }
  int step() const { return step_; }

 private:
  int epoch_;
  int step_;
};

/// Adam on the mean per-video gradient of each mini-batch. Deterministic for
/// a fixed seed: the shuffle, the initialization and every reduction run in
/// a fixed order.
TrainResult train(const std::vector<TrainingExample>& dataset,
                  const TrainConfig& cfg,
                  const std::function<void(int epoch, double loss)>& on_epoch = {});

}  // namespace avvp

#endif  // AVVP_PARSER_NET_HPP_
