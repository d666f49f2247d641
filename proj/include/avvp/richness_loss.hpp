// avvp/richness_loss.hpp

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

#ifndef AVVP_RICHNESS_LOSS_HPP_
#define AVVP_RICHNESS_LOSS_HPP_

#include "avvp/label_model.hpp"

namespace avvp {

inline constexpr double kDefaultClampEps = 1e-7;

struct LossConfig {
  double lambda = 0.5;  // weight of the richness term
  double clamp_eps = kDefaultClampEps;

  void check() const;
};

/// -[y ln p + (1-y) ln(1-p)] with both log arguments floored at clamp_eps.
/// Throws std::invalid_argument for p or y outside [0,1].
double bce(double p, double y, double clamp_eps = kDefaultClampEps);

/// d bce / d p. Zero where the log argument sits on the clamp floor.
double bce_grad(double p, double y, double clamp_eps = kDefaultClampEps);

Matrix bce_elementwise(const Matrix& p, const Matrix& y,
                       double clamp_eps = kDefaultClampEps);

/// Mean over all entries.
double bce_mean(const Matrix& p, const Matrix& y,
                double clamp_eps = kDefaultClampEps);

/// cr_t = sum_c M(t,c) / (number of categories in the video label).
Vector category_richness(const Matrix& m, const LabelSet& labels);

/// sr_c = mean over segments of M(t,c).
Vector segment_richness(const Matrix& m);

/// Everything loss_total needs from the supervision side of one video.
struct LossTargets {
  Vector union_label;       // weak label
  Vector audio_smoothed;    // label-smoothed audio target
  Vector visual_video;      // video-level visual pseudo label
  Matrix visual_segments;   // segment-level visual pseudo label
  Vector category_richness; // of visual_segments
  Vector segment_richness;  // of visual_segments
  int num_positive = 0;
};

LossTargets make_loss_targets(const LabelSet& labels,
                              const PseudoLabelMatrix& pseudo,
                              double smoothing_eps);

/// Prediction-side inputs of the loss. segment_visual is T x C.
struct LossInputs {
  Matrix segment_visual;
  Vector video_union;
  Vector video_audio;
  Vector video_visual;
};

/// Video-level loss: union vs weak label, audio vs smoothed label, visual vs
/// the video-level visual pseudo label. Each term is mean-reduced.
double loss_video(const Vector& p_union, const Vector& p_audio,
                  const Vector& p_visual, const Vector& y_union,
                  const Vector& y_audio_smoothed, const Vector& y_visual_plg,
                  double clamp_eps = kDefaultClampEps);

/// Richness alignment between segment-level visual predictions and the
/// pseudo label. Prediction-side category richness is clamped to [0,1].
double loss_richness(const Matrix& segment_visual,
                     const PseudoLabelMatrix& pseudo, const LabelSet& labels,
                     double clamp_eps = kDefaultClampEps);

struct LossGradients {
  Matrix segment_visual;
  Vector video_union;
  Vector video_audio;
  Vector video_visual;
};

struct LossResult {
  double total = 0.0;
  double video = 0.0;
  double richness = 0.0;
  LossGradients grad;
};

/// video + lambda * richness, with exact partial derivatives with respect to
/// every prediction entry.
LossResult loss_total(const LossInputs& preds, const LossTargets& targets,
                      const LossConfig& cfg);

}  // namespace avvp

#endif  // AVVP_RICHNESS_LOSS_HPP_
