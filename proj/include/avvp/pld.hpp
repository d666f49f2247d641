// avvp/pld.hpp

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

#ifndef AVVP_PLD_HPP_
#define AVVP_PLD_HPP_

#include "avvp/label_model.hpp"
#include "avvp/richness_loss.hpp"

namespace avvp {

struct PldConfig {
  int k = 5;            // number of smallest losses averaged per category
  double alpha = 10.0;  // scale applied to that average
  double clamp_eps = kDefaultClampEps;

  void check() const;
};

/// Positions whose pseudo label should be reversed, together with the
/// video-level visual label the mask was computed against. Columns of
/// categories absent from that label must be zero; denoise() enforces it.
class FlipMask {
 public:
  FlipMask(BinaryMatrix values, BinaryVector reference_label)
      : values_(std::move(values)), reference_label_(std::move(reference_label)) {}
  const BinaryMatrix& values() const { return values_; }
  const BinaryVector& reference_label() const { return reference_label_; }
  int count() const { return values_.sum(); }

 private:
  BinaryMatrix values_;
  BinaryVector reference_label_;
};

/// Elementwise forward bce between segment-level visual predictions and the
/// pseudo label, without reduction.
Matrix loss_matrix(const Matrix& segment_visual, const PseudoLabelMatrix& pseudo,
                   double clamp_eps = kDefaultClampEps);

/// Zeroes the columns of categories missing from the video-level label.
Matrix mask_loss_matrix(const Matrix& losses, const BinaryVector& video_label);

/// Per positive category j: threshold = alpha * mean of the k smallest masked
/// losses in column j (ties by segment index); flag entries >= threshold.
/// Entries with zero loss are never flagged.
FlipMask flip_mask(const Matrix& masked_losses, const BinaryVector& video_label,
                   const PldConfig& cfg);

/// Reverses the flagged entries. Throws if a flip targets a category outside
/// the mask's reference label.
PseudoLabelMatrix denoise(const PseudoLabelMatrix& pseudo, const FlipMask& flips);

/// The whole denoising step for one video.
PseudoLabelMatrix denoise_with_predictions(const Matrix& segment_visual,
                                           const PseudoLabelMatrix& pseudo,
                                           const PldConfig& cfg);

}  // namespace avvp

#endif  // AVVP_PLD_HPP_
