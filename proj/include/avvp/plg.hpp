// avvp/plg.hpp

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

#ifndef AVVP_PLG_HPP_
#define AVVP_PLG_HPP_

#include <string>
#include <utility>

#include "avvp/label_model.hpp"

namespace avvp {

/// Pseudo label generation settings. The default threshold is tuned for a
/// 25-way softmax; other vocabularies need their own value.
struct PlgConfig {
  double tau = 0.040;
  std::string prompt_id = "P1";

  void check() const;
};

/// Per-segment image embeddings (T x d) and per-category text embeddings
/// (C x d) from the same vision-language model.
struct FeaturePair {
  Matrix image_features;
  Matrix text_features;
};

/// Softmax over categories of the cosine between each segment embedding and
/// each category embedding.
SimilarityMatrix similarity_from_features(const FeaturePair& features);

/// Keeps category c in segment t iff sim(t,c) >= tau and c is in the weak
/// video label.
PseudoLabelMatrix generate_pseudo_labels(const SimilarityMatrix& sim,
                                         const LabelSet& labels,
                                         const PlgConfig& cfg);

/// Symmetric label smoothing of the weak label; returns (visual, audio)
/// targets, which coincide.
std::pair<Vector, Vector> smooth_video_labels(const LabelSet& labels,
                                              double epsilon);

}  // namespace avvp

#endif  // AVVP_PLG_HPP_
