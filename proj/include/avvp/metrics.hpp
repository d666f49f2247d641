// avvp/metrics.hpp

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

#ifndef AVVP_METRICS_HPP_
#define AVVP_METRICS_HPP_

#include <array>
#include <string>
#include <vector>

#include "avvp/label_model.hpp"

namespace avvp {

/// A maximal run of consecutive segments carrying one category; `end` is
/// inclusive.
struct EventSpan {
  int category = 0;
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool operator==(const EventSpan&) const = default;
};

/// Intersection over union of two inclusive segment ranges.
double span_iou(const EventSpan& a, const EventSpan& b);

struct Counts {
  long tp = 0, fp = 0, fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp; fp += o.fp; fn += o.fn;
    return *this;
  }
  /// 2TP / (2TP + FP + FN); 1 when all counts are zero.
  double f_score() const;
  bool empty_support() const { return tp == 0 && fp == 0 && fn == 0; }
};

/// Ordered by (category, start).
std::vector<EventSpan> extract_events(const BinaryMatrix& binary);

/// Cell-wise counts over a T x C decision matrix.
Counts segment_f1(const BinaryMatrix& pred, const BinaryMatrix& gt);

/// One-to-one matching within each category, greedy in descending IoU (ties:
/// earlier prediction, then earlier ground truth). A pair may match only when
/// IoU >= miou_threshold.
Counts event_f1(const std::vector<EventSpan>& pred,
                const std::vector<EventSpan>& gt, double miou_threshold = 0.5);

enum class EventType { kAudio = 0, kVisual = 1, kAudioVisual = 2 };

/// Per-video decisions (or ground truth) for the three event types.
struct VideoDecisions {
  BinaryMatrix audio, visual, audio_visual;
};

/// Ground truth per video in its native form; the audio-visual truth is the
/// intersection of the two.
VideoDecisions ground_truth_decisions(const BinaryMatrix& gt_audio,
                                      const BinaryMatrix& gt_visual);

struct LevelScores {
  // indexed by EventType
  std::array<Counts, 3> counts;
  std::array<double, 3> f;
  double type_at_av = 0.0;
  double event_at_av = 0.0;
  Counts pooled;  // audio + visual counts behind event_at_av
};

struct MetricsReport {
  LevelScores segment;
  LevelScores event;
  int num_videos = 0;
  // videos where every type at both levels had zero support
  std::vector<int> zero_support_videos;
};

/// Micro-averaged F-scores over all videos. Throws on misaligned lists.
MetricsReport report(const std::vector<VideoDecisions>& preds,
                     const std::vector<VideoDecisions>& gts,
                     double miou_threshold = 0.5);

}  // namespace avvp

#endif  // AVVP_METRICS_HPP_
