// src/metrics.cpp

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

#include "avvp/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace avvp {

double span_iou(const EventSpan& a, const EventSpan& b) {
  const int inter = std::min(a.end, b.end) - std::max(a.start, b.start) + 1;
  if (inter <= 0) return 0.0;
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double Counts::f_score() const {
  if (empty_support()) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<EventSpan> extract_events(const BinaryMatrix& binary) {
  std::vector<EventSpan> out;
  const int T = static_cast<int>(binary.rows());
  for (int c = 0; c < binary.cols(); ++c) {
    int t = 0;
    while (t < T) {
      if (binary(t, c) == 0) {
        ++t;
        continue;
      }
      const int start = t;
      while (t < T && binary(t, c) != 0) ++t;
      out.push_back({c, start, t - 1});
    }
  }
  return out;
}

Counts segment_f1(const BinaryMatrix& pred, const BinaryMatrix& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    std::ostringstream os;
    os << "segment_f1: prediction " << pred.rows() << "x" << pred.cols()
       << " vs ground truth " << gt.rows() << "x" << gt.cols();
    throw std::invalid_argument(os.str());
  }
  Counts k;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    for (Eigen::Index t = 0; t < pred.rows(); ++t) {
      const bool p = pred(t, c) != 0, g = gt(t, c) != 0;
      k.tp += p && g;
      k.fp += p && !g;
      k.fn += !p && g;
    }
  }
  return k;
}

Counts event_f1(const std::vector<EventSpan>& pred,
                const std::vector<EventSpan>& gt, double miou_threshold) {
  if (!(miou_threshold > 0.0 && miou_threshold <= 1.0))
    throw std::invalid_argument("event_f1: IoU threshold must lie in (0,1]");

  struct Candidate {
    double iou;
    std::size_t p, g;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (pred[i].category != gt[j].category) continue;
      const double iou = span_iou(pred[i], gt[j]);
      if (iou >= miou_threshold) cands.push_back({iou, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.p, a.g) < std::tie(b.p, b.g);
  });
  std::vector<bool> pred_used(pred.size(), false), gt_used(gt.size(), false);
  Counts k;
  for (const Candidate& c : cands) {
    if (pred_used[c.p] || gt_used[c.g]) continue;
    pred_used[c.p] = gt_used[c.g] = true;
    ++k.tp;
  }
  k.fp = static_cast<long>(pred.size()) - k.tp;
  k.fn = static_cast<long>(gt.size()) - k.tp;
  return k;
}

VideoDecisions ground_truth_decisions(const BinaryMatrix& gt_audio,
                                      const BinaryMatrix& gt_visual) {
  if (gt_audio.rows() != gt_visual.rows() || gt_audio.cols() != gt_visual.cols())
    throw std::invalid_argument("ground truth audio and visual shapes differ");
  return {gt_audio, gt_visual, gt_audio.cwiseProduct(gt_visual)};
}

namespace {

const BinaryMatrix& pick(const VideoDecisions& d, int type) {
  switch (type) {
    case 0: return d.audio;
    case 1: return d.visual;
    default: return d.audio_visual;
  }
}

void finalize(LevelScores& s) {
  for (int i = 0; i < 3; ++i) s.f[i] = s.counts[i].f_score();
  s.type_at_av = (s.f[0] + s.f[1] + s.f[2]) / 3.0;
  s.pooled = s.counts[0];
  s.pooled += s.counts[1];
  s.event_at_av = s.pooled.f_score();
}

}  // namespace

MetricsReport report(const std::vector<VideoDecisions>& preds,
                     const std::vector<VideoDecisions>& gts, double miou_threshold) {
  if (preds.size() != gts.size()) {
    std::ostringstream os;
    os << "report: " << preds.size() << " predictions for " << gts.size()
       << " ground truths";
    throw std::invalid_argument(os.str());
  }
  MetricsReport r;
  r.num_videos = static_cast<int>(preds.size());
  for (std::size_t v = 0; v < preds.size(); ++v) {
    bool any_support = false;
    for (int type = 0; type < 3; ++type) {
      const BinaryMatrix& p = pick(preds[v], type);
      const BinaryMatrix& g = pick(gts[v], type);
      const Counts seg = segment_f1(p, g);
      const Counts ev = event_f1(extract_events(p), extract_events(g), miou_threshold);
      r.segment.counts[type] += seg;
      r.event.counts[type] += ev;
      any_support = any_support || !seg.empty_support() || !ev.empty_support();
    }
    if (!any_support) r.zero_support_videos.push_back(static_cast<int>(v));
  }
  finalize(r.segment);
  finalize(r.event);
  return r;
}

}  // namespace avvp
