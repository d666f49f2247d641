// src/synth.cpp

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

#include "avvp/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "avvp/plg.hpp"

namespace avvp {

void ScenarioConfig::check() const {
  if (n_videos < 0 || first_video < 0)
    throw std::invalid_argument("ScenarioConfig: video counts must be >= 0");
  if (T < 1) throw std::invalid_argument("ScenarioConfig: T must be >= 1");
  if (C < 2) throw std::invalid_argument("ScenarioConfig: C must be >= 2");
  if (max_events_per_modality < 0)
    throw std::invalid_argument("ScenarioConfig: max_events_per_modality must be >= 0");
  if (min_span < 1 || max_span < min_span)
    throw std::invalid_argument("ScenarioConfig: need 1 <= min_span <= max_span");
  if (max_span > T) {
    std::ostringstream os;
    os << "ScenarioConfig: max_span = " << max_span << " does not fit in T = " << T;
    throw std::invalid_argument(os.str());
  }
  if (!(shared_event_prob >= 0.0 && shared_event_prob <= 1.0))
    throw std::invalid_argument("ScenarioConfig: shared_event_prob must lie in [0,1]");
  if (!(noise_sigma >= 0.0) || !(feature_noise >= 0.0))
    throw std::invalid_argument("ScenarioConfig: noise levels must be >= 0");
  if (feature_dim < 1) throw std::invalid_argument("ScenarioConfig: feature_dim must be >= 1");
}

std::vector<std::string> synthetic_categories(int C) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "event_%02d", c);
    out.emplace_back(buf);
  }
  return out;
}

namespace {

// Stream ids under the scenario seed.
constexpr std::uint64_t kWorldStream = 0;
constexpr std::uint64_t kVideoStreamBase = 1000;

struct Span {
  int category, start, length;
};

Span draw_span(const ScenarioConfig& cfg, Rng& rng, int category) {
  const int length = rng.uniform_int(cfg.min_span, cfg.max_span);
  const int start = rng.uniform_int(0, cfg.T - length);
  return {category, start, length};
}

void paint(BinaryMatrix& m, const Span& s) {
  for (int t = s.start; t < s.start + s.length; ++t) m(t, s.category) = 1;
}

Matrix random_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

Matrix features_from_truth(const BinaryMatrix& gt, const Matrix& prototypes,
                           double noise, Rng& rng) {
  Matrix x = gt.cast<double>() * prototypes;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) += noise * rng.normal();
  return x;
}

}  // namespace

SimilarityMatrix synth_similarities(const BinaryMatrix& gt_visual,
                                    const ScenarioConfig& cfg, Rng& rng) {
  Matrix out(gt_visual.rows(), gt_visual.cols());
  for (Eigen::Index t = 0; t < gt_visual.rows(); ++t) {
    Eigen::RowVectorXd logits(gt_visual.cols());
    for (Eigen::Index c = 0; c < gt_visual.cols(); ++c)
      logits(c) = cfg.signal * gt_visual(t, c) + cfg.noise_sigma * rng.normal();
    const double peak = logits.maxCoeff();
    const Eigen::RowVectorXd e = (logits.array() - peak).exp().matrix();
    out.row(t) = e / e.sum();
  }
  return SimilarityMatrix(std::move(out));
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.check();
  Scenario sc;
  sc.categories = synthetic_categories(cfg.C);

  Rng world(derive_seed(cfg.seed, kWorldStream));
  const Matrix audio_protos = random_normal(cfg.C, cfg.feature_dim, world);
  const Matrix visual_protos = random_normal(cfg.C, cfg.feature_dim, world);

  sc.videos.reserve(static_cast<std::size_t>(cfg.n_videos));
  for (int i = 0; i < cfg.n_videos; ++i) {
    const int index = cfg.first_video + i;
    const std::uint64_t vseed =
        derive_seed(cfg.seed, kVideoStreamBase + static_cast<std::uint64_t>(index));
    Rng layout(derive_seed(vseed, 0));

    BinaryMatrix gt_a = BinaryMatrix::Zero(cfg.T, cfg.C);
    BinaryMatrix gt_v = BinaryMatrix::Zero(cfg.T, cfg.C);
    std::vector<Span> audio_spans;
    const int n_audio = layout.uniform_int(0, cfg.max_events_per_modality);
    for (int k = 0; k < n_audio; ++k)
      audio_spans.push_back(draw_span(cfg, layout, layout.uniform_int(0, cfg.C - 1)));
    const int n_visual = layout.uniform_int(0, cfg.max_events_per_modality);
    std::vector<Span> visual_spans;
    for (int k = 0; k < n_visual; ++k) {
      if (!audio_spans.empty() && layout.uniform() < cfg.shared_event_prob) {
        const Span& src = audio_spans[static_cast<std::size_t>(
            layout.uniform_int(0, static_cast<int>(audio_spans.size()) - 1))];
        visual_spans.push_back(draw_span(cfg, layout, src.category));
      } else {
        visual_spans.push_back(draw_span(cfg, layout, layout.uniform_int(0, cfg.C - 1)));
      }
    }
    // Every video carries at least one event unless events are disabled.
    if (audio_spans.empty() && visual_spans.empty() && cfg.max_events_per_modality > 0)
      audio_spans.push_back(draw_span(cfg, layout, layout.uniform_int(0, cfg.C - 1)));
    for (const Span& s : audio_spans) paint(gt_a, s);
    for (const Span& s : visual_spans) paint(gt_v, s);

    BinaryVector y(cfg.C);
    for (int c = 0; c < cfg.C; ++c)
      y(c) = (gt_a.col(c).any() || gt_v.col(c).any()) ? 1 : 0;

    Rng feat(derive_seed(vseed, 1));
    FeatureBundle fb;
    fb.audio = features_from_truth(gt_a, audio_protos, cfg.feature_noise, feat);
    fb.visual = features_from_truth(gt_v, visual_protos, cfg.feature_noise, feat);

    Rng sim_rng(derive_seed(vseed, 2));
    SimilarityMatrix sim = synth_similarities(gt_v, cfg, sim_rng);

    char id[32];
    std::snprintf(id, sizeof id, "vid_%05d", index);
    sc.videos.push_back(SyntheticVideo{id, std::move(gt_a), std::move(gt_v),
                                       LabelSet(sc.categories, std::move(y), cfg.T),
                                       std::move(fb), std::move(sim)});
  }
  return sc;
}

PrfScore PrfScore::from_counts(long tp, long fp, long fn) {
  PrfScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.precision = (tp + fp) == 0 ? 1.0 : double(tp) / double(tp + fp);
  s.recall = (tp + fn) == 0 ? 1.0 : double(tp) / double(tp + fn);
  s.f = (s.precision + s.recall) == 0.0
            ? 0.0
            : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

namespace {

void accumulate(const BinaryMatrix& pred, const BinaryMatrix& gt, long& tp, long& fp,
                long& fn) {
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    for (Eigen::Index t = 0; t < pred.rows(); ++t) {
      const bool p = pred(t, c) != 0, g = gt(t, c) != 0;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
  }
}

}  // namespace

PseudoLabelQuality evaluate_pseudo_labels(const std::vector<PseudoLabelMatrix>& pseudo,
                                          const std::vector<BinaryMatrix>& gt_visual) {
  if (pseudo.size() != gt_visual.size())
    throw std::invalid_argument("evaluate_pseudo_labels: list sizes differ");
  long stp = 0, sfp = 0, sfn = 0, vtp = 0, vfp = 0, vfn = 0;
  for (std::size_t i = 0; i < pseudo.size(); ++i) {
    const BinaryMatrix& p = pseudo[i].values();
    const BinaryMatrix& g = gt_visual[i];
    if (p.rows() != g.rows() || p.cols() != g.cols())
      throw std::invalid_argument("evaluate_pseudo_labels: shape mismatch at video " +
                                  std::to_string(i));
    accumulate(p, g, stp, sfp, sfn);
    const BinaryMatrix pv = derive_video_label(pseudo[i]);
    const BinaryMatrix gv =
        derive_video_label(PseudoLabelMatrix(g, LabelStage::kPlg));
    accumulate(pv, gv, vtp, vfp, vfn);
  }
  return {PrfScore::from_counts(stp, sfp, sfn), PrfScore::from_counts(vtp, vfp, vfn)};
}

PseudoLabelQuality evaluate_pseudo_labels(const PseudoLabelMatrix& pseudo,
                                          const BinaryMatrix& gt_visual) {
  return evaluate_pseudo_labels(std::vector<PseudoLabelMatrix>{pseudo},
                                std::vector<BinaryMatrix>{gt_visual});
}

double calibrate_tau(const std::vector<SimilarityMatrix>& sims,
                     const std::vector<LabelSet>& labels,
                     const std::vector<BinaryMatrix>& gt_visual) {
  if (sims.size() != labels.size() || sims.size() != gt_visual.size() || sims.empty())
    throw std::invalid_argument("calibrate_tau: need equally sized, non-empty lists");

  struct Cell {
    double score;
    bool truth;
  };
  std::vector<Cell> cells;
  long total_truth = 0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const Matrix& s = sims[i].values();
    const BinaryVector& y = labels[i].video_label();
    const BinaryMatrix& g = gt_visual[i];
    if (s.rows() != g.rows() || s.cols() != g.cols() || s.cols() != y.size())
      throw std::invalid_argument("calibrate_tau: shape mismatch at video " +
                                  std::to_string(i));
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      for (Eigen::Index t = 0; t < s.rows(); ++t) {
        total_truth += g(t, c) != 0;
        if (y(c) != 0) cells.push_back({s(t, c), g(t, c) != 0});
      }
    }
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.score > b.score; });

  // Sweep tau downwards through the distinct scores; at tau = score every cell
  // with an equal or larger score is selected.
  double best_tau = PlgConfig{}.tau;
  double best_f = -1.0;
  long tp = 0, fp = 0;
  for (std::size_t k = 0; k < cells.size();) {
    const double tau = cells[k].score;
    while (k < cells.size() && cells[k].score == tau) {
      tp += cells[k].truth;
      fp += !cells[k].truth;
      ++k;
    }
    if (!(tau > 0.0 && tau < 1.0)) continue;
    const double f = PrfScore::from_counts(tp, fp, total_truth - tp).f;
    if (f >= best_f) {  // ">=": later candidates are smaller taus
      best_f = f;
      best_tau = tau;
    }
  }
  return best_tau;
}

}  // namespace avvp
