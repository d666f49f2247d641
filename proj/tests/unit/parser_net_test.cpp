// tests/unit/parser_net_test.cpp

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

#include "avvp/parser_net.hpp"

#include <numeric>

#include <gtest/gtest.h>

#include "../support/fd_oracle.hpp"
#include "../support/fixtures.hpp"
#include "avvp/plg.hpp"
#include "avvp/synth.hpp"

namespace avvp {
namespace {

FeatureBundle random_features(Rng& rng, int T, int da, int dv) {
  FeatureBundle f{Matrix(T, da), Matrix(T, dv)};
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < da; ++j) f.audio(t, j) = rng.normal();
    for (int j = 0; j < dv; ++j) f.visual(t, j) = rng.normal();
  }
  return f;
}

TEST(HanForward, ZeroClassifierGivesOneHalf) {
  Rng rng(1);
  ModelParams p = ModelParams::initialized({6, 5, 8, 2, 4}, 3);
  p.classifier_w.setZero();
  p.classifier_b.setZero();
  const PredictionSet out = han_forward(random_features(rng, 5, 6, 5), p);
  EXPECT_TRUE(out.audio.isApproxToConstant(0.5, 0));
  EXPECT_TRUE(out.visual.isApproxToConstant(0.5, 0));
  EXPECT_TRUE(out.video_union.isApproxToConstant(0.5, 1e-15));
}

TEST(HanForward, ShapesAndInvariants) {
  Rng rng(2);
  const ModelParams p = ModelParams::initialized({12, 20, 16, 4, 25}, 4);
  const PredictionSet out = han_forward(random_features(rng, 10, 12, 20), p);
  EXPECT_EQ(out.audio.rows(), 10);
  EXPECT_EQ(out.audio.cols(), 25);
  EXPECT_EQ(out.visual.rows(), 10);
  EXPECT_EQ(out.visual.cols(), 25);
  EXPECT_EQ(out.video_audio.size(), 25);
  EXPECT_EQ(out.video_visual.size(), 25);
  EXPECT_EQ(out.video_union.size(), 25);
  EXPECT_EQ(out.audio_visual, Matrix(out.audio.array() * out.visual.array()));
  for (const Matrix* m : {&out.audio, &out.visual})
    EXPECT_TRUE((m->array() >= 0).all() && (m->array() <= 1).all());
}

TEST(HanForward, PureAndPermutationEquivariant) {
  Rng rng(3);
  const ModelParams p = ModelParams::initialized({4, 4, 8, 2, 3}, 5);
  const FeatureBundle f = random_features(rng, 6, 4, 4);
  const PredictionSet a = han_forward(f, p), b = han_forward(f, p);
  EXPECT_EQ(a.visual, b.visual);
  EXPECT_EQ(a.video_union, b.video_union);

  std::vector<int> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  FeatureBundle g = f;
  for (int t = 0; t < 6; ++t) {
    g.audio.row(t) = f.audio.row(perm[static_cast<std::size_t>(t)]);
    g.visual.row(t) = f.visual.row(perm[static_cast<std::size_t>(t)]);
  }
  const PredictionSet c = han_forward(g, p);
  for (int t = 0; t < 6; ++t) {
    const int s = perm[static_cast<std::size_t>(t)];
    EXPECT_LT((c.visual.row(t) - a.visual.row(s)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((c.audio.row(t) - a.audio.row(s)).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_LT((c.video_union - a.video_union).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HanForward, RejectsBadInput) {
  Rng rng(4);
  const ModelParams p = ModelParams::initialized({4, 4, 8, 2, 3}, 5);
  EXPECT_THROW(han_forward(random_features(rng, 3, 5, 4), p), std::invalid_argument);
  FeatureBundle f = random_features(rng, 3, 4, 4);
  f.visual(1, 1) = std::nan("");
  EXPECT_THROW(han_forward(f, p), std::invalid_argument);
  FeatureBundle g{Matrix::Zero(3, 4), Matrix::Zero(2, 4)};
  EXPECT_THROW(han_forward(g, p), std::invalid_argument);
  EXPECT_THROW(ModelParams::initialized({4, 4, 6, 4, 3}, 1), std::invalid_argument);
}

PoolingInputs random_pooling(Rng& rng, int T, int C) {
  PoolingInputs in;
  in.prob_audio = testing::random_probs(rng, T, C, 0, 1);
  in.prob_visual = testing::random_probs(rng, T, C, 0, 1);
  in.temporal_logits_audio = 3 * testing::random_probs(rng, T, C, -1, 1);
  in.temporal_logits_visual = 3 * testing::random_probs(rng, T, C, -1, 1);
  in.modality_logits_audio = 3 * testing::random_probs(rng, C, 1, -1, 1);
  in.modality_logits_visual = 3 * testing::random_probs(rng, C, 1, -1, 1);
  return in;
}

TEST(MmilPool, SingleSegmentPassesThrough) {
  Rng rng(5);
  const PoolingInputs in = random_pooling(rng, 1, 4);
  const PooledPredictions out = mmil_pool(in);
  EXPECT_LT((out.audio - in.prob_audio.row(0).transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((out.visual - in.prob_visual.row(0).transpose()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(MmilPool, UniformAttentionIsTheMean) {
  Rng rng(6);
  PoolingInputs in = random_pooling(rng, 5, 3);
  in.temporal_logits_audio.setConstant(0.7);
  in.temporal_logits_visual.setZero();
  const PooledPredictions out = mmil_pool(in);
  EXPECT_LT((out.audio - in.prob_audio.colwise().mean().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((out.visual - in.prob_visual.colwise().mean().transpose()).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(MmilPool, UnionIsAConvexCombination) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const int T = rng.uniform_int(1, 8), C = rng.uniform_int(1, 6);
    const PooledPredictions out = mmil_pool(random_pooling(rng, T, C));
    for (int c = 0; c < C; ++c) {
      const double lo = std::min(out.audio(c), out.visual(c));
      const double hi = std::max(out.audio(c), out.visual(c));
      EXPECT_GE(out.union_(c), lo - 1e-15);
      EXPECT_LE(out.union_(c), hi + 1e-15);
      const double w = out.audio_weight(c);
      EXPECT_NEAR(out.union_(c), w * out.audio(c) + (1 - w) * out.visual(c), 1e-15);
    }
  }
}

TEST(MmilPool, ShapeMismatch) {
  Rng rng(8);
  PoolingInputs in = random_pooling(rng, 3, 2);
  in.prob_visual = Matrix::Zero(3, 3);
  EXPECT_THROW(mmil_pool(in), std::invalid_argument);
}

struct TinyCase {
  FeatureBundle features;
  LossTargets targets;
  ModelParams params;
};

TinyCase tiny_case(std::uint64_t seed, int T, int C, int d, int heads) {
  ScenarioConfig sc;
  sc.n_videos = 1;
  sc.T = T;
  sc.C = C;
  sc.min_span = 1;
  sc.max_span = T;
  sc.feature_dim = d;
  sc.seed = seed;
  const SyntheticVideo v = generate_scenario(sc).videos.front();
  PlgConfig plg;
  plg.tau = 0.2;
  return {v.features, make_loss_targets(v.labels, generate_pseudo_labels(v.similarity, v.labels, plg), 0.1),
          ModelParams::initialized({d, d, d, heads, C}, seed + 100)};
}

TEST(Gradients, EveryBlockMatchesFiniteDifferences) {
  LossConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TinyCase tc = tiny_case(seed, 3, 3, 8, 2);
    const auto rep = testing::check_model_gradients(tc.features, tc.params, tc.targets, cfg);
    EXPECT_LE(rep.max_rel_err, 1e-3) << "seed " << seed << " worst at " << rep.where;
  }
}

TEST(Binarize, BoundaryAndProduct) {
  PredictionSet p;
  p.audio = Matrix::Constant(2, 2, 0.5);
  p.visual = Matrix::Constant(2, 2, 0.4);
  p.audio_visual = p.audio.cwiseProduct(p.visual);
  const BinaryPrediction b = binarize(p, 0.5);
  EXPECT_EQ(b.audio.sum(), 4);
  EXPECT_EQ(b.visual.sum(), 0);
  EXPECT_EQ(b.audio_visual.sum(), 0);
  EXPECT_THROW(binarize(p, 1.0), std::invalid_argument);
}

TEST(Binarize, AudioVisualImpliesBothOnAGrid) {
  const int n = 201;
  PredictionSet p;
  p.audio = Matrix(n, n);
  p.visual = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      p.audio(i, j) = i / double(n - 1);
      p.visual(i, j) = j / double(n - 1);
    }
  p.audio_visual = p.audio.cwiseProduct(p.visual);
  const BinaryPrediction b = binarize(p, 0.5);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (b.audio_visual(i, j)) {
        EXPECT_EQ(b.audio(i, j), 1);
        EXPECT_EQ(b.visual(i, j), 1);
      }
}

std::vector<TrainingExample> tiny_dataset(int n, std::uint64_t seed) {
  ScenarioConfig sc;
  sc.n_videos = n;
  sc.T = 6;
  sc.C = 4;
  sc.max_span = 4;
  sc.feature_dim = 6;
  sc.seed = seed;
  PlgConfig plg;
  plg.tau = 0.3;
  std::vector<TrainingExample> out;
  for (const auto& v : generate_scenario(sc).videos)
    out.push_back({v.features, v.labels, generate_pseudo_labels(v.similarity, v.labels, plg)});
  return out;
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.d_model = 8;
  cfg.heads = 2;
  cfg.seed = 17;
  return cfg;
}

TEST(Train, DescendsOnASingleVideo) {
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 200;
  const TrainResult r = train(tiny_dataset(1, 5), cfg);
  ASSERT_EQ(r.epoch_loss.size(), 200u);
  EXPECT_LT(r.epoch_loss.back(), r.epoch_loss.front());
}

TEST(Train, SameSeedIsBitwiseIdentical) {
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 5;
  cfg.batch_size = 3;
  const auto data = tiny_dataset(7, 6);
  const TrainResult a = train(data, cfg), b = train(data, cfg);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(a.params.classifier_w, b.params.classifier_w);
  EXPECT_EQ(a.params.self_visual.wq, b.params.self_visual.wq);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 3;
  cfg.learning_rate = 0;
  const auto data = tiny_dataset(3, 7);
  const TrainResult r = train(data, cfg);
  const ModelParams init = ModelParams::initialized(r.params.shape, derive_seed(cfg.seed, 0));
  EXPECT_EQ(r.params.classifier_w, init.classifier_w);
  EXPECT_EQ(r.params.cross_audio.wv, init.cross_audio.wv);
  for (double l : r.epoch_loss) EXPECT_EQ(l, r.epoch_loss.front());
}

TEST(Train, DivergenceReportsEpochAndStep) {
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 50;
  cfg.learning_rate = 1e300;
  try {
    train(tiny_dataset(2, 8), cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_GE(e.epoch(), 0);
    EXPECT_GE(e.step(), 0);
  }
}

TEST(Train, RejectsBadInput) {
  TrainConfig cfg = tiny_train_config();
  EXPECT_THROW(train({}, cfg), std::invalid_argument);
  auto data = tiny_dataset(2, 9);
  data[1].features.visual = Matrix::Zero(6, 3);
  EXPECT_THROW(train(data, cfg), std::invalid_argument);
}

}  // namespace
}  // namespace avvp
