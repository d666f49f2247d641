// src/trainer.cpp

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

#include <cmath>
#include <numeric>
#include <sstream>

#include "avvp/parser_net.hpp"
#include "avvp/rng.hpp"

namespace avvp {

void TrainConfig::check() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("TrainConfig: Adam betas must lie in [0,1)");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
  loss.check();
}

namespace {

class Adam {
 public:
  Adam(const ModelShape& shape, const TrainConfig& cfg)
      : m_(ModelParams::zeros(shape)), v_(ModelParams::zeros(shape)), cfg_(cfg) {}

  void step(ModelParams& params, ModelParams& grad) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    std::vector<Matrix*> ps, gs, ms, vs;
    params.for_each_block([&](const std::string&, Matrix& x) { ps.push_back(&x); });
    grad.for_each_block([&](const std::string&, Matrix& x) { gs.push_back(&x); });
    m_.for_each_block([&](const std::string&, Matrix& x) { ms.push_back(&x); });
    v_.for_each_block([&](const std::string&, Matrix& x) { vs.push_back(&x); });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      Matrix& m = *ms[i];
      Matrix& v = *vs[i];
      const Matrix& g = *gs[i];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
      *ps[i] -= (cfg_.learning_rate *
                 ((m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.adam_eps)))
                    .matrix();
    }
  }

 private:
  ModelParams m_, v_;
  const TrainConfig& cfg_;
  int t_ = 0;
};

void add_scaled(ModelParams& acc, const ModelParams& g, double scale) {
  std::vector<const Matrix*> src;
  g.for_each_block([&](const std::string&, const Matrix& x) { src.push_back(&x); });
  std::size_t i = 0;
  acc.for_each_block([&](const std::string&, Matrix& x) { x += scale * *src[i++]; });
}

}  // namespace

TrainResult train(const std::vector<TrainingExample>& dataset, const TrainConfig& cfg,
                  const std::function<void(int, double)>& on_epoch) {
  cfg.check();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");

  const TrainingExample& first = dataset.front();
  ModelShape shape;
  shape.audio_dim = static_cast<int>(first.features.audio.cols());
  shape.visual_dim = static_cast<int>(first.features.visual.cols());
  shape.d_model = cfg.d_model;
  shape.heads = cfg.heads;
  shape.classes = first.labels.num_classes();

  std::vector<LossTargets> targets;
  targets.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const TrainingExample& ex = dataset[i];
    ex.features.check();
    if (ex.features.audio.cols() != shape.audio_dim ||
        ex.features.visual.cols() != shape.visual_dim ||
        ex.labels.num_classes() != shape.classes ||
        ex.features.num_segments() != ex.labels.num_segments()) {
      std::ostringstream os;
      os << "train: example " << i << " has dimensions inconsistent with example 0";
      throw std::invalid_argument(os.str());
    }
    if (ex.labels.num_positive() == 0) {
      std::ostringstream os;
      os << "train: example " << i << " has an empty video label";
      throw std::invalid_argument(os.str());
    }
    targets.push_back(make_loss_targets(ex.labels, ex.pseudo, cfg.smoothing_eps));
  }

  TrainResult result{ModelParams::initialized(shape, derive_seed(cfg.seed, 0)), {}};
  Adam adam(shape, cfg);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));
  std::vector<std::size_t> order(dataset.size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    double epoch_sum = 0.0;
    int step = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size), ++step) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      ModelParams grad = ModelParams::zeros(shape);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        auto diverged = [&](const std::string& what) {
          std::ostringstream os;
          os << "train: " << what << " at epoch " << epoch << ", step " << step
             << " (example " << i << ")";
          return TrainingDiverged(epoch, step, os.str());
        };
        VideoLoss vl;
        try {
          vl = video_loss_and_grad(dataset[i].features, result.params, targets[i], cfg.loss);
        } catch (const std::runtime_error& e) {
          // the forward pass rejects overflowed activations
          throw diverged(e.what());
        }
        if (!std::isfinite(vl.loss.total)) throw diverged("non-finite loss");
        epoch_sum += vl.loss.total;
        add_scaled(grad, vl.grad, scale);
      }
      adam.step(result.params, grad);
      bool finite = true;
      result.params.for_each_block(
          [&](const std::string&, const Matrix& m) { finite = finite && m.allFinite(); });
      if (!finite) {
        std::ostringstream os;
        os << "train: parameters became non-finite at epoch " << epoch << ", step "
           << step;
        throw TrainingDiverged(epoch, step, os.str());
      }
    }
    const double mean = epoch_sum / static_cast<double>(dataset.size());
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace avvp
