// tests/support/fd_oracle.hpp

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

#ifndef AVVP_TESTS_FD_ORACLE_HPP_
#define AVVP_TESTS_FD_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "avvp/label_model.hpp"
#include "avvp/parser_net.hpp"
#include "avvp/richness_loss.hpp"

namespace avvp::testing {

// Relative error with an absolute floor, so entries whose true gradient is
// ~0 are compared on an absolute scale.
inline double rel_err(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Central differences of f with respect to every entry of x; x is restored.
template <typename M>
M central_diff(M& x, const std::function<double()>& f, double h = 1e-6) {
  M g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double keep = x(i, j);
      x(i, j) = keep + h;
      const double up = f();
      x(i, j) = keep - h;
      const double down = f();
      x(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

struct GradReport {
  double max_rel_err = 0.0;
  std::string where;

  void update(const Matrix& analytic, const Matrix& numeric, const std::string& name) {
    for (Eigen::Index i = 0; i < analytic.rows(); ++i)
      for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
        const double e = rel_err(analytic(i, j), numeric(i, j));
        if (e > max_rel_err) {
          max_rel_err = e;
          where = name + "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        }
      }
  }
};

// Checks loss_total gradients against every parameter block of the parser.
inline GradReport check_model_gradients(const FeatureBundle& features, ModelParams params,
                                        const LossTargets& targets, const LossConfig& cfg) {
  const VideoLoss vl = video_loss_and_grad(features, params, targets, cfg);
  auto loss = [&] {
    const PredictionSet p = han_forward(features, params);
    return loss_total({p.visual, p.video_union, p.video_audio, p.video_visual}, targets, cfg)
        .total;
  };
  GradReport rep;
  ModelParams grad = vl.grad;
  std::vector<std::pair<std::string, Matrix*>> analytic;
  grad.for_each_block([&](const std::string& n, Matrix& m) { analytic.emplace_back(n, &m); });
  std::size_t k = 0;
  params.for_each_block([&](const std::string& n, Matrix& m) {
    rep.update(*analytic[k++].second, central_diff(m, loss), n);
  });
  return rep;
}

// Checks loss_total gradients against the predictions themselves.
inline GradReport check_prediction_gradients(LossInputs in, const LossTargets& targets,
                                             const LossConfig& cfg) {
  const LossResult r = loss_total(in, targets, cfg);
  auto loss = [&] { return loss_total(in, targets, cfg).total; };
  GradReport rep;
  rep.update(r.grad.segment_visual, central_diff(in.segment_visual, loss), "segment_visual");
  rep.update(r.grad.video_union, central_diff(in.video_union, loss), "video_union");
  rep.update(r.grad.video_audio, central_diff(in.video_audio, loss), "video_audio");
  rep.update(r.grad.video_visual, central_diff(in.video_visual, loss), "video_visual");
  return rep;
}

}  // namespace avvp::testing

#endif  // AVVP_TESTS_FD_ORACLE_HPP_
