// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "acp/losses.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "acp/errors.h"

namespace acp {

using nn::Matrix;

void ProjectionConfig::Validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0)) {
    throw ConfigError("projection alpha and beta must be non-negative");
  }
  if (std::abs(alpha + beta - 2.0) > 1e-12) {
    throw ConfigError("projection requires alpha + beta = 2");
  }
  if (!(alpha > beta)) throw ConfigError("projection requires alpha > beta");
}

void LossWeights::Validate() const {
  for (double l : {lambda0, lambda1, lambda2, lambda3}) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw ConfigError("loss weights must be finite and non-negative");
    }
  }
  if (!(lambda1 > 0.0)) throw ConfigError("lambda1 must be positive");
}

std::vector<double> Project(std::span<const double> a,
                            const PriorMatrices& priors,
                            const ProjectionConfig& cfg) {
  const int n = priors.num_actions;
  if (static_cast<int>(a.size()) != n) {
    throw ContractError("projection input has " + std::to_string(a.size()) +
                        " entries, priors have " + std::to_string(n));
  }
  for (double v : a) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ContractError("projection input outside [0, 1]");
    }
  }
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double on = cfg.alpha * a[i];
    const double off = cfg.beta * (1.0 - a[i]);
    for (int j = 0; j < n; ++j) {
      out[j] += on * priors.c(i, j) + off * priors.c_comp(i, j);
    }
  }
  for (double& v : out) v /= n;
  return out;
}

PriorSource::PriorSource(const CooccurrenceStats& stats, bool use_per_object)
    : use_per_object_(use_per_object),
      global_(BuildPriors(stats.global, PriorScope::Global())) {
  if (!use_per_object_) return;
  for (std::size_t o = 0; o < stats.per_object.size(); ++o) {
    const LabelCounts& c = stats.per_object[o];
    has_stats_.push_back(c.n_images > 0);
    per_object_.push_back(
        BuildPriors(c, PriorScope::Object(static_cast<int>(o))));
    if (c.n_images == 0) {
      warnings_.push_back("object " + std::to_string(o) +
                          " has no training images; using global priors");
    }
  }
}

const PriorMatrices& PriorSource::For(int object) const {
  if (!use_per_object_ || object < 0 ||
      object >= static_cast<int>(per_object_.size()) || !has_stats_[object]) {
    return global_;
  }
  return per_object_[object];
}

Matrix JointHoiBatch(const Matrix& action_probs,
                     std::span<const PairExample> pairs,
                     const HoiSpace& space) {
  if (action_probs.rows() != pairs.size()) {
    throw ShapeError("joint scores need one action row per pair");
  }
  Matrix y(pairs.size(), space.num_classes());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const double det = pairs[r].det_h * pairs[r].det_o;
    for (int m : space.ClassesForObject(pairs[r].object)) {
      y(r, m) = det * action_probs(r, space.hoi_class(m).action);
    }
  }
  return y;
}

Matrix JointHoiBackward(const Matrix& grad_hoi,
                        std::span<const PairExample> pairs,
                        const HoiSpace& space) {
  Matrix d(pairs.size(), space.num_actions());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const double det = pairs[r].det_h * pairs[r].det_o;
    for (int m : space.ClassesForObject(pairs[r].object)) {
      d(r, space.hoi_class(m).action) += det * grad_hoi(r, m);
    }
  }
  return d;
}

std::vector<double> GroundTruthHoi(const PairExample& pair,
                                   const HoiSpace& space) {
  std::vector<double> y(space.num_classes(), 0.0);
  for (int a : pair.gt_actions) {
    if (auto m = space.ClassIndex(pair.object, a)) y[*m] = 1.0;
  }
  return y;
}

namespace {

std::vector<double> Clamp01(std::vector<double> v) {
  for (double& x : v) x = std::clamp(x, 0.0, 1.0);
  return v;
}

}  // namespace

std::vector<double> TeacherFromPrediction(std::span<const double> action_probs,
                                          const PairExample& pair,
                                          const PriorSource& priors,
                                          const ProjectionConfig& cfg,
                                          const HoiSpace& space) {
  const auto projected = Project(action_probs, priors.For(pair.object), cfg);
  return Clamp01(JointHoi(projected, pair, space));
}

std::vector<double> TeacherFromGroundTruth(const PairExample& pair,
                                           const PriorSource& priors,
                                           const ProjectionConfig& cfg,
                                           const HoiSpace& space) {
  std::vector<double> a(space.num_actions(), 0.0);
  for (int i : pair.gt_actions) a[i] = 1.0;
  const auto projected = Project(a, priors.For(pair.object), cfg);
  return Clamp01(JointHoi(projected, 1.0, 1.0, pair.object, space));
}

nn::LossValue DistillLoss(const Matrix& pred, const Matrix& gt,
                          const Matrix& pred_teacher, const Matrix& gt_teacher,
                          const LossWeights& w) {
  nn::LossValue total{0.0, Matrix(pred.rows(), pred.cols())};
  auto add = [&](double weight, const Matrix& target) {
    if (weight == 0.0) return;
    nn::RequireSameShape(pred, target, "distillation target");
    nn::LossValue term = nn::Bce(pred, target);
    total.value += weight * term.value;
    total.grad += term.grad * weight;
  };
  add(w.lambda1, gt);
  add(w.lambda2, pred_teacher);
  add(w.lambda3, gt_teacher);
  return total;
}

double EmbLoss(std::span<const double> o_embed, std::span<const double> v) {
  if (o_embed.size() != v.size()) {
    throw ShapeError("embedding and regressed vector differ in length");
  }
  double s = 0.0;
  for (std::size_t d = 0; d < v.size(); ++d) s += o_embed[d] * v[d];
  // -log sigmoid(s) = log(1 + exp(-s)), written stably.
  return s >= 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

nn::LossValue EmbLossBatch(const Matrix& v, std::span<const PairExample> pairs) {
  if (v.rows() != pairs.size()) {
    throw ShapeError("embedding loss needs one row per pair");
  }
  nn::LossValue out{0.0, Matrix(v.rows(), v.cols())};
  if (pairs.empty()) return out;
  const double scale = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& o = pairs[r].o_embed;
    auto row = v.row(r);
    out.value += EmbLoss(o, row);
    double s = 0.0;
    for (std::size_t d = 0; d < row.size(); ++d) s += o[d] * row[d];
    const double coeff = -(1.0 - nn::Sigmoid(s)) * scale;
    for (std::size_t d = 0; d < row.size(); ++d) out.grad(r, d) = coeff * o[d];
  }
  out.value *= scale;
  return out;
}

double TotalLoss(double distill, double emb, const LossWeights& w) {
  return distill + w.lambda0 * emb;
}

PostProcessed PostProcess(std::span<const double> action_probs,
                          const PairExample& pair, const PriorSource& priors,
                          const ProjectionConfig& cfg, const HoiSpace& space) {
  PostProcessed out;
  out.action_probs = Project(action_probs, priors.For(pair.object), cfg);
  out.hoi_scores = JointHoi(out.action_probs, pair, space);
  return out;
}

std::string ProjectionRowsToCsv(const std::vector<ProjectionRow>& rows) {
  std::string out = "image_id,hoi_class,score_before,score_after\n";
  char buf[96];
  for (const ProjectionRow& r : rows) {
    std::snprintf(buf, sizeof(buf), ",%d,%.17g,%.17g\n", r.hoi_class,
                  r.score_before, r.score_after);
    out += r.image_id;
    out += buf;
  }
  return out;
}

}  // namespace acp
