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

#include "acp/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "acp/errors.h"
#include "acp/nn/checkpoint.h"
#include "acp/nn/grad_check.h"

namespace acp {

using nn::Matrix;
using nn::ParamStore;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<AnchorPartition> MaybePartition(const TrainSettings& s,
                                              const CooccurrenceStats& stats) {
  if (!NeedsPartition(s.model.variant)) return std::nullopt;
  if (s.partition) return s.partition;
  return PartitionFromStats(stats, s.max_anchors);
}

ModelConfig WithDataDims(ModelConfig config, const Dataset& data) {
  if (data.train_pairs.empty()) return config;
  const PairExample& p = data.train_pairs.front();
  config.dims.d_h = static_cast<int>(p.x_h.size());
  config.dims.d_o = static_cast<int>(p.x_o.size());
  config.dims.d_k = static_cast<int>(p.k.size());
  config.dims.d_b = static_cast<int>(p.b.size());
  config.dims.d_e = static_cast<int>(p.o_embed.size());
  return config;
}

void ValidateSettings(const TrainSettings& s) {
  s.weights.Validate();
  s.projection.Validate();
  if (s.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (s.batch_images < 1) throw ConfigError("batch_images must be >= 1");
  if (!(s.lr > 0.0)) throw ConfigError("lr must be positive");
  if (s.eval_every < 0) throw ConfigError("eval_every must be >= 0");
  if (!(s.anchor_ce_weight >= 0.0)) {
    throw ConfigError("anchor_ce_weight must be >= 0");
  }
  if (s.max_anchors && *s.max_anchors == 0) {
    throw ConfigError("max_anchors must be positive (or unlimited)");
  }
}

std::string FormatReal(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::vector<std::vector<PairExample>> GroupByImage(
    std::span<const PairExample> pairs) {
  std::vector<std::vector<PairExample>> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const PairExample& p : pairs) {
    auto [it, fresh] = index.try_emplace(p.image_id, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(p);
  }
  return out;
}

AnchorPartition PartitionFromStats(const CooccurrenceStats& stats,
                                   std::optional<int> max_anchors) {
  const PriorMatrices global = BuildPriors(stats.global, PriorScope::Global());
  const std::vector<int> e = Exclusiveness(global);
  return BuildGroups(global, SelectAnchors(global, e, max_anchors),
                     stats.global);
}

std::vector<std::size_t> EpochOrder(uint64_t seed, int epoch, std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL *
                              static_cast<uint64_t>(epoch + 1)));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

Trainer::Trainer(TrainSettings settings, const Dataset& data, uint64_t seed)
    : settings_((ValidateSettings(settings), std::move(settings))),
      space_(data.space),
      stats_(CountLabelStats(data.train, data.space)),
      priors_(stats_, settings_.projection.use_per_object),
      model_(WithDataDims(settings_.model, data), space_,
             MaybePartition(settings_, stats_)),
      store_(seed),
      adam_(nn::AdamOptions{settings_.lr}),
      seed_(seed),
      images_(GroupByImage(data.train_pairs)) {
  settings_.model = model_.config();
  model_.InitParams(store_);
  warnings_ = priors_.warnings();
  if (const auto& p = model_.partition(); p && !p->uncovered.empty()) {
    std::string msg = "regular actions reachable only through 'other':";
    for (int a : p->uncovered) msg += " " + space_.action_name(a);
    warnings_.push_back(msg);
  }
}

std::vector<std::vector<PairExample>> Trainer::MakeGroups(
    std::span<const std::vector<PairExample>* const> images) const {
  std::vector<std::vector<PairExample>> groups;
  if (settings_.model.attention) {
    for (const auto* img : images) groups.push_back(*img);
  } else {
    std::vector<PairExample> all;
    for (const auto* img : images) all.insert(all.end(), img->begin(), img->end());
    if (!all.empty()) groups.push_back(std::move(all));
  }
  return groups;
}

Trainer::Teachers Trainer::ComputeTeachersFromActions(
    const Matrix& actions, const std::vector<PairExample>& pairs) const {
  Teachers t;
  Matrix pred(pairs.size(), space_.num_classes());
  Matrix gt(pairs.size(), space_.num_classes());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto tp = TeacherFromPrediction(actions.row(r), pairs[r], priors_,
                                          settings_.projection, space_);
    const auto tg = TeacherFromGroundTruth(pairs[r], priors_,
                                           settings_.projection, space_);
    std::copy(tp.begin(), tp.end(), pred.row(r).begin());
    std::copy(tg.begin(), tg.end(), gt.row(r).begin());
  }
  t.pred.push_back(std::move(pred));
  t.gt.push_back(std::move(gt));
  return t;
}

Trainer::Teachers Trainer::ComputeTeachers(
    const ParamStore& store,
    const std::vector<std::vector<PairExample>>& groups) const {
  Teachers t;
  for (const auto& pairs : groups) {
    Teachers one = ComputeTeachersFromActions(
        model_.Forward(store, pairs).action_probs, pairs);
    t.pred.push_back(std::move(one.pred.front()));
    t.gt.push_back(std::move(one.gt.front()));
  }
  return t;
}

double Trainer::ObjectiveImpl(
    const ParamStore& values, ParamStore* grads,
    const std::vector<std::vector<PairExample>>& groups,
    const Teachers* fixed) const {
  if (groups.empty()) return 0.0;
  const LossWeights& w = settings_.weights;
  const double scale = 1.0 / static_cast<double>(groups.size());
  const bool use_emb = settings_.model.emb_head && w.lambda0 > 0.0;
  const bool use_ce =
      model_.has_anchor_head() && settings_.anchor_ce_weight > 0.0;
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& pairs = groups[g];
    HoiModel::Pass pass = model_.Forward(values, pairs);
    const Matrix y = JointHoiBatch(pass.action_probs, pairs, space_);
    Matrix gt(pairs.size(), space_.num_classes());
    for (std::size_t r = 0; r < pairs.size(); ++r) {
      const auto row = GroundTruthHoi(pairs[r], space_);
      std::copy(row.begin(), row.end(), gt.row(r).begin());
    }
    Matrix pred_teacher, gt_teacher;
    if (w.lambda2 > 0.0 || w.lambda3 > 0.0) {
      if (fixed) {
        pred_teacher = fixed->pred.at(g);
        gt_teacher = fixed->gt.at(g);
      } else {
        Teachers t = ComputeTeachersFromActions(pass.action_probs, pairs);
        pred_teacher = std::move(t.pred.front());
        gt_teacher = std::move(t.gt.front());
      }
    }
    const nn::LossValue distill =
        DistillLoss(y, gt, pred_teacher, gt_teacher, w);
    double emb_value = 0.0;
    HoiModel::OutputGrads og;
    if (use_emb) {
      nn::LossValue emb = EmbLossBatch(pass.embed, pairs);
      emb_value = emb.value;
      og.embed = emb.grad * (w.lambda0 * scale);
    }
    double loss = TotalLoss(distill.value, emb_value, w);
    double ce_value = 0.0;
    if (use_ce) {
      Matrix target(pairs.size(), model_.partition()->num_anchors() + 1);
      for (std::size_t r = 0; r < pairs.size(); ++r) {
        const auto t = AnchorTarget(pairs[r].gt_actions, *model_.partition());
        std::copy(t.begin(), t.end(), target.row(r).begin());
      }
      nn::LossValue ce = nn::CeSoftmax(pass.anchor.output, target);
      ce_value = ce.value;
      loss += settings_.anchor_ce_weight * ce.value;
      og.anchor_logits = ce.grad * (settings_.anchor_ce_weight * scale);
    }
    if (!std::isfinite(loss)) {
      std::string dump = "non-finite loss (distill " +
                         std::to_string(distill.value) + ", emb " +
                         std::to_string(emb_value) + ", anchor ce " +
                         std::to_string(ce_value) + ") on pairs of images:";
      for (const PairExample& p : pairs) dump += " " + p.image_id;
      throw NumericError(dump);
    }
    total += scale * loss;
    if (grads) {
      og.action = JointHoiBackward(distill.grad * scale, pairs, space_);
      model_.Backward(*grads, pass, og);
    }
  }
  return total;
}

double Trainer::Objective(ParamStore& store,
                          const std::vector<std::vector<PairExample>>& groups,
                          const Teachers* fixed, bool backward) const {
  return ObjectiveImpl(store, backward ? &store : nullptr, groups, fixed);
}

double Trainer::ObjectiveValue(
    const ParamStore& store,
    const std::vector<std::vector<PairExample>>& groups,
    const Teachers* fixed) const {
  return ObjectiveImpl(store, nullptr, groups, fixed);
}

std::size_t Trainer::num_batches() const {
  const std::size_t b = static_cast<std::size_t>(settings_.batch_images);
  return (images_.size() + b - 1) / b;
}

std::vector<const std::vector<PairExample>*> Trainer::Batch(
    int epoch, std::size_t b) const {
  const auto order = EpochOrder(seed_, epoch, images_.size());
  const std::size_t size = static_cast<std::size_t>(settings_.batch_images);
  std::vector<const std::vector<PairExample>*> out;
  for (std::size_t i = b * size; i < std::min(order.size(), (b + 1) * size);
       ++i) {
    out.push_back(&images_[order[i]]);
  }
  return out;
}

double Trainer::Step(std::span<const std::vector<PairExample>* const> images) {
  const auto groups = MakeGroups(images);
  if (settings_.grad_check_first_step && steps_ == 0) {
    first_step_grad_error_ = GradCheckFirstBatch();
  }
  const double loss = Objective(store_, groups, nullptr, true);
  if (settings_.optimizer == OptimizerKind::kAdam) {
    adam_.Step(store_);
  } else {
    nn::SgdStep(store_, settings_.lr);
  }
  ++steps_;
  step_losses_.push_back(loss);
  return loss;
}

double Trainer::TrainEpoch() {
  const auto order = EpochOrder(seed_, epochs_done_, images_.size());
  const std::size_t size = static_cast<std::size_t>(settings_.batch_images);
  double sum = 0.0;
  std::size_t count = 0;
  std::vector<const std::vector<PairExample>*> batch;
  for (std::size_t start = 0; start < order.size(); start += size) {
    batch.clear();
    for (std::size_t i = start; i < std::min(order.size(), start + size); ++i) {
      batch.push_back(&images_[order[i]]);
    }
    sum += Step(batch);
    ++count;
  }
  ++epochs_done_;
  return count ? sum / count : 0.0;
}

double Trainer::GradCheckFirstBatch(std::size_t max_coords) const {
  if (images_.empty()) return 0.0;
  const auto batch = Batch(0, 0);
  const auto groups = MakeGroups(batch);
  ParamStore probe = store_;
  probe.ZeroGrad();
  const Teachers teachers = ComputeTeachers(probe, groups);
  Objective(probe, groups, &teachers, true);
  nn::GradCheckOptions options;
  options.max_coords = max_coords;
  options.seed = seed_;
  return nn::FiniteDiffCheck(
             [&](const ParamStore& s) {
               return ObjectiveValue(s, groups, &teachers);
             },
             probe, options)
      .max_rel_error;
}

Matrix Trainer::PredictActions(std::span<const PairExample> pairs) const {
  Matrix out(pairs.size(), space_.num_actions());
  auto scatter = [&](const std::vector<std::size_t>& idx) {
    std::vector<PairExample> group;
    for (std::size_t i : idx) group.push_back(pairs[i]);
    const Matrix a = model_.Forward(store_, group).action_probs;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      std::copy(a.row(r).begin(), a.row(r).end(), out.row(idx[r]).begin());
    }
  };
  if (settings_.model.attention) {
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto [it, fresh] = slot.try_emplace(pairs[i].image_id, groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(i);
    }
    for (const auto& g : groups) scatter(g);
  } else {
    constexpr std::size_t kChunk = 512;
    for (std::size_t start = 0; start < pairs.size(); start += kChunk) {
      std::vector<std::size_t> idx;
      for (std::size_t i = start; i < std::min(pairs.size(), start + kChunk);
           ++i) {
        idx.push_back(i);
      }
      scatter(idx);
    }
  }
  return out;
}

std::vector<Detection> Trainer::Detect(std::span<const PairExample> pairs,
                                       bool post_process) const {
  const Matrix actions = PredictActions(pairs);
  std::vector<Detection> dets;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const PairExample& p = pairs[r];
    const std::vector<double> scores =
        post_process ? PostProcess(actions.row(r), p, priors_,
                                   settings_.projection, space_)
                           .hoi_scores
                     : JointHoi(actions.row(r), p, space_);
    for (int m : space_.ClassesForObject(p.object)) {
      dets.push_back({p.image_id, m, scores[m], p.human_box, p.object_box});
    }
  }
  return dets;
}

EvalResult Trainer::Evaluate(const Dataset& data,
                             std::span<const int64_t> train_counts,
                             bool post_process) const {
  const auto dets = Detect(data.test_pairs, post_process);
  return {acp::Evaluate(dets, data.test, space_, EvalSetting::kDefault,
                        train_counts),
          acp::Evaluate(dets, data.test, space_, EvalSetting::kKnownObject,
                        train_counts)};
}

std::vector<EpochMetrics> RunTraining(Trainer& trainer, const Dataset& data,
                                      std::span<const int64_t> train_counts,
                                      std::span<const int> heldout,
                                      const RunOutputs& outputs) {
  const TrainSettings& s = trainer.settings();
  std::vector<EpochMetrics> rows;
  auto evaluate = [&](EpochMetrics& row) {
    row.eval = trainer.Evaluate(data, train_counts, s.post_process);
    row.map_heldout = heldout.empty() ? kNaN : MeanAp(row.eval->report, heldout);
  };
  int64_t step = 0;
  try {
    if (s.epochs == 0) {
      EpochMetrics row;
      evaluate(row);
      rows.push_back(std::move(row));
    }
    for (int epoch = 1; epoch <= s.epochs; ++epoch) {
      EpochMetrics row;
      row.epoch = epoch;
      row.train_loss = trainer.TrainEpoch();
      step += static_cast<int64_t>(trainer.num_batches());
      row.step = step;
      if ((s.eval_every > 0 && epoch % s.eval_every == 0) ||
          epoch == s.epochs) {
        evaluate(row);
      }
      rows.push_back(std::move(row));
    }
  } catch (const NumericError& e) {
    if (!outputs.metrics_csv.empty()) {
      WriteStringToFile(outputs.metrics_csv + ".nonfinite.txt",
                        std::string(e.what()) + "\n");
    }
    throw;
  }

  if (!outputs.metrics_csv.empty()) {
    const bool fresh = !std::filesystem::exists(outputs.metrics_csv);
    std::ofstream out(outputs.metrics_csv, std::ios::app);
    if (!out) throw IoError("cannot write '" + outputs.metrics_csv + "'");
    if (fresh) out << kMetricsHeader << '\n';
    for (const EpochMetrics& r : rows) {
      out << outputs.label << ',' << trainer.store().seed() << ',' << r.epoch
          << ',' << r.step << ',' << FormatReal(r.train_loss) << ',';
      if (r.eval) {
        out << FormatReal(r.eval->report.map_full) << ','
            << FormatReal(r.eval->report.map_rare) << ','
            << FormatReal(r.eval->report.map_nonrare) << ','
            << FormatReal(r.eval->known_object.map_full) << ','
            << FormatReal(r.map_heldout);
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
  }
  if (!outputs.checkpoint.empty()) {
    nn::SaveCheckpoint(trainer.store(), outputs.checkpoint);
  }
  return rows;
}

}  // namespace acp
