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

#ifndef ACP_TRAINER_H_
#define ACP_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acp/anchors.h"
#include "acp/annotations.h"
#include "acp/evaluation.h"
#include "acp/hoi_space.h"
#include "acp/losses.h"
#include "acp/model.h"
#include "acp/nn/optim.h"
#include "acp/nn/param_store.h"
#include "acp/priors.h"

namespace acp {

struct Dataset {
  HoiSpace space;
  std::vector<AnnotationRecord> train;
  std::vector<AnnotationRecord> test;
  std::vector<PairExample> train_pairs;
  std::vector<PairExample> test_pairs;
};

enum class OptimizerKind { kAdam, kSgd };

struct TrainSettings {
  ModelConfig model;
  LossWeights weights;
  // Cross-entropy of the anchor softmax head against AnchorTarget. Only
  // used by variants that have that head.
  double anchor_ce_weight = 1.0;
  ProjectionConfig projection;
  // Project predictions before scoring at evaluation time.
  bool post_process = false;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double lr = 1e-3;
  int epochs = 30;
  int batch_images = 16;
  int eval_every = 0;  // epochs between evaluations; 0 = final only
  std::optional<int> max_anchors = 15;
  // Anchors come from global priors unless this is set.
  std::optional<AnchorPartition> partition;
  bool grad_check_first_step = false;
};

// Pairs grouped by image, in order of first appearance.
std::vector<std::vector<PairExample>> GroupByImage(
    std::span<const PairExample> pairs);

// Anchors selected on the global priors of `stats`, groups filled.
AnchorPartition PartitionFromStats(const CooccurrenceStats& stats,
                                   std::optional<int> max_anchors);

struct EvalResult {
  EvalReport report;        // default setting
  EvalReport known_object;  // known-object setting
};

struct EpochMetrics {
  int epoch = 0;
  int64_t step = 0;
  double train_loss = 0.0;
  std::optional<EvalResult> eval;
  double map_heldout = 0.0;  // NaN when no held-out classes
};

// One training run: builds priors and (when needed) the anchor partition
// from the training split, then optimizes the configured objective.
class Trainer {
 public:
  // Constant teacher targets for one batch, one matrix per image group.
  struct Teachers {
    std::vector<nn::Matrix> pred;
    std::vector<nn::Matrix> gt;
  };

  Trainer(TrainSettings settings, const Dataset& data, uint64_t seed);

  const TrainSettings& settings() const { return settings_; }
  const HoiModel& model() const { return model_; }
  const nn::ParamStore& store() const { return store_; }
  nn::ParamStore& mutable_store() { return store_; }
  const CooccurrenceStats& stats() const { return stats_; }
  const PriorSource& priors() const { return priors_; }
  const std::vector<double>& step_losses() const { return step_losses_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Forward groups a batch for one pass: one group per image with
  // attention, otherwise all pairs together.
  std::vector<std::vector<PairExample>> MakeGroups(
      std::span<const std::vector<PairExample>* const> images) const;

  Teachers ComputeTeachers(const nn::ParamStore& store,
                           const std::vector<std::vector<PairExample>>& groups)
      const;

  // Mean objective over groups. When `backward` is set, gradients are
  // accumulated into `store`. `fixed` replaces the teachers computed from
  // the current prediction (needed for finite differences).
  double Objective(nn::ParamStore& store,
                   const std::vector<std::vector<PairExample>>& groups,
                   const Teachers* fixed, bool backward) const;
  double ObjectiveValue(const nn::ParamStore& store,
                        const std::vector<std::vector<PairExample>>& groups,
                        const Teachers* fixed) const;

  // One optimizer step on the given images. Returns the batch loss.
  double Step(std::span<const std::vector<PairExample>* const> images);

  // Runs one epoch over the training images in seeded order.
  double TrainEpoch();
  int epochs_done() const { return epochs_done_; }

  // Action probabilities for `pairs`, row-aligned.
  nn::Matrix PredictActions(std::span<const PairExample> pairs) const;
  std::vector<Detection> Detect(std::span<const PairExample> pairs,
                                bool post_process) const;
  EvalResult Evaluate(const Dataset& data, std::span<const int64_t> train_counts,
                      bool post_process) const;

  // Relative error of the analytic gradient on the first training batch.
  double GradCheckFirstBatch(std::size_t max_coords = 2000) const;
  // Set after the first Step when grad_check_first_step is on.
  std::optional<double> first_step_grad_error() const {
    return first_step_grad_error_;
  }
  // Images of the next epoch's batch `b`, as Step would see them.
  std::vector<const std::vector<PairExample>*> Batch(int epoch,
                                                     std::size_t b) const;
  std::size_t num_batches() const;

 private:
  TrainSettings settings_;
  HoiSpace space_;
  CooccurrenceStats stats_;
  PriorSource priors_;
  HoiModel model_;
  nn::ParamStore store_;
  nn::Adam adam_;
  uint64_t seed_;
  std::vector<std::vector<PairExample>> images_;
  std::vector<double> step_losses_;
  std::vector<std::string> warnings_;
  int epochs_done_ = 0;
  int64_t steps_ = 0;
  std::optional<double> first_step_grad_error_;

  // Single-group teachers from already computed action probabilities.
  Teachers ComputeTeachersFromActions(
      const nn::Matrix& actions, const std::vector<PairExample>& pairs) const;
  double ObjectiveImpl(const nn::ParamStore& values, nn::ParamStore* grads,
                       const std::vector<std::vector<PairExample>>& groups,
                       const Teachers* fixed) const;
};

// Seeded permutation of [0, n) used for epoch `epoch` of a run.
std::vector<std::size_t> EpochOrder(uint64_t seed, int epoch, std::size_t n);

struct RunOutputs {
  std::string metrics_csv;  // empty = not written
  std::string checkpoint;   // empty = not written
  std::string label = "run";
};

inline constexpr char kMetricsHeader[] =
    "run,seed,epoch,step,train_loss,map_full,map_rare,map_nonrare,"
    "map_known_full,map_heldout";

// Trains for settings.epochs, evaluating every eval_every epochs and after
// the last. Appends rows to the metrics CSV (header written when the file
// is new). Throws NumericError when the loss stops being finite.
std::vector<EpochMetrics> RunTraining(Trainer& trainer, const Dataset& data,
                                      std::span<const int64_t> train_counts,
                                      std::span<const int> heldout,
                                      const RunOutputs& outputs);

}  // namespace acp

#endif  // ACP_TRAINER_H_
