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

#include <gtest/gtest.h>

#include <cmath>

#include "acp/nn/ops.h"
#include "acp/nn/optim.h"
#include "acp/synth.h"
#include "acp/trainer.h"

namespace acp {
namespace {

Dataset TinyData(int images = 60) {
  SynthConfig cfg;
  cfg.n_train_images = images;
  cfg.n_test_images = 20;
  cfg.rare_max_count = 1;
  SynthDataset s = SynthGenerate(cfg);
  return {s.space, s.train, s.test, s.train_pairs, s.test_pairs};
}

TrainSettings Plain() {
  TrainSettings t;
  t.model.variant = Variant::kModified;
  t.model.dims.hidden = 16;
  t.model.dims.attn_proj = 8;
  t.weights.lambda0 = t.weights.lambda2 = t.weights.lambda3 = 0.0;
  t.lr = 1e-2;
  t.batch_images = 8;
  return t;
}

TEST(Trainer, FitsSmallTrainingSet) {
  const Dataset data = TinyData(40);
  Trainer trainer(Plain(), data, 3);
  const double first = trainer.TrainEpoch();
  double last = first;
  for (int e = 0; e < 60; ++e) last = trainer.TrainEpoch();
  EXPECT_LT(last, 0.5 * first);
}

TEST(Trainer, DeterministicPerSeed) {
  const Dataset data = TinyData();
  TrainSettings s = Plain();
  s.model.variant = Variant::kHierarchical;
  s.model.attention = true;
  s.weights = LossWeights{};
  Trainer a(s, data, 9), b(s, data, 9), c(s, data, 10);
  for (int e = 0; e < 2; ++e) {
    a.TrainEpoch();
    b.TrainEpoch();
    c.TrainEpoch();
  }
  EXPECT_EQ(a.step_losses(), b.step_losses());
  EXPECT_EQ(a.store().Checksum(), b.store().Checksum());
  EXPECT_NE(a.step_losses(), c.step_losses());
}

TEST(Trainer, EpochOrderIsAPermutation) {
  auto order = EpochOrder(4, 2, 50);
  EXPECT_EQ(order, EpochOrder(4, 2, 50));
  EXPECT_NE(order, EpochOrder(4, 3, 50));
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
}

// Reference loop: modified model, plain BCE on the joint scores, Adam.
TEST(Trainer, ReducesToPlainBceWhenDistillationIsOff) {
  const Dataset data = TinyData();
  const uint64_t seed = 5;
  Trainer trainer(Plain(), data, seed);
  const HoiSpace& space = data.space;
  HoiModel ref(trainer.model().config(), space);
  nn::ParamStore store(seed);
  ref.InitParams(store);
  ASSERT_EQ(store.Checksum(), trainer.store().Checksum());
  nn::Adam adam(nn::AdamOptions{trainer.settings().lr});
  for (int epoch = 0; epoch < 2; ++epoch) {
    for (std::size_t b = 0; b < trainer.num_batches(); ++b) {
      const auto batch = trainer.Batch(epoch, b);
      std::vector<PairExample> pairs;
      for (const auto* img : batch) pairs.insert(pairs.end(), img->begin(), img->end());
      const HoiModel::Pass pass = ref.Forward(store, pairs);
      const std::size_t n = pairs.size(), m = space.num_classes();
      nn::Matrix y(n, m), t(n, m);
      for (std::size_t r = 0; r < n; ++r) {
        const PairExample& p = pairs[r];
        for (int a = 0; a < space.num_actions(); ++a) {
          const auto cls = space.ClassIndex(p.object, a);
          if (!cls) continue;
          y(r, *cls) = p.det_h * p.det_o * pass.action_probs(r, a);
        }
        for (int a : p.gt_actions) t(r, *space.ClassIndex(p.object, a)) = 1.0;
      }
      const nn::LossValue bce = nn::Bce(y, t);
      nn::Matrix grad_a(n, space.num_actions());
      for (std::size_t r = 0; r < n; ++r) {
        const PairExample& p = pairs[r];
        for (int a = 0; a < space.num_actions(); ++a) {
          if (const auto cls = space.ClassIndex(p.object, a)) {
            grad_a(r, a) = p.det_h * p.det_o * bce.grad(r, *cls);
          }
        }
      }
      ref.Backward(store, pass, {grad_a, {}, {}});
      adam.Step(store);
      const double got = trainer.Step(batch);
      ASSERT_NEAR(got, bce.value, 1e-12) << "epoch " << epoch << " batch " << b;
    }
  }
}

TEST(Trainer, FirstBatchGradientMatchesFiniteDifferences) {
  const Dataset data = TinyData(30);
  TrainSettings s = Plain();
  s.model.variant = Variant::kHierarchical;
  s.model.attention = true;
  s.model.emb_head = true;
  s.weights = LossWeights{};
  Trainer trainer(s, data, 2);
  EXPECT_LT(trainer.GradCheckFirstBatch(400), 1e-4);
}

TEST(Trainer, EvaluateReportsBothSettings) {
  const Dataset data = TinyData();
  Trainer trainer(Plain(), data, 1);
  trainer.TrainEpoch();
  const auto counts = CountClassInstances(data.train, data.space);
  const EvalResult r = trainer.Evaluate(data, counts, false);
  EXPECT_GE(r.known_object.map_full, r.report.map_full - 1e-12);
  EXPECT_GE(r.report.map_full, 0.0);
  EXPECT_LE(r.report.map_full, 1.0);
}

}  // namespace
}  // namespace acp
