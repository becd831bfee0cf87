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
#include <random>

#include "acp/errors.h"
#include "acp/model.h"
#include "acp/nn/grad_check.h"
#include "test_util.h"

namespace acp {
namespace {

using nn::Matrix;
using nn::ParamStore;

// Five actions: anchors 0 and 1, regulars 2..4.
AnchorPartition SmallPartition() {
  AnchorPartition p;
  p.num_actions = 5;
  p.anchors = {0, 1};
  p.regular = {2, 3, 4};
  p.groups = {{2, 3}, {3}, {4}};
  return p;
}

HoiSpace SmallSpace() { return testing::DenseSpace(5, 2); }

ModelConfig SmallConfig(Variant v, bool attention = false, bool emb = false) {
  ModelConfig c;
  c.variant = v;
  c.attention = attention;
  c.emb_head = emb;
  c.dims = {.d_h = 3, .d_o = 3, .d_k = 2, .d_b = 2, .d_e = 2, .hidden = 5,
            .attn_proj = 3};
  return c;
}

std::vector<double> Normal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

PairExample RandomPair(std::mt19937_64& rng, const ModelDims& d, int object) {
  PairExample p;
  p.image_id = "img";
  p.x_h = Normal(rng, d.d_h);
  p.x_o = Normal(rng, d.d_o);
  p.k = Normal(rng, d.d_k);
  p.b = Normal(rng, d.d_b);
  p.o_embed = Normal(rng, d.d_e);
  p.object = object;
  p.det_h = 0.9;
  p.det_o = 0.7;
  return p;
}

std::vector<PairExample> RandomBatch(std::mt19937_64& rng, const ModelDims& d,
                                     int count) {
  std::vector<PairExample> out;
  for (int i = 0; i < count; ++i) out.push_back(RandomPair(rng, d, i % 2));
  return out;
}

TEST(Variant, ParseAndNames) {
  for (Variant v : {Variant::kBaseline, Variant::kModified, Variant::kMultiTask,
                    Variant::kTwoStream, Variant::kHierarchical}) {
    EXPECT_EQ(ParseVariant(VariantName(v)), v);
  }
  EXPECT_THROW(ParseVariant("deep"), ConfigError);
  EXPECT_TRUE(NeedsPartition(Variant::kHierarchical));
  EXPECT_FALSE(NeedsPartition(Variant::kModified));
}

TEST(HoiModel, ConfigurationErrors) {
  EXPECT_THROW(HoiModel(SmallConfig(Variant::kHierarchical), SmallSpace()),
               ConfigError);
  EXPECT_THROW(HoiModel(SmallConfig(Variant::kBaseline, true), SmallSpace()),
               ConfigError);
  AnchorPartition no_groups = SmallPartition();
  no_groups.groups.clear();
  EXPECT_THROW(
      HoiModel(SmallConfig(Variant::kTwoStream), SmallSpace(), no_groups),
      ConfigError);
}

TEST(Compose, HandCaseOneAnchor) {
  AnchorPartition p;
  p.num_actions = 2;
  p.anchors = {0};
  p.regular = {1};
  p.groups = {{1}, {1}};
  const std::vector<double> anchors = {0.7, 0.3};
  const auto out = ComposeHierarchical(anchors, {{0.5}, {0.2}}, p, true);
  EXPECT_NEAR(out[1], 0.41, 1e-15);
  EXPECT_EQ(out[0], 0.7);
}

TEST(Compose, AllOnesGivesOne) {
  AnchorPartition p = SmallPartition();
  p.groups = {{2, 3, 4}, {2, 3, 4}, {2, 3, 4}};
  const std::vector<double> anchors = {0.2, 0.5, 0.3};
  const auto out =
      ComposeHierarchical(anchors, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}, p, true);
  for (int j : {2, 3, 4}) EXPECT_NEAR(out[j], 1.0, 1e-15);
  EXPECT_THROW(ComposeHierarchical(std::vector<double>{1.0}, {{1, 1, 1}}, p,
                                   true),
               ShapeError);
}

TEST(Compose, MaskDropsOutOfGroupTerms) {
  const AnchorPartition p = SmallPartition();
  const std::vector<double> anchors = {0.2, 0.5, 0.3};
  const std::vector<std::vector<double>> g = {
      {0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}, {0.7, 0.8, 0.9}};
  const auto masked = ComposeHierarchical(anchors, g, p, true);
  EXPECT_NEAR(masked[2], 0.2 * 0.1, 1e-15);
  EXPECT_NEAR(masked[3], 0.2 * 0.2 + 0.5 * 0.5, 1e-15);
  EXPECT_NEAR(masked[4], 0.3 * 0.9, 1e-15);
  const auto open = ComposeHierarchical(anchors, g, p, false);
  EXPECT_NEAR(open[2], 0.2 * 0.1 + 0.5 * 0.4 + 0.3 * 0.7, 1e-15);
}

TEST(HoiModel, HierarchicalForwardMatchesExplicitSum) {
  const AnchorPartition part = SmallPartition();
  for (uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const bool mask = seed % 2 == 0;
    ModelConfig cfg = SmallConfig(Variant::kHierarchical, seed % 3 == 0);
    cfg.mask_groups = mask;
    HoiModel model(cfg, SmallSpace(), part);
    ParamStore store(seed);
    model.InitParams(store);
    const auto batch = RandomBatch(rng, cfg.dims, 3);
    const auto pass = model.Forward(store, batch);
    for (std::size_t r = 0; r < batch.size(); ++r) {
      double total = 0.0;
      for (int s = 0; s < 3; ++s) total += pass.anchor_probs(r, s);
      ASSERT_NEAR(total, 1.0, 1e-9);
      for (int k = 0; k < 2; ++k) {
        ASSERT_EQ(pass.action_probs(r, part.anchors[k]), pass.anchor_probs(r, k));
      }
      for (int j = 0; j < 3; ++j) {
        double expect = 0.0;
        for (int s = 0; s < 3; ++s) {
          if (mask && !part.InGroup(s, part.regular[j])) continue;
          expect += pass.anchor_probs(r, s) * pass.group_probs[s](r, j);
        }
        ASSERT_NEAR(pass.action_probs(r, part.regular[j]), expect, 1e-12);
      }
      for (double v : pass.action_probs.row(r)) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
    }
    // Predictions expose the masked group probabilities.
    const auto preds = model.Predictions(pass);
    ASSERT_EQ(preds.size(), batch.size());
    if (mask) ASSERT_EQ(preds[0].group_probs[1][0], 0.0);
  }
}

TEST(HoiModel, EveryVariantGivesProbabilities) {
  std::mt19937_64 rng(5);
  for (Variant v : {Variant::kBaseline, Variant::kModified, Variant::kMultiTask,
                    Variant::kTwoStream, Variant::kHierarchical}) {
    std::optional<AnchorPartition> part;
    if (NeedsPartition(v)) part = SmallPartition();
    const ModelConfig cfg = SmallConfig(v);
    HoiModel model(cfg, SmallSpace(), part);
    ParamStore store(1);
    model.InitParams(store);
    const auto pass = model.Forward(store, RandomBatch(rng, cfg.dims, 4));
    ASSERT_EQ(pass.action_probs.rows(), 4u);
    ASSERT_EQ(pass.action_probs.cols(), 5u);
    for (double p : pass.action_probs.data()) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(HoiModel, TwoStreamCopiesHeads) {
  std::mt19937_64 rng(6);
  const AnchorPartition part = SmallPartition();
  const ModelConfig cfg = SmallConfig(Variant::kTwoStream);
  HoiModel model(cfg, SmallSpace(), part);
  ParamStore store(2);
  model.InitParams(store);
  const auto pass = model.Forward(store, RandomBatch(rng, cfg.dims, 2));
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_EQ(pass.action_probs(r, 1), pass.anchor_probs(r, 1));
    EXPECT_EQ(pass.action_probs(r, 4), pass.regular_probs(r, 2));
  }
}

TEST(Fuse, ZeroParametersGiveZeroFeatures) {
  std::mt19937_64 rng(7);
  const ModelConfig cfg = SmallConfig(Variant::kModified);
  HoiModel model(cfg, SmallSpace());
  ParamStore store(3);
  model.InitParams(store);
  for (auto& p : store.params()) p.value.Fill(0.0);
  const auto pass = model.Forward(store, RandomBatch(rng, cfg.dims, 2));
  EXPECT_EQ(pass.fused, Matrix(2, 5));
}

TEST(Fuse, IdenticalStreamsAverageToThemselves) {
  std::mt19937_64 rng(8);
  const ModelConfig cfg = SmallConfig(Variant::kModified);
  HoiModel model(cfg, SmallSpace());
  ParamStore store(4);
  model.InitParams(store);
  const Matrix u{{0.5, 1.5, 0.0, 2.0, 0.25}};
  for (const char* s : {"stream.h", "stream.o", "stream.k", "stream.b"}) {
    store.mutable_value(std::string(s) + ".l2.w").Fill(0.0);
    store.mutable_value(std::string(s) + ".l2.b") = u;
  }
  const auto pass = model.Forward(store, RandomBatch(rng, cfg.dims, 1));
  EXPECT_EQ(pass.fused, u);
}

TEST(Attention, SinglePairRelationIsOne) {
  std::mt19937_64 rng(9);
  ParamStore store(5);
  const Matrix z{{0.3, -0.4, 1.0}};
  const Matrix wa = store.AddGlorot("a", 3, 2), wb = store.AddGlorot("b", 3, 2),
               wx = store.AddGlorot("x", 3, 2), wz = store.AddGlorot("z", 3, 2);
  const auto c = SelfAttentionForward(z, wa, wb, wx, wz);
  EXPECT_EQ(c.relation, (Matrix{{1.0}}));
}

TEST(Attention, ZeroValueWeightsAreIdentity) {
  std::mt19937_64 rng(10);
  ParamStore store(6);
  Matrix z(3, 4);
  for (double& v : z.data()) v = std::normal_distribution<double>()(rng);
  const Matrix wa = store.AddGlorot("a", 4, 2), wb = store.AddGlorot("b", 4, 2),
               wz = store.AddGlorot("z", 4, 2);
  EXPECT_EQ(SelfAttentionForward(z, wa, wb, Matrix(4, 2), wz).output, z);
  const Matrix wx = store.AddGlorot("x", 4, 2);
  EXPECT_EQ(SelfAttentionForward(z, wa, wb, wx, Matrix(4, 2)).output, z);
}

TEST(Attention, TwoPairHandCase) {
  // Scalar features and projections.
  const double z1 = 1.0, z2 = 2.0, a = 0.5, b = 1.5, x = -0.3, w = 0.7;
  const auto relu = [](double v) { return v > 0 ? v : 0.0; };
  const double l11 = relu(z1 * a) * relu(z1 * b), l12 = relu(z1 * a) * relu(z2 * b);
  const double l21 = relu(z2 * a) * relu(z1 * b), l22 = relu(z2 * a) * relu(z2 * b);
  const double r11 = 1.0 / (1.0 + std::exp(l12 - l11)), r12 = 1.0 - r11;
  const double r21 = 1.0 / (1.0 + std::exp(l22 - l21)), r22 = 1.0 - r21;
  // relu(z * x) is zero for both pairs with x < 0; use x' > 0 as well.
  for (double xv : {x, 0.4}) {
    const double v1 = relu(z1 * xv), v2 = relu(z2 * xv);
    const double out1 = z1 + (r11 * v1 + r12 * v2) * w;
    const double out2 = z2 + (r21 * v1 + r22 * v2) * w;
    const auto c = SelfAttentionForward(Matrix{{z1}, {z2}}, Matrix{{a}},
                                        Matrix{{b}}, Matrix{{xv}}, Matrix{{w}});
    EXPECT_NEAR(c.relation(0, 0), r11, 1e-15);
    EXPECT_NEAR(c.relation(1, 1), r22, 1e-15);
    EXPECT_NEAR(c.output(0, 0), out1, 1e-15);
    EXPECT_NEAR(c.output(1, 0), out2, 1e-15);
  }
}

TEST(JointHoi, ProductAndZeroElsewhere) {
  const HoiSpace space = SmallSpace();
  std::vector<double> a(5, 0.5);
  const auto y = JointHoi(a, 0.9, 0.8, 1, space);
  for (int m = 0; m < space.num_classes(); ++m) {
    if (space.hoi_class(m).object == 1) {
      EXPECT_NEAR(y[m], 0.36, 1e-15);
    } else {
      EXPECT_EQ(y[m], 0.0);
    }
  }
  const auto ones = JointHoi(std::vector<double>(5, 1.0), 1.0, 1.0, 0, space);
  for (int m : space.ClassesForObject(0)) EXPECT_EQ(ones[m], 1.0);
}

TEST(EmbedHead, ZeroWeightsGiveBias) {
  std::mt19937_64 rng(11);
  const ModelConfig cfg = SmallConfig(Variant::kModified, false, true);
  HoiModel model(cfg, SmallSpace());
  ParamStore store(7);
  model.InitParams(store);
  store.mutable_value("head.embed.w").Fill(0.0);
  store.mutable_value("head.embed.b") = Matrix{{0.25, -1.0}};
  const auto pass = model.Forward(store, RandomBatch(rng, cfg.dims, 2));
  EXPECT_EQ(pass.embed, (Matrix{{0.25, -1.0}, {0.25, -1.0}}));
}

// Linear functional of every model output, so Backward sees arbitrary
// upstream gradients.
struct Probe {
  Matrix action, anchor, embed;
};

double ProbeValue(const HoiModel& model, const ParamStore& store,
                  const std::vector<PairExample>& batch, const Probe& probe) {
  const auto pass = model.Forward(store, batch);
  double v = 0.0;
  for (std::size_t i = 0; i < probe.action.size(); ++i) {
    v += probe.action.data()[i] * pass.action_probs.data()[i];
  }
  if (!probe.anchor.empty()) {
    for (std::size_t i = 0; i < probe.anchor.size(); ++i) {
      v += probe.anchor.data()[i] * pass.anchor.output.data()[i];
    }
  }
  if (!probe.embed.empty()) {
    for (std::size_t i = 0; i < probe.embed.size(); ++i) {
      v += probe.embed.data()[i] * pass.embed.data()[i];
    }
  }
  return v;
}

TEST(HoiModel, BackwardMatchesFiniteDifferences) {
  int configs = 0;
  for (uint64_t seed = 0; seed < 24; ++seed) {
    std::mt19937_64 rng(seed);
    const Variant variants[] = {Variant::kBaseline, Variant::kModified,
                                Variant::kMultiTask, Variant::kTwoStream,
                                Variant::kHierarchical, Variant::kHierarchical};
    const Variant v = variants[seed % 6];
    const bool extras = v != Variant::kBaseline && seed % 4 < 2;
    std::optional<AnchorPartition> part;
    if (NeedsPartition(v)) part = SmallPartition();
    ModelConfig cfg = SmallConfig(v, extras, extras);
    cfg.mask_groups = seed % 5 != 0;
    HoiModel model(cfg, SmallSpace(), part);
    ParamStore store(seed);
    model.InitParams(store);
    // Zero biases put some pre-activations exactly on a ReLU kink.
    for (auto& p : store.params()) {
      for (double& x : p.value.data()) {
        x += 0.1 * std::normal_distribution<double>()(rng);
      }
    }
    const auto batch = RandomBatch(rng, cfg.dims, 3);
    const auto pass = model.Forward(store, batch);
    Probe probe;
    auto random_like = [&](const Matrix& m) {
      Matrix g(m.rows(), m.cols());
      for (double& x : g.data()) x = std::normal_distribution<double>()(rng);
      return g;
    };
    probe.action = random_like(pass.action_probs);
    if (model.has_anchor_head()) probe.anchor = random_like(pass.anchor.output);
    if (cfg.emb_head) probe.embed = random_like(pass.embed);
    model.Backward(store, pass, {probe.action, probe.anchor, probe.embed});
    const auto r = nn::FiniteDiffCheck(
        [&](const ParamStore& s) { return ProbeValue(model, s, batch, probe); },
        store, {.step = 1e-6});
    EXPECT_LT(r.max_rel_error, 1e-5)
        << VariantName(v) << " seed " << seed << " worst " << r.worst_param;
    ++configs;
  }
  EXPECT_GE(configs, 20);
}

TEST(HoiModel, ForwardIsDeterministic) {
  std::mt19937_64 rng(12);
  const ModelConfig cfg = SmallConfig(Variant::kHierarchical, true, true);
  HoiModel model(cfg, SmallSpace(), SmallPartition());
  ParamStore a(3), b(3);
  model.InitParams(a);
  model.InitParams(b);
  EXPECT_EQ(a.Checksum(), b.Checksum());
  const auto batch = RandomBatch(rng, cfg.dims, 4);
  EXPECT_EQ(model.Forward(a, batch).action_probs,
            model.Forward(b, batch).action_probs);
}

TEST(HoiModel, RejectsWrongFeatureWidth) {
  std::mt19937_64 rng(13);
  const ModelConfig cfg = SmallConfig(Variant::kModified);
  HoiModel model(cfg, SmallSpace());
  ParamStore store(1);
  model.InitParams(store);
  auto batch = RandomBatch(rng, cfg.dims, 1);
  batch[0].x_h.push_back(1.0);
  EXPECT_THROW(model.Forward(store, batch), ShapeError);
}

}  // namespace
}  // namespace acp
