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
#include "acp/losses.h"
#include "acp/nn/param_store.h"
#include "acp/priors.h"
#include "oracles.h"
#include "test_util.h"

namespace acp {
namespace {

using testing::ProjectOracle;

using nn::Matrix;

PriorMatrices Matrices(int n, std::vector<double> c, std::vector<double> cc) {
  PriorMatrices p;
  p.num_actions = n;
  p.cooccurrence = std::move(c);
  p.complement = std::move(cc);
  return p;
}

// Random valid conditional matrices from a random dataset.
PriorMatrices RandomPriors(std::mt19937_64& rng, int n) {
  const HoiSpace space = testing::DenseSpace(n, 1);
  const auto data = testing::RandomDataset(rng, n, 1, 30);
  return BuildPriors(CountLabelStats(data, space), PriorScope::Global());
}

std::vector<double> RandomProbs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Per-coordinate sum straight from the definition.
ProjectionConfig Cfg(double alpha, double beta) {
  ProjectionConfig c;
  c.alpha = alpha;
  c.beta = beta;
  return c;
}

TEST(ProjectionConfig, Validation) {
  EXPECT_NO_THROW(ProjectionConfig{}.Validate());
  EXPECT_THROW(Cfg(1.0, 1.0).Validate(), ConfigError);
  EXPECT_THROW(Cfg(1.5, 0.6).Validate(), ConfigError);
  EXPECT_THROW(Cfg(2.5, -0.5).Validate(), ConfigError);
  EXPECT_NO_THROW(Cfg(2.0, 0.0).Validate());
}

TEST(LossWeights, Validation) {
  EXPECT_NO_THROW(LossWeights{}.Validate());
  LossWeights w;
  w.lambda1 = 0.0;
  EXPECT_THROW(w.Validate(), ConfigError);
  w = {};
  w.lambda2 = -1.0;
  EXPECT_THROW(w.Validate(), ConfigError);
}

TEST(Project, SingleActionFixedPoint) {
  const auto out = Project(std::vector<double>{0.37}, Matrices(1, {1}, {0}),
                           Cfg(1.0, 1.0));
  EXPECT_EQ(out, (std::vector<double>{0.37}));
}

TEST(Project, TwoActionHandCase) {
  const PriorMatrices p = Matrices(2, {1, 0.5, 0.25, 1}, {0, 0.1, 0.3, 0});
  const auto out = Project(std::vector<double>{0.8, 0.4}, p, Cfg(1.0, 1.0));
  EXPECT_NEAR(out[0], 0.54, 1e-15);
  EXPECT_NEAR(out[1], 0.41, 1e-15);
}

TEST(Project, MatchesOracleOnRandomInputs) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    const PriorMatrices p = RandomPriors(rng, n);
    const auto a = RandomProbs(rng, n);
    const double alpha = std::uniform_real_distribution<double>(1.0, 2.0)(rng);
    const auto out = Project(a, p, Cfg(alpha, 2.0 - alpha));
    const auto ref = ProjectOracle(a, p, alpha, 2.0 - alpha);
    for (int j = 0; j < n; ++j) ASSERT_NEAR(out[j], ref[j], 1e-12);
  }
}

TEST(Project, AffineInInput) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    const PriorMatrices p = RandomPriors(rng, n);
    const auto a1 = RandomProbs(rng, n), a2 = RandomProbs(rng, n);
    const double mix = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<double> blend(n);
    for (int i = 0; i < n; ++i) blend[i] = mix * a1[i] + (1 - mix) * a2[i];
    const ProjectionConfig cfg;
    const auto p1 = Project(a1, p, cfg), p2 = Project(a2, p, cfg);
    const auto pb = Project(blend, p, cfg);
    for (int j = 0; j < n; ++j) {
      ASSERT_NEAR(pb[j], mix * p1[j] + (1 - mix) * p2[j], 1e-12);
      ASSERT_GE(pb[j], 0.0);
      ASSERT_LE(pb[j], cfg.alpha);
    }
  }
}

TEST(Project, AllOnesPriorGivesMean) {
  const int n = 4;
  const PriorMatrices p =
      Matrices(n, std::vector<double>(16, 1.0), std::vector<double>(16, 0.0));
  const std::vector<double> a = {0.1, 0.4, 0.9, 0.2};
  for (double v : Project(a, p, Cfg(1.0, 1.0))) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(Project, ZeroInputGivesComplementRowMeans) {
  const PriorMatrices p = Matrices(2, {1, 0.5, 0.25, 1}, {0, 0.1, 0.3, 0});
  const auto out = Project(std::vector<double>{0.0, 0.0}, p, Cfg(1.2, 0.8));
  EXPECT_NEAR(out[0], 0.8 * (0.0 + 0.3) / 2, 1e-15);
  EXPECT_NEAR(out[1], 0.8 * (0.1 + 0.0) / 2, 1e-15);
}

TEST(Project, OneHotWithoutComplementScalesRow) {
  std::mt19937_64 rng(3);
  const PriorMatrices p = RandomPriors(rng, 6);
  std::vector<double> a(6, 0.0);
  a[2] = 1.0;
  const auto out = Project(a, p, Cfg(2.0, 0.0));
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(out[j], 2.0 / 6 * p.c(2, j), 1e-15);
}

TEST(Project, RejectsOutOfRangeInput) {
  EXPECT_THROW(Project(std::vector<double>{1.2}, Matrices(1, {1}, {0}),
                       ProjectionConfig{}),
               ContractError);
}

// One object, actions hold/eat/cut with the cake statistics.
struct CakeFixture {
  HoiSpace space = testing::CakeSpace();
  CooccurrenceStats stats = CountLabelStats(testing::CakeDataset(), space);
  PairExample pair;
  CakeFixture() {
    pair.object = 0;
    pair.det_h = 0.9;
    pair.det_o = 0.5;
    pair.gt_actions = {0, 1};
  }
};

TEST(Teachers, FromPredictionAndGroundTruth) {
  CakeFixture f;
  const PriorSource source(f.stats, true);
  const ProjectionConfig cfg;
  const std::vector<double> a = {0.6, 0.3, 0.2};
  const auto proj = ProjectOracle(a, source.For(0), cfg.alpha, cfg.beta);
  const auto t = TeacherFromPrediction(a, f.pair, source, cfg, f.space);
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(t[m], 0.45 * proj[m], 1e-15);

  const auto g = TeacherFromGroundTruth(f.pair, source, cfg, f.space);
  const auto gproj =
      ProjectOracle({1.0, 1.0, 0.0}, source.For(0), cfg.alpha, cfg.beta);
  // hold's projection exceeds 1 at N = 3, so the clamp is live.
  EXPECT_GT(gproj[0], 1.0);
  for (int m = 0; m < 3; ++m) {
    EXPECT_NEAR(g[m], std::min(1.0, gproj[m]), 1e-15);
  }
}

TEST(Teachers, EmptyLabelsWithoutComplementGiveZero) {
  CakeFixture f;
  f.pair.gt_actions.clear();
  const PriorSource source(f.stats, true);
  const auto g = TeacherFromGroundTruth(f.pair, source, Cfg(2.0, 0.0), f.space);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(PriorSource, FallsBackToGlobalForUnseenObjects) {
  const HoiSpace space = testing::DenseSpace(3, 2);
  const auto stats =
      CountLabelStats(std::vector<AnnotationRecord>{testing::Record("a", 0, {0, 1})},
                      space);
  const PriorSource source(stats, true);
  EXPECT_EQ(source.For(1).cooccurrence, source.global().cooccurrence);
  EXPECT_EQ(source.warnings().size(), 1u);
  const PriorSource global(stats, false);
  EXPECT_TRUE(global.For(0).scope.is_global());
}

TEST(DistillLoss, ReducesToBce) {
  std::mt19937_64 rng(4);
  Matrix pred(2, 6), gt(2, 6), t1(2, 6), t2(2, 6);
  for (Matrix* m : {&pred, &t1, &t2}) {
    for (double& v : m->data()) {
      v = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    }
  }
  gt(0, 1) = gt(1, 4) = 1.0;
  LossWeights w;
  w.lambda2 = w.lambda3 = 0.0;
  const auto d = DistillLoss(pred, gt, t1, t2, w);
  const auto b = nn::Bce(pred, gt);
  EXPECT_EQ(d.value, b.value);
  EXPECT_EQ(d.grad, b.grad);
}

TEST(DistillLoss, MinimumWhenEverythingAgrees) {
  const Matrix y{{0.3, 0.7, 0.5}};
  const LossWeights w;
  const double at = DistillLoss(y, y, y, y, w).value;
  for (double d : {-1e-3, 1e-3}) {
    Matrix moved = y;
    moved(0, 1) += d;
    EXPECT_GT(DistillLoss(moved, y, y, y, w).value, at);
  }
}

TEST(DistillLoss, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Matrix pred(1, 6), gt(1, 6), t1(1, 6), t2(1, 6);
    for (Matrix* m : {&pred, &t1, &t2}) {
      for (double& v : m->data()) {
        v = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      }
    }
    gt(0, seed % 6) = 1.0;
    const LossWeights w;
    const auto l = DistillLoss(pred, gt, t1, t2, w);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      Matrix up = pred, down = pred;
      up.data()[i] += 1e-7;
      down.data()[i] -= 1e-7;
      const double num = (DistillLoss(up, gt, t1, t2, w).value -
                          DistillLoss(down, gt, t1, t2, w).value) / 2e-7;
      EXPECT_NEAR(l.grad.data()[i], num, 1e-6 * std::abs(num) + 1e-9);
    }
  }
}

TEST(EmbLoss, ClosedFormAndLimit) {
  EXPECT_NEAR(EmbLoss(std::vector<double>{1, 0}, std::vector<double>{0, 5}),
              std::log(2.0), 1e-15);
  EXPECT_LT(EmbLoss(std::vector<double>{1.0}, std::vector<double>{50.0}), 1e-20);
  EXPECT_NEAR(EmbLoss(std::vector<double>{1.0}, std::vector<double>{-800.0}),
              800.0, 1e-9);
  EXPECT_THROW(EmbLoss(std::vector<double>{1.0}, std::vector<double>{1, 2}),
               ShapeError);
}

TEST(EmbLoss, BatchGradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<PairExample> pairs(3);
    Matrix v(3, 4);
    for (auto& p : pairs) {
      p.o_embed.resize(4);
      for (double& x : p.o_embed) x = n(rng);
    }
    for (double& x : v.data()) x = n(rng);
    const auto l = EmbLossBatch(v, pairs);
    for (std::size_t i = 0; i < v.size(); ++i) {
      Matrix up = v, down = v;
      up.data()[i] += 1e-6;
      down.data()[i] -= 1e-6;
      const double num =
          (EmbLossBatch(up, pairs).value - EmbLossBatch(down, pairs).value) /
          2e-6;
      EXPECT_NEAR(l.grad.data()[i], num, 1e-6 * std::abs(num) + 1e-10);
    }
  }
}

TEST(TotalLoss, Arithmetic) {
  LossWeights w;
  w.lambda0 = 0.0;
  EXPECT_EQ(TotalLoss(0.7, 5.0, w), 0.7);
  w.lambda0 = 1.0;
  EXPECT_NEAR(TotalLoss(1.0, std::log(2.0), w), 1.6931471805599454, 1e-15);
}

TEST(JointHoiBatch, BackwardIsTheTranspose) {
  std::mt19937_64 rng(5);
  const HoiSpace space = testing::DenseSpace(3, 2);
  std::vector<PairExample> pairs(2);
  pairs[0].object = 1;
  pairs[0].det_h = 0.5;
  pairs[0].det_o = 0.4;
  pairs[1].object = 0;
  Matrix a(2, 3);
  for (double& x : a.data()) x = std::uniform_real_distribution<double>()(rng);
  const Matrix y = JointHoiBatch(a, pairs, space);
  Matrix g(2, 6);
  for (double& x : g.data()) x = std::normal_distribution<double>()(rng);
  const Matrix da = JointHoiBackward(g, pairs, space);
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += g.data()[i] * y.data()[i];
  for (std::size_t i = 0; i < a.size(); ++i) rhs += da.data()[i] * a.data()[i];
  EXPECT_NEAR(lhs, rhs, 1e-14);
  EXPECT_NEAR(y(0, *space.ClassIndex(1, 2)), 0.2 * a(0, 2), 1e-15);
  EXPECT_EQ(y(0, *space.ClassIndex(0, 2)), 0.0);
}

TEST(GroundTruthHoi, MarksPairClasses) {
  const HoiSpace space = testing::DenseSpace(3, 2);
  PairExample p;
  p.object = 1;
  p.gt_actions = {0, 2};
  const auto y = GroundTruthHoi(p, space);
  EXPECT_EQ(y[*space.ClassIndex(1, 0)], 1.0);
  EXPECT_EQ(y[*space.ClassIndex(1, 2)], 1.0);
  EXPECT_EQ(y[*space.ClassIndex(1, 1)], 0.0);
  EXPECT_EQ(y[*space.ClassIndex(0, 0)], 0.0);
}

TEST(PostProcess, MovesScoresAsProjectDictates) {
  CakeFixture f;
  const PriorSource source(f.stats, true);
  const ProjectionConfig cfg;
  const std::vector<double> a = {0.9, 0.1, 0.05};
  const auto out = PostProcess(a, f.pair, source, cfg, f.space);
  const auto proj = ProjectOracle(a, source.For(0), cfg.alpha, cfg.beta);
  for (int m = 0; m < 3; ++m) {
    EXPECT_NEAR(out.action_probs[m], proj[m], 1e-15);
    EXPECT_NEAR(out.hoi_scores[m], 0.45 * proj[m], 1e-15);
  }
}

TEST(PostProcess, SingleActionUnchanged) {
  const HoiSpace space({"a"}, {"o"}, {{0, 0}});
  const auto stats = CountLabelStats(
      std::vector<AnnotationRecord>{testing::Record("x", 0, {0})}, space);
  const PriorSource source(stats, true);
  PairExample p;
  p.object = 0;
  const auto out =
      PostProcess(std::vector<double>{0.42}, p, source, Cfg(1.0, 1.0), space);
  EXPECT_EQ(out.action_probs[0], 0.42);
}

TEST(ProjectionRows, Csv) {
  const std::string csv = ProjectionRowsToCsv({{"img", 3, 0.5, 0.25}});
  EXPECT_EQ(csv, "image_id,hoi_class,score_before,score_after\nimg,3,0.5,0.25\n");
}

}  // namespace
}  // namespace acp
