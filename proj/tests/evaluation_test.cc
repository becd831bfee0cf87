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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "acp/errors.h"
#include "acp/evaluation.h"
#include "oracles.h"
#include "test_util.h"

namespace acp {
namespace {

using testing::GridBox;
using testing::OracleAp;
using testing::TinyCase;

TEST(Iou, HandCases) {
  const Box a{0, 0, 10, 10};
  EXPECT_EQ(Iou(a, a), 1.0);
  EXPECT_EQ(Iou(a, Box{20, 20, 30, 30}), 0.0);
  EXPECT_NEAR(Iou(a, Box{5, 0, 15, 10}), 50.0 / 150.0, 1e-15);
  EXPECT_EQ(Iou(a, Box{3, 3, 3, 8}), 0.0);
}

Detection Det(const std::string& id, double score, Box h, Box o) {
  return {id, 0, score, h, o};
}

TEST(MatchAndAp, SinglePerfectDetection) {
  const Box b{0, 0, 10, 10};
  const std::vector<Detection> dets = {Det("i", 0.9, b, b)};
  const std::vector<GtPair> gts = {{"i", b, b}};
  EXPECT_EQ(MatchAndAp(dets, gts).value(), 1.0);
}

TEST(MatchAndAp, FalseThenTrueGivesHalf) {
  const Box b{0, 0, 10, 10}, far{50, 50, 60, 60};
  const std::vector<Detection> dets = {Det("i", 0.9, far, far),
                                       Det("i", 0.5, b, b)};
  const std::vector<GtPair> gts = {{"i", b, b}};
  EXPECT_NEAR(MatchAndAp(dets, gts).value(), 0.5, 1e-15);
}

TEST(MatchAndAp, ThresholdUsesTheSmallerOverlap) {
  const Box gt{0, 0, 100, 100};
  // IoU 0.51 for the human box, 0.49 for the object box.
  const Box h51{0, 0, 100, 51}, o49{0, 0, 100, 49};
  const std::vector<GtPair> gts = {{"i", gt, gt}};
  EXPECT_EQ(MatchAndAp(std::vector<Detection>{Det("i", 1, h51, o49)}, gts)
                .value(),
            0.0);
  EXPECT_EQ(MatchAndAp(std::vector<Detection>{Det("i", 1, h51, h51)}, gts)
                .value(),
            1.0);
}

TEST(MatchAndAp, NoGroundTruthIsUndefined) {
  EXPECT_FALSE(MatchAndAp({}, {}).has_value());
}

TEST(MatchAndAp, DuplicateDetectionIsFalsePositive) {
  const Box b{0, 0, 10, 10};
  const std::vector<Detection> dets = {Det("i", 0.9, b, b), Det("i", 0.8, b, b)};
  const std::vector<GtPair> gts = {{"i", b, b}};
  EXPECT_EQ(MatchAndAp(dets, gts).value(), 1.0);
  const std::vector<GtPair> two = {{"i", b, b}, {"j", b, b}};
  EXPECT_NEAR(MatchAndAp(dets, two).value(), 0.5, 1e-15);
}

TEST(MatchAndAp, MatchesOracleOnTinyInstances) {
  std::mt19937_64 rng(2026);
  for (int t = 0; t < 500; ++t) {
    const TinyCase c = testing::RandomTinyCase(rng);
    ASSERT_EQ(MatchAndAp(c.dets, c.gts).value(), OracleAp(c.dets, c.gts))
        << "case " << t;
  }
}

TEST(MatchAndAp, InvariantToInputOrderOfDistinctScores) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    TinyCase c = testing::RandomTinyCase(rng);
    for (std::size_t i = 0; i < c.dets.size(); ++i) c.dets[i].score += 0.01 * i;
    const double ap = MatchAndAp(c.dets, c.gts).value();
    std::shuffle(c.dets.begin(), c.dets.end(), rng);
    ASSERT_EQ(MatchAndAp(c.dets, c.gts).value(), ap);
  }
}

// Two objects, one action each.
HoiSpace TwoObjectSpace() {
  return HoiSpace({"ride", "feed"}, {"horse", "dog"}, {{0, 0}, {1, 1}});
}

TEST(Evaluate, PerfectDetectionAndKnownObject) {
  const HoiSpace space = TwoObjectSpace();
  const Box b{0, 0, 10, 10};
  std::vector<AnnotationRecord> gts = {testing::Record("img1", 0, {0}),
                                       testing::Record("img2", 1, {1})};
  gts[0].instances[0].human_box = b;
  gts[0].instances[0].object_box = b;
  std::vector<Detection> dets = {{"img1", 0, 0.6, b, b}};
  const std::vector<int64_t> counts = {50, 50};
  auto r = Evaluate(dets, gts, space, EvalSetting::kDefault, counts);
  EXPECT_EQ(r.per_class_ap[0].value(), 1.0);
  // A confident ride-horse false positive on the dog image.
  dets.push_back({"img2", 0, 0.9, b, b});
  r = Evaluate(dets, gts, space, EvalSetting::kDefault, counts);
  EXPECT_NEAR(r.per_class_ap[0].value(), 0.5, 1e-15);
  const auto k = Evaluate(dets, gts, space, EvalSetting::kKnownObject, counts);
  EXPECT_EQ(k.per_class_ap[0].value(), 1.0);
}

TEST(Evaluate, KnownObjectNeverBelowDefault) {
  std::mt19937_64 rng(8);
  const HoiSpace space = testing::DenseSpace(2, 3);
  const std::vector<int64_t> counts(space.num_classes(), 20);
  for (int t = 0; t < 100; ++t) {
    std::vector<AnnotationRecord> gts;
    std::vector<Detection> dets;
    for (int i = 0; i < 5; ++i) {
      AnnotationRecord rec = testing::Record("im" + std::to_string(i),
                                             rng() % 3, {static_cast<int>(rng() % 2)});
      rec.instances[0].human_box = GridBox(rng);
      rec.instances[0].object_box = GridBox(rng);
      gts.push_back(rec);
    }
    for (int d = 0; d < 12; ++d) {
      dets.push_back({"im" + std::to_string(rng() % 5),
                      static_cast<int>(rng() % space.num_classes()),
                      std::uniform_real_distribution<double>()(rng),
                      GridBox(rng), GridBox(rng)});
    }
    const auto def = Evaluate(dets, gts, space, EvalSetting::kDefault, counts);
    const auto ko = Evaluate(dets, gts, space, EvalSetting::kKnownObject, counts);
    for (int m = 0; m < space.num_classes(); ++m) {
      ASSERT_EQ(def.per_class_ap[m].has_value(), ko.per_class_ap[m].has_value());
      if (def.per_class_ap[m]) {
        ASSERT_GE(*ko.per_class_ap[m], *def.per_class_ap[m]);
      }
    }
    // map_full is the plain mean over evaluated classes.
    double sum = 0;
    int n = 0;
    for (const auto& ap : def.per_class_ap) {
      if (ap) {
        sum += *ap;
        ++n;
      }
    }
    ASSERT_NEAR(def.map_full, sum / n, 1e-12);
  }
}

TEST(Evaluate, RareSplitFollowsThreshold) {
  const HoiSpace space = testing::DenseSpace(3, 1);
  std::vector<AnnotationRecord> gts = {testing::Record("x", 0, {0, 1, 2})};
  const std::vector<int64_t> counts = {2, 50, 9};
  const auto r = Evaluate({}, gts, space, EvalSetting::kDefault, counts);
  EXPECT_EQ(r.rare_classes, (std::vector<int>{0, 2}));
  EXPECT_EQ(r.nonrare_classes, (std::vector<int>{1}));
  EXPECT_EQ(r.map_full, 0.0);
}

TEST(Evaluate, EmptySplitIsNan) {
  const HoiSpace space = testing::DenseSpace(1, 1);
  const std::vector<AnnotationRecord> gts = {testing::Record("x", 0, {0})};
  const std::vector<int64_t> counts = {100};
  const auto r = Evaluate({}, gts, space, EvalSetting::kDefault, counts);
  EXPECT_TRUE(std::isnan(r.map_rare));
  EXPECT_FALSE(std::isnan(r.map_nonrare));
}

TEST(Evaluate, UnknownClassIsAnError) {
  const HoiSpace space = TwoObjectSpace();
  const std::vector<Detection> dets = {{"x", 7, 0.5, {}, {}}};
  const std::vector<int64_t> counts = {1, 1};
  EXPECT_THROW(Evaluate(dets, {}, space, EvalSetting::kDefault, counts),
               ContractError);
}

TEST(EvalSetting, Parse) {
  EXPECT_EQ(ParseEvalSetting("default"), EvalSetting::kDefault);
  EXPECT_EQ(ParseEvalSetting("known-object"), EvalSetting::kKnownObject);
  EXPECT_EQ(ParseEvalSetting("known_object"), EvalSetting::kKnownObject);
  EXPECT_THROW(ParseEvalSetting("strict"), Error);
}

TEST(ZeroShotSplit, DeterministicEligibleAndEmpty) {
  const HoiSpace space = testing::DenseSpace(4, 3);
  std::vector<int64_t> counts(space.num_classes(), 30);
  counts[0] = counts[5] = 3;
  const auto a = ZeroShotSplit(space, counts, 7, 4);
  EXPECT_EQ(a, ZeroShotSplit(space, counts, 7, 4));
  EXPECT_EQ(a.size(), 4u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  for (int m : a) EXPECT_GE(counts[m], space.rare_threshold());
  EXPECT_TRUE(ZeroShotSplit(space, counts, 7, 0).empty());
  EXPECT_THROW(ZeroShotSplit(space, counts, 7, 11), ConfigError);
}

TEST(Detections, CsvRoundTrip) {
  const std::vector<Detection> dets = {
      {"img_1", 3, 0.123456789012345678, {1, 2, 3, 4}, {5, 6, 7, 8.5}},
      {"img_2", 0, 1.0, {0, 0, 1, 1}, {0, 0, 2, 2}}};
  const auto back = ParseDetectionsCsv(DetectionsToCsv(dets));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].score, dets[0].score);
  EXPECT_EQ(back[0].object_box, dets[0].object_box);
  EXPECT_EQ(back[1].image_id, "img_2");
  EXPECT_THROW(ParseDetectionsCsv("image_id,hoi_class\nx,notanumber\n"),
               ParseError);
}

}  // namespace
}  // namespace acp
