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

#ifndef ACP_EVALUATION_H_
#define ACP_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acp/annotations.h"
#include "acp/hoi_space.h"

namespace acp {

struct Detection {
  std::string image_id;
  int hoi_class = 0;
  double score = 0.0;
  Box human_box{0, 0, 1, 1};
  Box object_box{0, 0, 1, 1};
};

// One ground-truth (human, object) box pair of a given class.
struct GtPair {
  std::string image_id;
  Box human_box{0, 0, 1, 1};
  Box object_box{0, 0, 1, 1};
};

// Area convention (x2 - x1) * (y2 - y1); a degenerate box gives 0.
double Iou(const Box& a, const Box& b);

inline constexpr double kDefaultIouThreshold = 0.5;

// Detections are visited by descending score, ties by lower image_id and
// then input order. A detection is a true positive when some still
// unmatched GT of its image has min(IoU_h, IoU_o) >= threshold; it claims
// the one with the largest such overlap. AP integrates the monotone
// precision envelope over recall (all points). nullopt when `gts` is empty.
std::optional<double> MatchAndAp(std::span<const Detection> dets,
                                 std::span<const GtPair> gts,
                                 double iou_threshold = kDefaultIouThreshold);

enum class EvalSetting { kDefault, kKnownObject };
std::string_view EvalSettingName(EvalSetting s);
// "default" or "known-object".
EvalSetting ParseEvalSetting(std::string_view name);

struct EvalReport {
  EvalSetting setting = EvalSetting::kDefault;
  std::vector<std::optional<double>> per_class_ap;  // M; nullopt = no GT
  std::vector<int64_t> gt_counts;                   // M, test GT pairs
  std::vector<int64_t> train_counts;                // M
  std::vector<int> rare_classes;     // evaluated, train count < threshold
  std::vector<int> nonrare_classes;  // evaluated, the rest
  double map_full = 0.0;
  double map_rare = 0.0;     // NaN when no rare class was evaluated
  double map_nonrare = 0.0;  // NaN when no non-rare class was evaluated
};

// Scores every class with at least one GT pair. In known-object mode class
// (o, a) only sees images whose GT holds object o. `train_counts` (length
// M) decides the rare split. Throws ContractError for detections naming a
// class outside the space.
EvalReport Evaluate(std::span<const Detection> dets,
                    std::span<const AnnotationRecord> gts,
                    const HoiSpace& space, EvalSetting setting,
                    std::span<const int64_t> train_counts,
                    double iou_threshold = kDefaultIouThreshold);

// Mean AP over the evaluated members of `classes`; NaN if none.
double MeanAp(const EvalReport& report, std::span<const int> classes);

// Seeded uniform sample of k classes whose train count is >= the space's
// rare threshold. Returned ascending. Throws ConfigError when fewer than k
// classes qualify.
std::vector<int> ZeroShotSplit(const HoiSpace& space,
                               std::span<const int64_t> train_counts,
                               uint64_t seed, int k);

// CSV "image_id,hoi_class,score,hx1,hy1,hx2,hy2,ox1,oy1,ox2,oy2" with a
// header line.
std::string DetectionsToCsv(std::span<const Detection> dets);
std::vector<Detection> ParseDetectionsCsv(std::string_view text);
std::vector<Detection> LoadDetections(const std::string& path);
void SaveDetections(std::span<const Detection> dets, const std::string& path);

// JSON with aggregates and per-class APs (null for unevaluated classes).
std::string ReportToJson(const EvalReport& report, const HoiSpace& space);
// "setting,map_full,map_rare,map_nonrare,num_classes,num_rare" plus a row.
std::string ReportSummaryCsv(const EvalReport& report);

}  // namespace acp

#endif  // ACP_EVALUATION_H_
