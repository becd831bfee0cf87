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

#include "acp/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "acp/errors.h"
#include "json_util.h"

namespace acp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double Area(const Box& b) {
  return std::max(0.0, b[2] - b[0]) * std::max(0.0, b[3] - b[1]);
}

std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double MeanOf(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

double Iou(const Box& a, const Box& b) {
  const double area_a = Area(a);
  const double area_b = Area(b);
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const double iw = std::min(a[2], b[2]) - std::max(a[0], b[0]);
  const double ih = std::min(a[3], b[3]) - std::max(a[1], b[1]);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (area_a + area_b - inter);
}

std::optional<double> MatchAndAp(std::span<const Detection> dets,
                                 std::span<const GtPair> gts,
                                 double iou_threshold) {
  if (gts.empty()) return std::nullopt;
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) {
                     if (dets[x].score != dets[y].score) {
                       return dets[x].score > dets[y].score;
                     }
                     return dets[x].image_id < dets[y].image_id;
                   });

  std::unordered_map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    by_image[gts[g].image_id].push_back(g);
  }
  std::vector<bool> matched(gts.size(), false);
  std::vector<double> precision;
  std::vector<double> recall;
  precision.reserve(dets.size());
  recall.reserve(dets.size());
  double tp = 0.0;
  double seen = 0.0;
  for (std::size_t idx : order) {
    const Detection& d = dets[idx];
    double best = -1.0;
    std::size_t best_gt = 0;
    if (auto it = by_image.find(d.image_id); it != by_image.end()) {
      for (std::size_t g : it->second) {
        if (matched[g]) continue;
        const double overlap = std::min(Iou(d.human_box, gts[g].human_box),
                                        Iou(d.object_box, gts[g].object_box));
        if (overlap >= iou_threshold && overlap > best) {
          best = overlap;
          best_gt = g;
        }
      }
    }
    seen += 1.0;
    if (best >= 0.0) {
      matched[best_gt] = true;
      tp += 1.0;
    }
    precision.push_back(tp / seen);
    recall.push_back(tp / static_cast<double>(gts.size()));
  }

  // Precision envelope, then sum over recall steps.
  for (std::size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

std::string_view EvalSettingName(EvalSetting s) {
  return s == EvalSetting::kDefault ? "default" : "known-object";
}

EvalSetting ParseEvalSetting(std::string_view name) {
  if (name == "default") return EvalSetting::kDefault;
  if (name == "known-object" || name == "known_object") {
    return EvalSetting::kKnownObject;
  }
  throw ConfigError("unknown evaluation mode '" + std::string(name) + "'");
}

EvalReport Evaluate(std::span<const Detection> dets,
                    std::span<const AnnotationRecord> gts,
                    const HoiSpace& space, EvalSetting setting,
                    std::span<const int64_t> train_counts,
                    double iou_threshold) {
  const int m_count = space.num_classes();
  if (static_cast<int>(train_counts.size()) != m_count) {
    throw ContractError("train counts must have one entry per HOI class");
  }
  std::vector<std::vector<GtPair>> gt_by_class(m_count);
  // image_id -> objects present in its GT
  std::unordered_map<std::string, std::set<int>> objects_in_image;
  for (const AnnotationRecord& rec : gts) {
    auto& objs = objects_in_image[rec.image_id];
    for (const Instance& inst : rec.instances) {
      objs.insert(inst.object);
      for (int a : inst.actions) {
        if (auto m = space.ClassIndex(inst.object, a)) {
          gt_by_class[*m].push_back(
              {rec.image_id, inst.human_box, inst.object_box});
        }
      }
    }
  }

  std::vector<std::vector<Detection>> det_by_class(m_count);
  for (const Detection& d : dets) {
    if (d.hoi_class < 0 || d.hoi_class >= m_count) {
      throw ContractError("detection references unknown HOI class " +
                          std::to_string(d.hoi_class));
    }
    if (setting == EvalSetting::kKnownObject) {
      const int object = space.hoi_class(d.hoi_class).object;
      auto it = objects_in_image.find(d.image_id);
      if (it == objects_in_image.end() || !it->second.contains(object)) {
        continue;
      }
    }
    det_by_class[d.hoi_class].push_back(d);
  }

  EvalReport report;
  report.setting = setting;
  report.per_class_ap.resize(m_count);
  report.gt_counts.resize(m_count);
  report.train_counts.assign(train_counts.begin(), train_counts.end());
  std::vector<double> all, rare, nonrare;
  for (int m = 0; m < m_count; ++m) {
    report.gt_counts[m] = static_cast<int64_t>(gt_by_class[m].size());
    auto ap = MatchAndAp(det_by_class[m], gt_by_class[m], iou_threshold);
    report.per_class_ap[m] = ap;
    if (!ap) continue;
    all.push_back(*ap);
    if (train_counts[m] < space.rare_threshold()) {
      report.rare_classes.push_back(m);
      rare.push_back(*ap);
    } else {
      report.nonrare_classes.push_back(m);
      nonrare.push_back(*ap);
    }
  }
  report.map_full = MeanOf(all);
  report.map_rare = MeanOf(rare);
  report.map_nonrare = MeanOf(nonrare);
  return report;
}

double MeanAp(const EvalReport& report, std::span<const int> classes) {
  std::vector<double> v;
  for (int m : classes) {
    if (m >= 0 && m < static_cast<int>(report.per_class_ap.size()) &&
        report.per_class_ap[m]) {
      v.push_back(*report.per_class_ap[m]);
    }
  }
  return MeanOf(v);
}

std::vector<int> ZeroShotSplit(const HoiSpace& space,
                               std::span<const int64_t> train_counts,
                               uint64_t seed, int k) {
  if (k < 0) throw ConfigError("zero-shot k must be non-negative");
  if (static_cast<int>(train_counts.size()) != space.num_classes()) {
    throw ContractError("train counts must have one entry per HOI class");
  }
  std::vector<int> eligible;
  for (int m = 0; m < space.num_classes(); ++m) {
    if (train_counts[m] >= space.rare_threshold()) eligible.push_back(m);
  }
  if (static_cast<int>(eligible.size()) < k) {
    throw ConfigError("zero-shot split needs " + std::to_string(k) +
                      " non-rare classes, only " +
                      std::to_string(eligible.size()) + " available");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(k);
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

std::string DetectionsToCsv(std::span<const Detection> dets) {
  std::string out = "image_id,hoi_class,score,hx1,hy1,hx2,hy2,ox1,oy1,ox2,oy2\n";
  for (const Detection& d : dets) {
    out += d.image_id;
    out += ',' + std::to_string(d.hoi_class) + ',' + FormatReal(d.score);
    for (double v : d.human_box) out += ',' + FormatReal(v);
    for (double v : d.object_box) out += ',' + FormatReal(v);
    out += '\n';
  }
  return out;
}

std::vector<Detection> ParseDetectionsCsv(std::string_view text) {
  std::vector<Detection> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("image_id,", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::string where = "line " + std::to_string(line_no);
    if (cells.size() != 11) throw ParseError(where, "expected 11 columns");
    Detection d;
    d.image_id = cells[0];
    try {
      std::size_t used = 0;
      d.hoi_class = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("class");
      auto real = [&](const std::string& s) {
        std::size_t n = 0;
        double v = std::stod(s, &n);
        if (n != s.size()) throw std::invalid_argument(s);
        return v;
      };
      d.score = real(cells[2]);
      for (int i = 0; i < 4; ++i) d.human_box[i] = real(cells[3 + i]);
      for (int i = 0; i < 4; ++i) d.object_box[i] = real(cells[7 + i]);
    } catch (const std::logic_error&) {
      throw ParseError(where, "malformed number");
    }
    if (!std::isfinite(d.score)) throw ParseError(where, "score not finite");
    if (!IsWellFormed(d.human_box) || !IsWellFormed(d.object_box)) {
      throw ParseError(where, "box is not well-formed");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> LoadDetections(const std::string& path) {
  return ParseDetectionsCsv(ReadFileToString(path));
}

void SaveDetections(std::span<const Detection> dets, const std::string& path) {
  WriteStringToFile(path, DetectionsToCsv(dets));
}

std::string ReportToJson(const EvalReport& report, const HoiSpace& space) {
  using internal::Json;
  auto num = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
  Json classes = Json::array();
  for (int m = 0; m < static_cast<int>(report.per_class_ap.size()); ++m) {
    const auto& ap = report.per_class_ap[m];
    classes.push_back({
        {"class", m},
        {"object", space.object_name(space.hoi_class(m).object)},
        {"action", space.action_name(space.hoi_class(m).action)},
        {"ap", ap ? Json(*ap) : Json(nullptr)},
        {"gt_count", report.gt_counts[m]},
        {"train_count", report.train_counts[m]},
    });
  }
  Json j = {
      {"setting", std::string(EvalSettingName(report.setting))},
      {"map_full", num(report.map_full)},
      {"map_rare", num(report.map_rare)},
      {"map_nonrare", num(report.map_nonrare)},
      {"rare_classes", report.rare_classes},
      {"nonrare_classes", report.nonrare_classes},
      {"per_class", classes},
  };
  return j.dump(2) + "\n";
}

std::string ReportSummaryCsv(const EvalReport& report) {
  std::string out = "setting,map_full,map_rare,map_nonrare,num_classes,num_rare\n";
  out += std::string(EvalSettingName(report.setting)) + ',' +
         FormatReal(report.map_full) + ',' + FormatReal(report.map_rare) + ',' +
         FormatReal(report.map_nonrare) + ',' +
         std::to_string(report.rare_classes.size() +
                        report.nonrare_classes.size()) +
         ',' + std::to_string(report.rare_classes.size()) + '\n';
  return out;
}

}  // namespace acp
