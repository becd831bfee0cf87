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

#ifndef ACP_ANNOTATIONS_H_
#define ACP_ANNOTATIONS_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "acp/hoi_space.h"

namespace acp {

// (x1, y1, x2, y2) in pixels.
using Box = std::array<double, 4>;

bool IsWellFormed(const Box& box);

struct Instance {
  Box human_box{};
  Box object_box{};
  int object = 0;
  // Sorted, unique, non-empty.
  std::vector<int> actions;
};

struct AnnotationRecord {
  std::string image_id;
  std::vector<Instance> instances;
};

// Parses the annotation file (a JSON array of records) and resolves names
// against `space`. Throws ParseError for malformed input and VocabularyError
// for unknown action or object names. Records are kept one-per-entry even
// when image ids repeat; statistics merge them later.
std::vector<AnnotationRecord> ParseAnnotations(std::string_view json_text,
                                               const HoiSpace& space);
std::vector<AnnotationRecord> LoadAnnotations(const std::string& path,
                                              const HoiSpace& space);

std::string AnnotationsToJson(const std::vector<AnnotationRecord>& records,
                              const HoiSpace& space);
void SaveAnnotations(const std::vector<AnnotationRecord>& records,
                     const HoiSpace& space, const std::string& path);

// Builds a vocabulary from an annotation file when no space file is given:
// names in order of first appearance, one class per observed
// (object, action) pair.
HoiSpace InferHoiSpace(std::string_view json_text);

// Number of annotated instances per HOI class (the "training samples" count
// used for the rare split).
std::vector<int64_t> CountClassInstances(
    const std::vector<AnnotationRecord>& records, const HoiSpace& space);

}  // namespace acp

#endif  // ACP_ANNOTATIONS_H_
