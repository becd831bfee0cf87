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

#ifndef ACP_HOI_SPACE_H_
#define ACP_HOI_SPACE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace acp {

// One valid (object, action) combination.
struct HoiClass {
  int object = 0;
  int action = 0;

  friend bool operator==(const HoiClass&, const HoiClass&) = default;
};

// Vocabularies of actions and objects plus the M valid interaction classes.
// Immutable after construction; the constructor enforces uniqueness and
// index validity.
class HoiSpace {
 public:
  static constexpr int kDefaultRareThreshold = 10;

  HoiSpace() = default;
  HoiSpace(std::vector<std::string> actions, std::vector<std::string> objects,
           std::vector<HoiClass> hoi_classes,
           int rare_threshold = kDefaultRareThreshold);

  int num_actions() const { return static_cast<int>(actions_.size()); }
  int num_objects() const { return static_cast<int>(objects_.size()); }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  int rare_threshold() const { return rare_threshold_; }

  const std::vector<std::string>& actions() const { return actions_; }
  const std::vector<std::string>& objects() const { return objects_; }
  const std::vector<HoiClass>& hoi_classes() const { return classes_; }

  const std::string& action_name(int action) const;
  const std::string& object_name(int object) const;
  const HoiClass& hoi_class(int index) const;

  std::optional<int> FindAction(std::string_view name) const;
  std::optional<int> FindObject(std::string_view name) const;
  // Throw VocabularyError for unknown names.
  int ActionIndex(std::string_view name) const;
  int ObjectIndex(std::string_view name) const;

  // Index into hoi_classes(), or nullopt when (object, action) is not valid.
  std::optional<int> ClassIndex(int object, int action) const;
  // Classes whose object is `object`, ascending.
  std::span<const int> ClassesForObject(int object) const;

  // "object action" display label for class `index`.
  std::string ClassLabel(int index) const;

 private:
  std::vector<std::string> actions_;
  std::vector<std::string> objects_;
  std::vector<HoiClass> classes_;
  int rare_threshold_ = kDefaultRareThreshold;

  std::unordered_map<std::string, int> action_index_;
  std::unordered_map<std::string, int> object_index_;
  std::unordered_map<int64_t, int> class_index_;
  std::vector<std::vector<int>> classes_by_object_;
};

// JSON form: {"actions": [...], "objects": [...],
//             "hoi_classes": [[object, action], ...], "rare_threshold": 10}
// with names in hoi_classes.
HoiSpace ParseHoiSpace(std::string_view json_text);
std::string HoiSpaceToJson(const HoiSpace& space);
HoiSpace LoadHoiSpace(const std::string& path);
void SaveHoiSpace(const HoiSpace& space, const std::string& path);

// Shared file helpers.
std::string ReadFileToString(const std::string& path);
void WriteStringToFile(const std::string& path, std::string_view contents);

}  // namespace acp

#endif  // ACP_HOI_SPACE_H_
