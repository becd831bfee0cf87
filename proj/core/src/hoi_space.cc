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

#include "acp/hoi_space.h"

#include <fstream>
#include <sstream>

#include "acp/errors.h"
#include "json_util.h"

namespace acp {
namespace {

int64_t ClassKey(int object, int action) {
  return (static_cast<int64_t>(object) << 32) | static_cast<uint32_t>(action);
}

}  // namespace

HoiSpace::HoiSpace(std::vector<std::string> actions,
                   std::vector<std::string> objects,
                   std::vector<HoiClass> hoi_classes, int rare_threshold)
    : actions_(std::move(actions)),
      objects_(std::move(objects)),
      classes_(std::move(hoi_classes)),
      rare_threshold_(rare_threshold) {
  for (int i = 0; i < num_actions(); ++i) {
    if (!action_index_.emplace(actions_[i], i).second) {
      throw ContractError("duplicate action name '" + actions_[i] + "'");
    }
  }
  for (int i = 0; i < num_objects(); ++i) {
    if (!object_index_.emplace(objects_[i], i).second) {
      throw ContractError("duplicate object name '" + objects_[i] + "'");
    }
  }
  classes_by_object_.resize(objects_.size());
  for (int m = 0; m < num_classes(); ++m) {
    const HoiClass& c = classes_[m];
    if (c.object < 0 || c.object >= num_objects() || c.action < 0 ||
        c.action >= num_actions()) {
      throw ContractError("hoi class " + std::to_string(m) +
                          " references an out-of-range index");
    }
    if (!class_index_.emplace(ClassKey(c.object, c.action), m).second) {
      throw ContractError("duplicate hoi class (" + objects_[c.object] + ", " +
                          actions_[c.action] + ")");
    }
    classes_by_object_[c.object].push_back(m);
  }
  if (rare_threshold_ < 0) throw ContractError("rare_threshold must be >= 0");
}

const std::string& HoiSpace::action_name(int action) const {
  return actions_.at(action);
}

const std::string& HoiSpace::object_name(int object) const {
  return objects_.at(object);
}

const HoiClass& HoiSpace::hoi_class(int index) const {
  return classes_.at(index);
}

std::optional<int> HoiSpace::FindAction(std::string_view name) const {
  auto it = action_index_.find(std::string(name));
  if (it == action_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> HoiSpace::FindObject(std::string_view name) const {
  auto it = object_index_.find(std::string(name));
  if (it == object_index_.end()) return std::nullopt;
  return it->second;
}

int HoiSpace::ActionIndex(std::string_view name) const {
  if (auto i = FindAction(name)) return *i;
  throw VocabularyError("action", std::string(name));
}

int HoiSpace::ObjectIndex(std::string_view name) const {
  if (auto i = FindObject(name)) return *i;
  throw VocabularyError("object", std::string(name));
}

std::optional<int> HoiSpace::ClassIndex(int object, int action) const {
  auto it = class_index_.find(ClassKey(object, action));
  if (it == class_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const int> HoiSpace::ClassesForObject(int object) const {
  return classes_by_object_.at(object);
}

std::string HoiSpace::ClassLabel(int index) const {
  const HoiClass& c = hoi_class(index);
  return objects_[c.object] + " " + actions_[c.action];
}

HoiSpace ParseHoiSpace(std::string_view json_text) {
  using internal::Field;
  const internal::Json doc = internal::ParseJson(json_text);
  const std::string where = "hoi space";
  auto actions = Field<std::vector<std::string>>(doc, "actions", where);
  auto objects = Field<std::vector<std::string>>(doc, "objects", where);
  int rare = HoiSpace::kDefaultRareThreshold;
  if (doc.contains("rare_threshold")) {
    rare = Field<int>(doc, "rare_threshold", where);
  }
  // Resolve names against a class-free space first.
  HoiSpace names(actions, objects, {}, rare);
  std::vector<HoiClass> classes;
  auto raw = Field<std::vector<std::vector<std::string>>>(doc, "hoi_classes",
                                                          where);
  for (std::size_t m = 0; m < raw.size(); ++m) {
    if (raw[m].size() != 2) {
      throw ParseError("hoi_classes[" + std::to_string(m) + "]",
                       "expected [object, action]");
    }
    classes.push_back(
        {names.ObjectIndex(raw[m][0]), names.ActionIndex(raw[m][1])});
  }
  return HoiSpace(std::move(actions), std::move(objects), std::move(classes),
                  rare);
}

std::string HoiSpaceToJson(const HoiSpace& space) {
  internal::Json doc;
  doc["actions"] = space.actions();
  doc["objects"] = space.objects();
  internal::Json classes = internal::Json::array();
  for (const HoiClass& c : space.hoi_classes()) {
    classes.push_back(
        {space.object_name(c.object), space.action_name(c.action)});
  }
  doc["hoi_classes"] = std::move(classes);
  doc["rare_threshold"] = space.rare_threshold();
  return doc.dump(2) + "\n";
}

HoiSpace LoadHoiSpace(const std::string& path) {
  return ParseHoiSpace(ReadFileToString(path));
}

void SaveHoiSpace(const HoiSpace& space, const std::string& path) {
  WriteStringToFile(path, HoiSpaceToJson(space));
}

std::string ReadFileToString(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteStringToFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace acp
