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

#include "acp/annotations.h"

#include <algorithm>
#include <unordered_map>

#include "acp/errors.h"
#include "json_util.h"

namespace acp {
namespace {

using internal::Field;
using internal::Json;

Box ParseBox(const Json& instance, const char* key, const std::string& where) {
  auto values = Field<std::vector<double>>(instance, key, where);
  if (values.size() != 4) {
    throw ParseError(where, std::string(key) + ": expected 4 numbers");
  }
  Box box{values[0], values[1], values[2], values[3]};
  if (!IsWellFormed(box)) {
    throw ParseError(where, std::string(key) + ": requires x1 < x2, y1 < y2");
  }
  return box;
}

std::string RecordWhere(std::size_t r) {
  return "record " + std::to_string(r);
}

std::string InstanceWhere(std::size_t r, std::size_t i) {
  return RecordWhere(r) + ", instance " + std::to_string(i);
}

const Json& RecordArray(const Json& doc) {
  if (!doc.is_array()) {
    throw ParseError("document", "expected a JSON array of records");
  }
  return doc;
}

}  // namespace

bool IsWellFormed(const Box& box) {
  return box[0] < box[2] && box[1] < box[3];
}

std::vector<AnnotationRecord> ParseAnnotations(std::string_view json_text,
                                               const HoiSpace& space) {
  const Json doc = internal::ParseJson(json_text);
  std::vector<AnnotationRecord> records;
  const Json& array = RecordArray(doc);
  records.reserve(array.size());
  for (std::size_t r = 0; r < array.size(); ++r) {
    const Json& raw = array[r];
    AnnotationRecord record;
    record.image_id = Field<std::string>(raw, "image_id", RecordWhere(r));
    const Json instances = Field<Json>(raw, "instances", RecordWhere(r));
    if (!instances.is_array()) {
      throw ParseError(RecordWhere(r), "'instances' must be an array");
    }
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::string where = InstanceWhere(r, i);
      const Json& inst = instances[i];
      Instance out;
      out.human_box = ParseBox(inst, "human_box", where);
      out.object_box = ParseBox(inst, "object_box", where);
      out.object = space.ObjectIndex(Field<std::string>(inst, "object", where));
      for (const auto& name :
           Field<std::vector<std::string>>(inst, "actions", where)) {
        out.actions.push_back(space.ActionIndex(name));
      }
      if (out.actions.empty()) {
        throw ParseError(where, "action set must be non-empty");
      }
      std::sort(out.actions.begin(), out.actions.end());
      out.actions.erase(std::unique(out.actions.begin(), out.actions.end()),
                        out.actions.end());
      record.instances.push_back(std::move(out));
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<AnnotationRecord> LoadAnnotations(const std::string& path,
                                              const HoiSpace& space) {
  return ParseAnnotations(ReadFileToString(path), space);
}

std::string AnnotationsToJson(const std::vector<AnnotationRecord>& records,
                              const HoiSpace& space) {
  Json doc = Json::array();
  for (const AnnotationRecord& record : records) {
    Json instances = Json::array();
    for (const Instance& inst : record.instances) {
      Json actions = Json::array();
      for (int a : inst.actions) actions.push_back(space.action_name(a));
      instances.push_back({{"human_box", inst.human_box},
                           {"object_box", inst.object_box},
                           {"object", space.object_name(inst.object)},
                           {"actions", std::move(actions)}});
    }
    doc.push_back(
        {{"image_id", record.image_id}, {"instances", std::move(instances)}});
  }
  return doc.dump() + "\n";
}

void SaveAnnotations(const std::vector<AnnotationRecord>& records,
                     const HoiSpace& space, const std::string& path) {
  WriteStringToFile(path, AnnotationsToJson(records, space));
}

HoiSpace InferHoiSpace(std::string_view json_text) {
  const Json doc = internal::ParseJson(json_text);
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::unordered_map<std::string, int> action_index;
  std::unordered_map<std::string, int> object_index;
  std::vector<HoiClass> classes;
  auto intern = [](std::unordered_map<std::string, int>& index,
                   std::vector<std::string>& names, const std::string& name) {
    auto [it, inserted] =
        index.emplace(name, static_cast<int>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  };
  const Json& array = RecordArray(doc);
  for (std::size_t r = 0; r < array.size(); ++r) {
    const Json instances = Field<Json>(array[r], "instances", RecordWhere(r));
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::string where = InstanceWhere(r, i);
      int o = intern(object_index, objects,
                     Field<std::string>(instances[i], "object", where));
      for (const auto& name :
           Field<std::vector<std::string>>(instances[i], "actions", where)) {
        int a = intern(action_index, actions, name);
        HoiClass c{o, a};
        if (std::find(classes.begin(), classes.end(), c) == classes.end()) {
          classes.push_back(c);
        }
      }
    }
  }
  return HoiSpace(std::move(actions), std::move(objects), std::move(classes));
}

std::vector<int64_t> CountClassInstances(
    const std::vector<AnnotationRecord>& records, const HoiSpace& space) {
  std::vector<int64_t> counts(space.num_classes(), 0);
  for (const AnnotationRecord& record : records) {
    for (const Instance& inst : record.instances) {
      for (int a : inst.actions) {
        if (auto m = space.ClassIndex(inst.object, a)) ++counts[*m];
      }
    }
  }
  return counts;
}

}  // namespace acp
