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

#include "acp/pair_io.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "acp/errors.h"
#include "json_util.h"

namespace acp {
namespace {

using internal::Field;
using internal::Json;

Box ReadBox(const Json& j, const char* key, const std::string& where) {
  auto v = Field<std::vector<double>>(j, key, where);
  if (v.size() != 4) throw ParseError(where, std::string(key) + " needs 4 reals");
  Box box{v[0], v[1], v[2], v[3]};
  if (!IsWellFormed(box)) {
    throw ParseError(where, std::string(key) + " is not well-formed");
  }
  return box;
}

}  // namespace

std::string PairToJsonLine(const PairExample& pair, const HoiSpace& space) {
  Json actions = Json::array();
  for (int a : pair.gt_actions) actions.push_back(space.action_name(a));
  Json j = {
      {"image_id", pair.image_id},
      {"object", space.object_name(pair.object)},
      {"det_h", pair.det_h},
      {"det_o", pair.det_o},
      {"x_h", pair.x_h},
      {"x_o", pair.x_o},
      {"k", pair.k},
      {"b", pair.b},
      {"o_embed", pair.o_embed},
      {"actions", actions},
      {"human_box", pair.human_box},
      {"object_box", pair.object_box},
  };
  return j.dump();
}

std::vector<PairExample> ParsePairs(std::string_view text,
                                    const HoiSpace& space) {
  std::vector<PairExample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line.begin(), line.end());
    } catch (const Json::parse_error& e) {
      throw ParseError(where + ", column " + std::to_string(e.byte), e.what());
    }
    PairExample p;
    p.image_id = Field<std::string>(j, "image_id", where);
    p.object = space.ObjectIndex(Field<std::string>(j, "object", where));
    p.det_h = Field<double>(j, "det_h", where);
    p.det_o = Field<double>(j, "det_o", where);
    if (!(p.det_h >= 0.0 && p.det_h <= 1.0 && p.det_o >= 0.0 &&
          p.det_o <= 1.0)) {
      throw ParseError(where, "detector scores must lie in [0, 1]");
    }
    p.x_h = Field<std::vector<double>>(j, "x_h", where);
    p.x_o = Field<std::vector<double>>(j, "x_o", where);
    p.k = Field<std::vector<double>>(j, "k", where);
    p.b = Field<std::vector<double>>(j, "b", where);
    p.o_embed = Field<std::vector<double>>(j, "o_embed", where);
    for (const auto& name : Field<std::vector<std::string>>(j, "actions", where)) {
      p.gt_actions.push_back(space.ActionIndex(name));
    }
    std::sort(p.gt_actions.begin(), p.gt_actions.end());
    p.gt_actions.erase(std::unique(p.gt_actions.begin(), p.gt_actions.end()),
                       p.gt_actions.end());
    p.human_box = ReadBox(j, "human_box", where);
    p.object_box = ReadBox(j, "object_box", where);
    out.push_back(std::move(p));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<PairExample> LoadPairs(const std::string& path,
                                   const HoiSpace& space) {
  return ParsePairs(ReadFileToString(path), space);
}

void SavePairs(const std::vector<PairExample>& pairs, const HoiSpace& space,
               const std::string& path) {
  std::string text;
  for (const PairExample& p : pairs) {
    text += PairToJsonLine(p, space);
    text += '\n';
  }
  WriteStringToFile(path, text);
}

std::vector<double> EmbeddingTable::row(int object) const {
  if (object < 0 || object >= num_objects) {
    throw ContractError("embedding row out of range");
  }
  auto begin = values.begin() + static_cast<std::ptrdiff_t>(object) * dim;
  return std::vector<double>(begin, begin + dim);
}

EmbeddingTable ParseEmbeddingTable(std::string_view text) {
  std::istringstream in{std::string(text)};
  EmbeddingTable t;
  if (!(in >> t.num_objects >> t.dim) || t.num_objects < 0 || t.dim <= 0) {
    throw ParseError("line 1", "expected '<num_objects> <dim>' header");
  }
  t.values.resize(static_cast<std::size_t>(t.num_objects) * t.dim);
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    if (!(in >> t.values[i])) {
      throw ParseError("row " + std::to_string(i / t.dim + 1),
                       "expected " + std::to_string(t.dim) + " reals");
    }
  }
  std::string extra;
  if (in >> extra) throw ParseError("end", "trailing data in embedding table");
  return t;
}

std::string FormatEmbeddingTable(const EmbeddingTable& table) {
  std::string out =
      std::to_string(table.num_objects) + " " + std::to_string(table.dim) + "\n";
  char buf[40];
  for (int o = 0; o < table.num_objects; ++o) {
    for (int d = 0; d < table.dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    table.values[static_cast<std::size_t>(o) * table.dim + d]);
      if (d) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

EmbeddingTable LoadEmbeddingTable(const std::string& path) {
  return ParseEmbeddingTable(ReadFileToString(path));
}

void SaveEmbeddingTable(const EmbeddingTable& table, const std::string& path) {
  WriteStringToFile(path, FormatEmbeddingTable(table));
}

void AttachEmbeddings(const EmbeddingTable& table,
                      std::vector<PairExample>& pairs) {
  for (PairExample& p : pairs) p.o_embed = table.row(p.object);
}

}  // namespace acp
