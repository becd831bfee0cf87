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

#ifndef ACP_SRC_JSON_UTIL_H_
#define ACP_SRC_JSON_UTIL_H_

#include <string>
#include <string_view>

#include "acp/errors.h"
#include "json.hpp"

namespace acp::internal {

using Json = nlohmann::json;

// "line L, column C" for a 1-based byte offset into `text`.
inline std::string LineColumn(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Json ParseJson(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(LineColumn(text, e.byte), e.what());
  }
}

// Typed field access that reports `where` on failure.
template <typename T>
T Field(const Json& object, const char* key, const std::string& where) {
  if (!object.is_object()) throw ParseError(where, "expected a JSON object");
  auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError(where, std::string("missing field '") + key + "'");
  }
  try {
    return it->template get<T>();
  } catch (const Json::exception& e) {
    throw ParseError(where, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace acp::internal

#endif  // ACP_SRC_JSON_UTIL_H_
