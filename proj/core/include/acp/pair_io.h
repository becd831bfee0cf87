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

#ifndef ACP_PAIR_IO_H_
#define ACP_PAIR_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "acp/hoi_space.h"
#include "acp/model.h"

namespace acp {

// JSON-lines feature file. One pair per line:
//   {"image_id": str, "object": str, "det_h": r, "det_o": r,
//    "x_h": [...], "x_o": [...], "k": [...], "b": [...], "o_embed": [...],
//    "actions": [str, ...], "human_box": [4], "object_box": [4]}
// Blank lines are skipped. Errors carry the 1-based line number.
std::string PairToJsonLine(const PairExample& pair, const HoiSpace& space);
std::vector<PairExample> ParsePairs(std::string_view text,
                                    const HoiSpace& space);
std::vector<PairExample> LoadPairs(const std::string& path,
                                   const HoiSpace& space);
void SavePairs(const std::vector<PairExample>& pairs, const HoiSpace& space,
               const std::string& path);

// Object embedding table: first line "<num_objects> <dim>", then one row of
// `dim` reals per object in vocabulary order.
struct EmbeddingTable {
  int num_objects = 0;
  int dim = 0;
  std::vector<double> values;  // row-major

  std::vector<double> row(int object) const;
};

EmbeddingTable ParseEmbeddingTable(std::string_view text);
std::string FormatEmbeddingTable(const EmbeddingTable& table);
EmbeddingTable LoadEmbeddingTable(const std::string& path);
void SaveEmbeddingTable(const EmbeddingTable& table, const std::string& path);

// Overwrites every pair's o_embed with the table row of its object.
void AttachEmbeddings(const EmbeddingTable& table,
                      std::vector<PairExample>& pairs);

}  // namespace acp

#endif  // ACP_PAIR_IO_H_
