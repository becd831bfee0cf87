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

#ifndef ACP_NN_CHECKPOINT_H_
#define ACP_NN_CHECKPOINT_H_

#include <string>

#include "acp/nn/param_store.h"

namespace acp::nn {

// Named-tensor container:
//   "ACPCKPT1" u64 seed u32 count
//   per tensor: u32 name_len, name, u64 rows, u64 cols,
//               rows*cols little-endian f64
// Gradients are not stored. Loading restores values bit-exactly.
std::string SerializeCheckpoint(const ParamStore& store);
ParamStore DeserializeCheckpoint(const std::string& bytes);

void SaveCheckpoint(const ParamStore& store, const std::string& path);
ParamStore LoadCheckpoint(const std::string& path);

// Copies values from `source` into same-named, same-shaped parameters of
// `target`. Throws ContractError on any missing name or shape mismatch.
void CopyValues(const ParamStore& source, ParamStore& target);

}  // namespace acp::nn

#endif  // ACP_NN_CHECKPOINT_H_
