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

#ifndef ACP_PRIOR_IO_H_
#define ACP_PRIOR_IO_H_

#include <string>
#include <vector>

#include "acp/hoi_space.h"
#include "acp/priors.h"

namespace acp {

// Everything the prior file carries: vocabularies, raw counts, and the
// matrices for the global scope and every object scope.
struct PriorBundle {
  HoiSpace space;
  CooccurrenceStats stats;
  PriorMatrices global;
  std::vector<PriorMatrices> per_object;

  const PriorMatrices& ForScope(PriorScope scope) const;
};

PriorBundle MakePriorBundle(const HoiSpace& space,
                            const std::vector<AnnotationRecord>& dataset);

// Binary layout (little-endian):
//   "ACPPRIOR" u32 version
//   vocab: u32 count + (u32 len, bytes) for actions, then objects
//   u32 rare_threshold, u32 M, M x (u32 object, u32 action)
//   u32 scope_count; per scope: i32 tag (-1 = global), u64 n_images,
//     N x u64 n_i, N*N x u64 n_ij, N*N x f64 C, N*N x f64 C'
// Reals are written as raw IEEE-754 bits, so a read-write cycle is exact.
std::string SerializePriorBundle(const PriorBundle& bundle);
PriorBundle DeserializePriorBundle(const std::string& bytes);

void SavePriorBundle(const PriorBundle& bundle, const std::string& path);
PriorBundle LoadPriorBundle(const std::string& path);

}  // namespace acp

#endif  // ACP_PRIOR_IO_H_
