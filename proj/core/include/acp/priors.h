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

#ifndef ACP_PRIORS_H_
#define ACP_PRIORS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "acp/annotations.h"
#include "acp/hoi_space.h"

namespace acp {

// Image-level label counts for one scope (one object, or all objects).
struct LabelCounts {
  int num_actions = 0;
  int64_t n_images = 0;
  std::vector<int64_t> n_i;   // images containing action i
  std::vector<int64_t> n_ij;  // N x N row-major, images containing i and j

  explicit LabelCounts(int n = 0)
      : num_actions(n), n_i(n, 0), n_ij(static_cast<std::size_t>(n) * n, 0) {}

  int64_t single(int i) const { return n_i[i]; }
  int64_t pair(int i, int j) const {
    return n_ij[static_cast<std::size_t>(i) * num_actions + j];
  }
};

struct CooccurrenceStats {
  std::vector<LabelCounts> per_object;
  LabelCounts global;
};

// Counts co-occurrence at image level. For object o, an image contributes
// action i when some instance of that image has object o and action i; the
// global scope ignores the object. Records sharing an image_id are merged
// before counting.
CooccurrenceStats CountLabelStats(std::span<const AnnotationRecord> dataset,
                                  const HoiSpace& space);

class PriorScope {
 public:
  static PriorScope Global() { return PriorScope(-1); }
  static PriorScope Object(int object) { return PriorScope(object); }

  bool is_global() const { return object_ < 0; }
  int object() const { return object_; }
  // -1 for global, the object index otherwise. Used by the prior file.
  int tag() const { return object_; }
  static PriorScope FromTag(int tag) { return PriorScope(tag < 0 ? -1 : tag); }

  friend bool operator==(const PriorScope&, const PriorScope&) = default;

 private:
  explicit PriorScope(int object) : object_(object) {}
  int object_;
};

// C[i][j] = p(j | i) and C'[i][j] = p(j | not i) for one scope.
struct PriorMatrices {
  PriorScope scope = PriorScope::Global();
  int num_actions = 0;
  std::vector<double> cooccurrence;  // row-major C
  std::vector<double> complement;    // row-major C'

  double c(int i, int j) const {
    return cooccurrence[static_cast<std::size_t>(i) * num_actions + j];
  }
  double c_comp(int i, int j) const {
    return complement[static_cast<std::size_t>(i) * num_actions + j];
  }
};

// c_ij = n_ij / n_i (0 when n_i = 0); c'_ij = (n_j - n_ij) / (n - n_i)
// (0 when n = n_i); diag(C') = 0. No smoothing: exact zeros are meaningful.
PriorMatrices BuildPriors(const LabelCounts& counts, PriorScope scope);
PriorMatrices BuildPriors(const CooccurrenceStats& stats, PriorScope scope);

const LabelCounts& CountsFor(const CooccurrenceStats& stats, PriorScope scope);

}  // namespace acp

#endif  // ACP_PRIORS_H_
