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

#include "acp/priors.h"

#include <algorithm>
#include <map>
#include <string>

#include "acp/errors.h"

namespace acp {
namespace {

void AddImage(LabelCounts& counts, const std::vector<bool>& present) {
  const int n = counts.num_actions;
  ++counts.n_images;
  std::vector<int> seen;
  for (int i = 0; i < n; ++i) {
    if (present[i]) seen.push_back(i);
  }
  for (int i : seen) {
    ++counts.n_i[i];
    for (int j : seen) ++counts.n_ij[static_cast<std::size_t>(i) * n + j];
  }
}

}  // namespace

CooccurrenceStats CountLabelStats(std::span<const AnnotationRecord> dataset,
                                  const HoiSpace& space) {
  const int n = space.num_actions();
  const int num_objects = space.num_objects();

  // image_id -> per-object action presence (index num_objects is global).
  // std::map keeps the result independent of record order.
  std::map<std::string, std::vector<std::vector<bool>>> images;
  for (const AnnotationRecord& record : dataset) {
    auto [it, inserted] = images.try_emplace(record.image_id);
    if (inserted) {
      it->second.assign(num_objects + 1, std::vector<bool>(n, false));
    }
    for (const Instance& inst : record.instances) {
      if (inst.object < 0 || inst.object >= num_objects) {
        throw ContractError("instance object index out of range in image '" +
                            record.image_id + "'");
      }
      for (int a : inst.actions) {
        if (a < 0 || a >= n) {
          throw ContractError("instance action index out of range in image '" +
                              record.image_id + "'");
        }
        it->second[inst.object][a] = true;
        it->second[num_objects][a] = true;
      }
    }
  }

  CooccurrenceStats stats;
  stats.per_object.assign(num_objects, LabelCounts(n));
  stats.global = LabelCounts(n);
  for (const auto& [id, presence] : images) {
    for (int o = 0; o < num_objects; ++o) {
      if (std::any_of(presence[o].begin(), presence[o].end(),
                      [](bool b) { return b; })) {
        AddImage(stats.per_object[o], presence[o]);
      }
    }
    AddImage(stats.global, presence[num_objects]);
  }
  return stats;
}

PriorMatrices BuildPriors(const LabelCounts& counts, PriorScope scope) {
  const int n = counts.num_actions;
  PriorMatrices priors;
  priors.scope = scope;
  priors.num_actions = n;
  priors.cooccurrence.assign(static_cast<std::size_t>(n) * n, 0.0);
  priors.complement.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int64_t n_i = counts.single(i);
    const int64_t absent = counts.n_images - n_i;
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      const int64_t n_ij = counts.pair(i, j);
      if (n_i > 0) {
        priors.cooccurrence[k] =
            static_cast<double>(n_ij) / static_cast<double>(n_i);
      }
      if (i != j && absent > 0) {
        priors.complement[k] = static_cast<double>(counts.single(j) - n_ij) /
                               static_cast<double>(absent);
      }
    }
  }
  return priors;
}

const LabelCounts& CountsFor(const CooccurrenceStats& stats, PriorScope scope) {
  if (scope.is_global()) return stats.global;
  if (scope.object() >= static_cast<int>(stats.per_object.size())) {
    throw ContractError("prior scope object " +
                        std::to_string(scope.object()) + " out of range");
  }
  return stats.per_object[scope.object()];
}

PriorMatrices BuildPriors(const CooccurrenceStats& stats, PriorScope scope) {
  return BuildPriors(CountsFor(stats, scope), scope);
}

}  // namespace acp
