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

#ifndef ACP_ANCHORS_H_
#define ACP_ANCHORS_H_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acp/hoi_space.h"
#include "acp/priors.h"

namespace acp {

// e_i = number of actions j with c_ij == 0 (exact comparison).
std::vector<int> Exclusiveness(const PriorMatrices& priors);

enum class OtherGroupRule {
  // j is in the `other` group iff it occurs in a training image without any
  // anchor, plus every regular action no anchor group covers.
  kAnchorFreeImagesPlusUncovered,
};

// Mutually exclusive anchors D, the regular actions R, and the per-anchor
// action groups. Slot k < |D| is anchors[k]; slot |D| is `other`.
struct AnchorPartition {
  int num_actions = 0;
  std::vector<int> anchors;          // selection order
  std::optional<int> max_anchors;    // nullopt = unlimited
  std::vector<int> regular;          // ascending
  std::vector<std::vector<int>> groups;  // |D|+1 entries, ascending actions
  OtherGroupRule other_rule = OtherGroupRule::kAnchorFreeImagesPlusUncovered;
  // Regular actions that were only reachable through the forced `other`
  // membership. Reported as a warning set.
  std::vector<int> uncovered;

  int num_anchors() const { return static_cast<int>(anchors.size()); }
  int num_regular() const { return static_cast<int>(regular.size()); }
  int other_slot() const { return num_anchors(); }
  // Anchor slot of `action`, or -1 when it is regular.
  int AnchorSlot(int action) const;
  // Position of `action` within `regular`, or -1 when it is an anchor.
  int RegularSlot(int action) const;
  bool InGroup(int slot, int action) const;
};

// Non-exclusive suppression, executed literally: each round re-scans the
// remaining candidates for the largest e (lowest index wins ties), selects
// it, and drops every remaining k with c_mk > 0. Stops when no candidates
// remain or `max_anchors` anchors were selected. Throws ContractError when
// max_anchors == 0. Groups are left empty; see BuildGroups.
AnchorPartition SelectAnchors(const PriorMatrices& priors,
                              std::span<const int> exclusiveness,
                              std::optional<int> max_anchors);

// One sort by (e desc, index asc) followed by a single sweep. Equivalent to
// SelectAnchors because e never changes during suppression; kept so the
// equivalence stays tested.
std::vector<int> SelectAnchorsOnePass(const PriorMatrices& priors,
                                      std::span<const int> exclusiveness,
                                      std::optional<int> max_anchors);

// An anchor's group holds the regular actions it co-occurs with. The other
// group comes from `counts` (same scope as `priors`). Anchors must be pairwise exclusive in `counts`.
AnchorPartition BuildGroups(const PriorMatrices& priors,
                            AnchorPartition partition,
                            const LabelCounts& counts);

// One-hot target of length |D|+1 for the anchor softmax head. Throws
// ContractError when `labels` holds two or more anchors.
std::vector<double> AnchorTarget(std::span<const int> labels,
                                 const AnchorPartition& partition);

// Returns human-readable invariant violations; empty when valid.
std::vector<std::string> ValidatePartition(const AnchorPartition& partition,
                                           const PriorMatrices& priors);

// {"anchors": [...], "groups": {"<anchor>" | "__other__": [...]},
//  "max_anchors": int | null}
inline constexpr std::string_view kOtherGroupKey = "__other__";
std::string PartitionToJson(const AnchorPartition& partition,
                            const HoiSpace& space);
AnchorPartition ParsePartition(std::string_view json_text,
                               const HoiSpace& space);
AnchorPartition LoadPartition(const std::string& path, const HoiSpace& space);
void SavePartition(const AnchorPartition& partition, const HoiSpace& space,
                   const std::string& path);

}  // namespace acp

#endif  // ACP_ANCHORS_H_
