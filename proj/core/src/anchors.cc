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

#include "acp/anchors.h"

#include <algorithm>
#include <numeric>

#include "acp/errors.h"
#include "json_util.h"

namespace acp {
namespace {

void CheckCap(std::optional<int> max_anchors) {
  if (max_anchors && *max_anchors <= 0) {
    throw ContractError("max_anchors must be at least 1");
  }
}

void FillRegular(AnchorPartition& p) {
  p.regular.clear();
  for (int a = 0; a < p.num_actions; ++a) {
    if (p.AnchorSlot(a) < 0) p.regular.push_back(a);
  }
}

}  // namespace

std::vector<int> Exclusiveness(const PriorMatrices& priors) {
  const int n = priors.num_actions;
  std::vector<int> e(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (priors.c(i, j) == 0.0) ++e[i];
    }
  }
  return e;
}

int AnchorPartition::AnchorSlot(int action) const {
  auto it = std::find(anchors.begin(), anchors.end(), action);
  return it == anchors.end() ? -1 : static_cast<int>(it - anchors.begin());
}

int AnchorPartition::RegularSlot(int action) const {
  auto it = std::lower_bound(regular.begin(), regular.end(), action);
  if (it == regular.end() || *it != action) return -1;
  return static_cast<int>(it - regular.begin());
}

bool AnchorPartition::InGroup(int slot, int action) const {
  const auto& g = groups.at(slot);
  return std::binary_search(g.begin(), g.end(), action);
}

AnchorPartition SelectAnchors(const PriorMatrices& priors,
                              std::span<const int> exclusiveness,
                              std::optional<int> max_anchors) {
  CheckCap(max_anchors);
  const int n = priors.num_actions;
  if (static_cast<int>(exclusiveness.size()) != n) {
    throw ContractError("exclusiveness vector length does not match priors");
  }
  AnchorPartition p;
  p.num_actions = n;
  p.max_anchors = max_anchors;

  std::vector<bool> remaining(n, true);
  int left = n;
  while (left > 0) {
    if (max_anchors && p.num_anchors() == *max_anchors) break;
    int m = -1;
    for (int k = 0; k < n; ++k) {
      if (remaining[k] && (m < 0 || exclusiveness[k] > exclusiveness[m])) m = k;
    }
    p.anchors.push_back(m);
    for (int k = 0; k < n; ++k) {
      if (remaining[k] && priors.c(m, k) > 0.0) {
        remaining[k] = false;
        --left;
      }
    }
    // An unseen action has c_mm = 0 and would never suppress itself.
    if (remaining[m]) {
      remaining[m] = false;
      --left;
    }
  }
  FillRegular(p);
  p.groups.assign(p.num_anchors() + 1, {});
  return p;
}

std::vector<int> SelectAnchorsOnePass(const PriorMatrices& priors,
                                      std::span<const int> exclusiveness,
                                      std::optional<int> max_anchors) {
  CheckCap(max_anchors);
  const int n = priors.num_actions;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return exclusiveness[a] > exclusiveness[b];
  });
  std::vector<bool> suppressed(n, false);
  std::vector<int> anchors;
  for (int m : order) {
    if (max_anchors && static_cast<int>(anchors.size()) == *max_anchors) break;
    if (suppressed[m]) continue;
    anchors.push_back(m);
    suppressed[m] = true;
    for (int k = 0; k < n; ++k) {
      if (priors.c(m, k) > 0.0) suppressed[k] = true;
    }
  }
  return anchors;
}

AnchorPartition BuildGroups(const PriorMatrices& priors,
                            AnchorPartition partition,
                            const LabelCounts& counts) {
  AnchorPartition& p = partition;
  if (p.regular.empty() && p.num_anchors() < p.num_actions) FillRegular(p);
  p.groups.assign(p.num_anchors() + 1, {});
  p.uncovered.clear();
  std::vector<bool> covered(p.num_actions, false);
  for (int slot = 0; slot < p.num_anchors(); ++slot) {
    const int anchor = p.anchors[slot];
    for (int j : p.regular) {
      if (priors.c(anchor, j) > 0.0) {
        p.groups[slot].push_back(j);
        covered[j] = true;
      }
    }
  }
  // Anchors never share an image, so images holding j and some anchor are
  // counted exactly once by the sum below.
  auto& other = p.groups[p.other_slot()];
  for (int j : p.regular) {
    int64_t with_anchor = 0;
    for (int anchor : p.anchors) with_anchor += counts.pair(j, anchor);
    if (counts.single(j) - with_anchor > 0) {
      other.push_back(j);
      covered[j] = true;
    }
  }
  for (int j : p.regular) {
    if (!covered[j]) {
      other.push_back(j);
      p.uncovered.push_back(j);
    }
  }
  std::sort(other.begin(), other.end());
  p.other_rule = OtherGroupRule::kAnchorFreeImagesPlusUncovered;
  return partition;
}

std::vector<double> AnchorTarget(std::span<const int> labels,
                                 const AnchorPartition& partition) {
  std::vector<double> target(partition.num_anchors() + 1, 0.0);
  std::vector<int> hits;
  for (int a : labels) {
    int slot = partition.AnchorSlot(a);
    if (slot >= 0 && std::find(hits.begin(), hits.end(), a) == hits.end()) {
      hits.push_back(a);
    }
  }
  if (hits.size() >= 2) {
    std::string names;
    for (int a : hits) names += (names.empty() ? "" : ", ") + std::to_string(a);
    throw ContractError("label set holds multiple anchors: {" + names + "}");
  }
  if (hits.empty()) {
    target[partition.other_slot()] = 1.0;
  } else {
    target[partition.AnchorSlot(hits.front())] = 1.0;
  }
  return target;
}

std::vector<std::string> ValidatePartition(const AnchorPartition& p,
                                           const PriorMatrices& priors) {
  std::vector<std::string> problems;
  const int n = p.num_actions;
  for (std::size_t a = 0; a < p.anchors.size(); ++a) {
    for (std::size_t b = a + 1; b < p.anchors.size(); ++b) {
      const int x = p.anchors[a];
      const int y = p.anchors[b];
      if (priors.c(x, y) != 0.0 || priors.c(y, x) != 0.0) {
        problems.push_back("anchors " + std::to_string(x) + " and " +
                           std::to_string(y) + " co-occur");
      }
    }
  }
  std::vector<int> seen(n, 0);
  for (int a : p.anchors) ++seen[a];
  for (int r : p.regular) ++seen[r];
  for (int a = 0; a < n; ++a) {
    if (seen[a] != 1) {
      problems.push_back("action " + std::to_string(a) +
                         " is not in exactly one of anchors/regular");
    }
  }
  if (static_cast<int>(p.groups.size()) != p.num_anchors() + 1) {
    problems.push_back("expected |D|+1 groups");
    return problems;
  }
  for (int slot = 0; slot < p.num_anchors(); ++slot) {
    for (int j : p.regular) {
      const bool expected = priors.c(p.anchors[slot], j) > 0.0;
      if (expected != p.InGroup(slot, j)) {
        problems.push_back("group of anchor " + std::to_string(p.anchors[slot]) +
                           " disagrees with C at action " + std::to_string(j));
      }
    }
  }
  for (const auto& g : p.groups) {
    for (int j : g) {
      if (p.RegularSlot(j) < 0) {
        problems.push_back("group holds non-regular action " +
                           std::to_string(j));
      }
    }
  }
  return problems;
}

std::string PartitionToJson(const AnchorPartition& p, const HoiSpace& space) {
  internal::Json doc;
  internal::Json anchors = internal::Json::array();
  for (int a : p.anchors) anchors.push_back(space.action_name(a));
  internal::Json groups = internal::Json::object();
  for (int slot = 0; slot <= p.num_anchors(); ++slot) {
    internal::Json members = internal::Json::array();
    for (int j : p.groups[slot]) members.push_back(space.action_name(j));
    const std::string key = slot == p.other_slot()
                                ? std::string(kOtherGroupKey)
                                : space.action_name(p.anchors[slot]);
    groups[key] = std::move(members);
  }
  doc["anchors"] = std::move(anchors);
  doc["groups"] = std::move(groups);
  if (p.max_anchors) {
    doc["max_anchors"] = *p.max_anchors;
  } else {
    doc["max_anchors"] = nullptr;
  }
  return doc.dump(2) + "\n";
}

AnchorPartition ParsePartition(std::string_view json_text,
                               const HoiSpace& space) {
  using internal::Field;
  using internal::Json;
  const Json doc = internal::ParseJson(json_text);
  AnchorPartition p;
  p.num_actions = space.num_actions();
  for (const auto& name :
       Field<std::vector<std::string>>(doc, "anchors", "partition")) {
    p.anchors.push_back(space.ActionIndex(name));
  }
  if (doc.contains("max_anchors") && !doc["max_anchors"].is_null()) {
    int k = Field<int>(doc, "max_anchors", "partition");
    if (k > 0) p.max_anchors = k;
  }
  FillRegular(p);
  p.groups.assign(p.num_anchors() + 1, {});
  const Json groups = Field<Json>(doc, "groups", "partition");
  if (!groups.is_object()) throw ParseError("partition", "'groups' must be an object");
  for (const auto& [key, members] : groups.items()) {
    int slot = key == kOtherGroupKey ? p.other_slot()
                                     : p.AnchorSlot(space.ActionIndex(key));
    if (slot < 0) {
      throw ParseError("partition", "group key '" + key + "' is not an anchor");
    }
    for (const auto& name : members.get<std::vector<std::string>>()) {
      p.groups[slot].push_back(space.ActionIndex(name));
    }
    std::sort(p.groups[slot].begin(), p.groups[slot].end());
  }
  return p;
}

AnchorPartition LoadPartition(const std::string& path, const HoiSpace& space) {
  return ParsePartition(ReadFileToString(path), space);
}

void SavePartition(const AnchorPartition& partition, const HoiSpace& space,
                   const std::string& path) {
  WriteStringToFile(path, PartitionToJson(partition, space));
}

}  // namespace acp
