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

#include "acp/prior_io.h"

#include "acp/errors.h"
#include "binary_io.h"

namespace acp {
namespace {

constexpr char kMagic[] = "ACPPRIOR";
constexpr uint32_t kVersion = 1;

void WriteScope(internal::ByteWriter& w, const LabelCounts& counts,
                const PriorMatrices& priors) {
  w.Put<int32_t>(priors.scope.tag());
  w.Put<uint64_t>(static_cast<uint64_t>(counts.n_images));
  for (int64_t v : counts.n_i) w.Put<uint64_t>(static_cast<uint64_t>(v));
  for (int64_t v : counts.n_ij) w.Put<uint64_t>(static_cast<uint64_t>(v));
  for (double v : priors.cooccurrence) w.Put<double>(v);
  for (double v : priors.complement) w.Put<double>(v);
}

void ReadScope(internal::ByteReader& r, int n, LabelCounts& counts,
               PriorMatrices& priors) {
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  priors.scope = PriorScope::FromTag(r.Get<int32_t>());
  priors.num_actions = n;
  counts = LabelCounts(n);
  counts.n_images = static_cast<int64_t>(r.Get<uint64_t>());
  for (auto& v : counts.n_i) v = static_cast<int64_t>(r.Get<uint64_t>());
  for (auto& v : counts.n_ij) v = static_cast<int64_t>(r.Get<uint64_t>());
  priors.cooccurrence.resize(nn);
  priors.complement.resize(nn);
  for (auto& v : priors.cooccurrence) v = r.Get<double>();
  for (auto& v : priors.complement) v = r.Get<double>();
}

}  // namespace

const PriorMatrices& PriorBundle::ForScope(PriorScope scope) const {
  if (scope.is_global()) return global;
  if (scope.object() >= static_cast<int>(per_object.size())) {
    throw ContractError("no priors for object " +
                        std::to_string(scope.object()));
  }
  return per_object[scope.object()];
}

PriorBundle MakePriorBundle(const HoiSpace& space,
                            const std::vector<AnnotationRecord>& dataset) {
  PriorBundle bundle;
  bundle.space = space;
  bundle.stats = CountLabelStats(dataset, space);
  bundle.global = BuildPriors(bundle.stats, PriorScope::Global());
  for (int o = 0; o < space.num_objects(); ++o) {
    bundle.per_object.push_back(BuildPriors(bundle.stats, PriorScope::Object(o)));
  }
  return bundle;
}

std::string SerializePriorBundle(const PriorBundle& bundle) {
  internal::ByteWriter w;
  w.PutBytes(std::string(kMagic, 8));
  w.Put<uint32_t>(kVersion);
  const HoiSpace& space = bundle.space;
  w.Put<uint32_t>(static_cast<uint32_t>(space.num_actions()));
  for (const auto& name : space.actions()) w.PutString(name);
  w.Put<uint32_t>(static_cast<uint32_t>(space.num_objects()));
  for (const auto& name : space.objects()) w.PutString(name);
  w.Put<uint32_t>(static_cast<uint32_t>(space.rare_threshold()));
  w.Put<uint32_t>(static_cast<uint32_t>(space.num_classes()));
  for (const HoiClass& c : space.hoi_classes()) {
    w.Put<uint32_t>(static_cast<uint32_t>(c.object));
    w.Put<uint32_t>(static_cast<uint32_t>(c.action));
  }
  w.Put<uint32_t>(static_cast<uint32_t>(1 + bundle.per_object.size()));
  WriteScope(w, bundle.stats.global, bundle.global);
  for (std::size_t o = 0; o < bundle.per_object.size(); ++o) {
    WriteScope(w, bundle.stats.per_object[o], bundle.per_object[o]);
  }
  return w.Take();
}

PriorBundle DeserializePriorBundle(const std::string& bytes) {
  internal::ByteReader r(bytes, "prior file");
  if (r.GetBytes(8) != std::string(kMagic, 8)) r.Fail("bad magic");
  if (r.Get<uint32_t>() != kVersion) r.Fail("unsupported version");

  std::vector<std::string> actions(r.Get<uint32_t>());
  for (auto& name : actions) name = r.GetString();
  std::vector<std::string> objects(r.Get<uint32_t>());
  for (auto& name : objects) name = r.GetString();
  const int rare = static_cast<int>(r.Get<uint32_t>());
  std::vector<HoiClass> classes(r.Get<uint32_t>());
  for (auto& c : classes) {
    c.object = static_cast<int>(r.Get<uint32_t>());
    c.action = static_cast<int>(r.Get<uint32_t>());
  }

  PriorBundle bundle;
  bundle.space = HoiSpace(std::move(actions), std::move(objects),
                          std::move(classes), rare);
  const int n = bundle.space.num_actions();
  const uint32_t scopes = r.Get<uint32_t>();
  if (scopes != static_cast<uint32_t>(bundle.space.num_objects()) + 1) {
    r.Fail("scope count does not match the object vocabulary");
  }
  ReadScope(r, n, bundle.stats.global, bundle.global);
  if (!bundle.global.scope.is_global()) r.Fail("first scope must be global");
  bundle.stats.per_object.resize(bundle.space.num_objects());
  bundle.per_object.resize(bundle.space.num_objects());
  for (int o = 0; o < bundle.space.num_objects(); ++o) {
    ReadScope(r, n, bundle.stats.per_object[o], bundle.per_object[o]);
    if (bundle.per_object[o].scope != PriorScope::Object(o)) {
      r.Fail("object scopes out of order");
    }
  }
  if (!r.AtEnd()) r.Fail("trailing bytes");
  return bundle;
}

void SavePriorBundle(const PriorBundle& bundle, const std::string& path) {
  WriteStringToFile(path, SerializePriorBundle(bundle));
}

PriorBundle LoadPriorBundle(const std::string& path) {
  return DeserializePriorBundle(ReadFileToString(path));
}

}  // namespace acp
