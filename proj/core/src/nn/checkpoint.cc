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

#include "acp/nn/checkpoint.h"

#include "acp/errors.h"
#include "acp/hoi_space.h"
#include "binary_io.h"

namespace acp::nn {
namespace {

constexpr char kMagic[] = "ACPCKPT1";

}  // namespace

std::string SerializeCheckpoint(const ParamStore& store) {
  internal::ByteWriter w;
  w.PutBytes(std::string(kMagic, 8));
  w.Put<uint64_t>(store.seed());
  w.Put<uint32_t>(static_cast<uint32_t>(store.params().size()));
  for (const Param& p : store.params()) {
    w.PutString(p.name);
    w.Put<uint64_t>(p.value.rows());
    w.Put<uint64_t>(p.value.cols());
    for (double v : p.value.data()) w.Put<double>(v);
  }
  return w.Take();
}

ParamStore DeserializeCheckpoint(const std::string& bytes) {
  internal::ByteReader r(bytes, "checkpoint");
  if (r.GetBytes(8) != std::string(kMagic, 8)) r.Fail("bad magic");
  ParamStore store(r.Get<uint64_t>());
  const uint32_t count = r.Get<uint32_t>();
  for (uint32_t k = 0; k < count; ++k) {
    std::string name = r.GetString();
    const auto rows = r.Get<uint64_t>();
    const auto cols = r.Get<uint64_t>();
    Matrix m(rows, cols);
    for (double& v : m.data()) v = r.Get<double>();
    store.Add(name, std::move(m));
  }
  if (!r.AtEnd()) r.Fail("trailing bytes");
  return store;
}

void SaveCheckpoint(const ParamStore& store, const std::string& path) {
  WriteStringToFile(path, SerializeCheckpoint(store));
}

ParamStore LoadCheckpoint(const std::string& path) {
  return DeserializeCheckpoint(ReadFileToString(path));
}

void CopyValues(const ParamStore& source, ParamStore& target) {
  for (Param& p : target.params()) {
    if (!source.Contains(p.name)) {
      throw ContractError("checkpoint lacks parameter '" + p.name + "'");
    }
    const Matrix& v = source.value(p.name);
    if (!v.SameShape(p.value)) {
      throw ContractError("checkpoint shape mismatch for '" + p.name + "'");
    }
    p.value = v;
  }
}

}  // namespace acp::nn
