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

#include "acp/nn/param_store.h"

#include <bit>
#include <cmath>

#include "acp/errors.h"

namespace acp::nn {

Matrix& ParamStore::AddGlorot(const std::string& name, std::size_t rows,
                              std::size_t cols) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng_);
  return Add(name, std::move(m));
}

Matrix& ParamStore::AddZeros(const std::string& name, std::size_t rows,
                             std::size_t cols) {
  return Add(name, Matrix(rows, cols));
}

Matrix& ParamStore::Add(const std::string& name, Matrix value) {
  if (index_.count(name)) {
    throw ContractError("duplicate parameter '" + name + "'");
  }
  index_.emplace(name, params_.size());
  Matrix grad(value.rows(), value.cols());
  params_.push_back({name, std::move(value), std::move(grad)});
  return params_.back().value;
}

bool ParamStore::Contains(const std::string& name) const {
  return index_.count(name) > 0;
}

Param& ParamStore::Find(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter '" + name + "'");
  return params_[it->second];
}

const Param& ParamStore::Find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter '" + name + "'");
  return params_[it->second];
}

const Matrix& ParamStore::value(const std::string& name) const {
  return Find(name).value;
}
Matrix& ParamStore::mutable_value(const std::string& name) {
  return Find(name).value;
}
const Matrix& ParamStore::grad(const std::string& name) const {
  return Find(name).grad;
}
Matrix& ParamStore::mutable_grad(const std::string& name) {
  return Find(name).grad;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

void ParamStore::ZeroGrad() {
  for (Param& p : params_) p.grad.Fill(0.0);
}

uint64_t ParamStore::Checksum() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const Param& p : params_) {
    for (char c : p.name) mix(static_cast<unsigned char>(c));
    mix(p.value.rows());
    mix(p.value.cols());
    for (double v : p.value.data()) mix(std::bit_cast<uint64_t>(v));
  }
  return h;
}

}  // namespace acp::nn
