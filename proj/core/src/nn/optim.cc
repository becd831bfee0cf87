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

#include "acp/nn/optim.h"

#include <cmath>

#include "acp/errors.h"

namespace acp::nn {
namespace {

void RequireFiniteGrads(const ParamStore& store) {
  for (const Param& p : store.params()) {
    if (!p.grad.AllFinite()) {
      throw NumericError("non-finite gradient for '" + p.name + "'");
    }
  }
}

}  // namespace

void SgdStep(ParamStore& store, double lr) {
  RequireFiniteGrads(store);
  for (Param& p : store.params()) {
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
  }
  store.ZeroGrad();
}

void Adam::Step(ParamStore& store) {
  RequireFiniteGrads(store);
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (Param& p : store.params()) {
    auto [it, inserted] = moments_.try_emplace(p.name);
    if (inserted) {
      it->second.m = Matrix(p.value.rows(), p.value.cols());
      it->second.v = Matrix(p.value.rows(), p.value.cols());
    }
    auto m = it->second.m.data();
    auto v = it->second.v.data();
    auto w = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
  store.ZeroGrad();
}

Matrix Adam::BiasCorrectedFirstMoment(const std::string& name) const {
  auto it = moments_.find(name);
  if (it == moments_.end()) throw ContractError("no Adam state for " + name);
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  return it->second.m * (1.0 / c1);
}

}  // namespace acp::nn
