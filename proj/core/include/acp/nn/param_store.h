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

#ifndef ACP_NN_PARAM_STORE_H_
#define ACP_NN_PARAM_STORE_H_

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "acp/nn/matrix.h"

namespace acp::nn {

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Named parameters with same-shape gradient accumulators. Parameters keep
// insertion order, and initialization draws from one seeded stream in that
// order, so a seed fully determines the initial state.
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0) : seed_(seed), rng_(seed) {}

  // uniform(-a, a) with a = sqrt(6 / (rows + cols)).
  Matrix& AddGlorot(const std::string& name, std::size_t rows,
                    std::size_t cols);
  Matrix& AddZeros(const std::string& name, std::size_t rows, std::size_t cols);
  Matrix& Add(const std::string& name, Matrix value);

  bool Contains(const std::string& name) const;
  const Matrix& value(const std::string& name) const;
  Matrix& mutable_value(const std::string& name);
  const Matrix& grad(const std::string& name) const;
  Matrix& mutable_grad(const std::string& name);

  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::size_t num_scalars() const;
  uint64_t seed() const { return seed_; }

  void ZeroGrad();
  // FNV-1a over names, shapes, and value bits.
  uint64_t Checksum() const;

 private:
  Param& Find(const std::string& name);
  const Param& Find(const std::string& name) const;

  uint64_t seed_;
  std::mt19937_64 rng_;
  std::vector<Param> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace acp::nn

#endif  // ACP_NN_PARAM_STORE_H_
