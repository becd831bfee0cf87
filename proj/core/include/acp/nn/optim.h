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

#ifndef ACP_NN_OPTIM_H_
#define ACP_NN_OPTIM_H_

#include <string>
#include <unordered_map>

#include "acp/nn/matrix.h"
#include "acp/nn/param_store.h"

namespace acp::nn {

// w -= lr * g for every parameter, then zero the gradients. Throws
// NumericError on a non-finite gradient before touching any parameter.
void SgdStep(ParamStore& store, double lr);

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // One bias-corrected Adam update followed by zeroing the gradients.
  void Step(ParamStore& store);

  int64_t step_count() const { return t_; }
  const AdamOptions& options() const { return options_; }
  // m / (1 - beta1^t) for parameter `name` after the latest step.
  Matrix BiasCorrectedFirstMoment(const std::string& name) const;

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };

  AdamOptions options_;
  int64_t t_ = 0;
  std::unordered_map<std::string, Moments> moments_;
};

}  // namespace acp::nn

#endif  // ACP_NN_OPTIM_H_
