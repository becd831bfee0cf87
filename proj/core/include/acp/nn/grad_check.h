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

#ifndef ACP_NN_GRAD_CHECK_H_
#define ACP_NN_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>

#include "acp/nn/param_store.h"

namespace acp::nn {

struct GradCheckOptions {
  double step = 1e-5;
  // Above this many scalars a seeded random subset of this size is checked.
  std::size_t max_coords = 10000;
  uint64_t seed = 0;
  // Denominator floor: err = |a - n| / max(|a|, |n|, floor).
  double abs_floor = 1e-3;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

// Compares the analytic gradients already accumulated in `store` against
// central differences of `loss`. `loss` must read parameter values only; it
// is evaluated with each checked coordinate nudged by +/- step, and every
// value is restored bit-exactly afterwards.
GradCheckResult FiniteDiffCheck(
    const std::function<double(const ParamStore&)>& loss, ParamStore& store,
    const GradCheckOptions& options = {});

}  // namespace acp::nn

#endif  // ACP_NN_GRAD_CHECK_H_
