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

#include "acp/nn/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace acp::nn {

GradCheckResult FiniteDiffCheck(
    const std::function<double(const ParamStore&)>& loss, ParamStore& store,
    const GradCheckOptions& options) {
  // (param index, coordinate) pairs to probe.
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (std::size_t p = 0; p < store.params().size(); ++p) {
    for (std::size_t i = 0; i < store.params()[p].value.size(); ++i) {
      coords.emplace_back(p, i);
    }
  }
  if (coords.size() > options.max_coords) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coords);
    std::sort(coords.begin(), coords.end());
  }

  GradCheckResult result;
  for (auto [p, i] : coords) {
    Param& param = store.params()[p];
    double& w = param.value.data()[i];
    const double saved = w;
    w = saved + options.step;
    const double up = loss(store);
    w = saved - options.step;
    const double down = loss(store);
    w = saved;
    const double numeric = (up - down) / (2.0 * options.step);
    const double analytic = param.grad.data()[i];
    const double denom = std::max(
        {std::abs(analytic), std::abs(numeric), options.abs_floor});
    const double err = std::abs(analytic - numeric) / denom;
    ++result.coords_checked;
    if (err > result.max_rel_error || std::isnan(err)) {
      result.max_rel_error = std::isnan(err) ? INFINITY : err;
      result.worst_param = param.name;
      result.worst_index = i;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace acp::nn
