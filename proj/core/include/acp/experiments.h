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

#ifndef ACP_EXPERIMENTS_H_
#define ACP_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "acp/config.h"
#include "acp/evaluation.h"
#include "acp/trainer.h"

namespace acp {

// Named training/evaluation setups mirroring the ablation rows:
//   baseline, modified, multitask, twostream, hierarchical,
//   modified_post, distill, distill_post, hier_distill,
//   acp (hierarchical + distillation + post), acp_sa (+ attention),
//   acp_emb (+ embedding loss), acp_pp (+ attention + embedding loss).
// Recipes without distillation zero lambda0, lambda2, lambda3; the others
// keep the configured weights.
const std::vector<std::string>& KnownRecipes();
TrainSettings ApplyRecipe(std::string_view recipe, TrainSettings base);

// Everything that affects optimization; recipes with equal signatures
// share one trained model.
std::string TrainingSignature(const TrainSettings& settings);

// The dataset of run seed `seed`: synthetic (generator seed synth.seed +
// seed) or loaded from files. Embeddings from the table replace o_embed.
Dataset LoadDataset(const ExperimentConfig& config, uint64_t seed);

// Copy of `data` whose training split lacks every positive of `classes`.
// Instances and pairs left without actions become unlabeled.
Dataset DropClasses(const Dataset& data, std::span<const int> classes);

struct RunResult {
  std::string recipe;
  uint64_t seed = 0;
  int max_anchors = 0;  // 0 = unlimited
  int num_anchors = 0;
  EvalResult eval;
  std::vector<int> heldout;
  double map_heldout = 0.0;  // NaN without held-out classes
  double final_loss = 0.0;
};

// Parallel worker count from ACP_THREADS (default 1, at least 1).
int ThreadBudget();

// Trains every (recipe, seed) combination, sharing models across recipes
// that differ only in post-processing. With config.zero_shot, each seed
// holds out its own split and projection uses global priors. Metrics go to
// <output_dir>/metrics.csv in run order when `write_outputs` is set.
std::vector<RunResult> RunRecipes(const ExperimentConfig& config,
                                  const std::vector<std::string>& recipes,
                                  bool write_outputs = true);

// Anchor-count sweep of config.k_sweep_recipe over config.k_sweep.
std::vector<RunResult> RunKSweep(const ExperimentConfig& config,
                                 bool write_outputs = true);

// recipe,seeds,map_full_mean,map_full_sd,map_rare_mean,map_rare_sd,
// map_nonrare_mean,map_nonrare_sd,map_known_full_mean,map_known_full_sd,
// map_heldout_mean,map_heldout_sd -- one row per recipe in the given order.
std::string AblationTableCsv(const std::vector<RunResult>& runs,
                             const std::vector<std::string>& recipes);
// recipe,seed,map_full,map_rare,map_nonrare,map_known_full,map_heldout
std::string RunsCsv(const std::vector<RunResult>& runs);
// k,num_anchors,seeds,map_full,map_rare,map_nonrare (means over seeds).
std::string KSweepCsv(const std::vector<RunResult>& runs,
                      const std::vector<int>& ks);

}  // namespace acp

#endif  // ACP_EXPERIMENTS_H_
