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

#ifndef ACP_CONFIG_H_
#define ACP_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "acp/synth.h"
#include "acp/trainer.h"

namespace acp {

struct ZeroShotConfig {
  uint64_t seed = 7;
  int k = 3;
};

enum class DataSource { kSynth, kFiles };

struct ExperimentConfig {
  TrainSettings train;
  std::vector<uint64_t> seeds{1};

  DataSource source = DataSource::kSynth;
  // The synthetic dataset of run seed s is generated with synth.seed + s.
  SynthConfig synth;
  // File sources; absolute after loading.
  std::string space_path;
  std::string train_annotations;
  std::string test_annotations;
  std::string train_pairs;
  std::string test_pairs;
  std::string embeddings;
  std::string partition_path;

  std::optional<ZeroShotConfig> zero_shot;
  std::vector<std::string> recipes{"modified", "acp"};
  std::vector<int> k_sweep{5, 10, 15, 20};
  std::string k_sweep_recipe = "acp";
  std::string output_dir = "acp_out";
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys, malformed
// values and repeated keys throw ConfigError naming the line. Relative
// paths are resolved against `base_dir`.
ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       const std::string& base_dir);
// Also checks that every referenced input file exists.
ExperimentConfig LoadExperimentConfig(const std::string& path);
void CheckInputsExist(const ExperimentConfig& config);

// One line per accepted key with its default, for --help output.
std::string ConfigKeyHelp();

}  // namespace acp

#endif  // ACP_CONFIG_H_
