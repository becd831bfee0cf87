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

#ifndef ACP_SYNTH_H_
#define ACP_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "acp/annotations.h"
#include "acp/hoi_space.h"
#include "acp/model.h"
#include "acp/pair_io.h"
#include "acp/priors.h"

namespace acp {

// Desk-scale long-tail benchmark. Actions come in three kinds:
//   heads       indices [0, n_heads): mutually exclusive, one per pair
//   satellites  attached to one head each; never seen without it.
//               Satellites k and k^1 sit on different heads and have
//               similar features (twin_similarity).
//   free        the last index; always alone
// Each object has its own valid heads (long-tailed weights) and
// satellite rates. Rare classes are all classes of a fraction of the
// satellite actions; their training rate is lowered and their training
// positives are capped, with at least one kept.
// Pair features are Gaussian around a sum of object and action means;
// interaction_specificity of each action mean is drawn per object, so at
// 1.0 an action done to one object says nothing about another.
struct SynthConfig {
  int n_actions = 12;
  int n_objects = 6;
  int n_heads = 4;
  int n_train_images = 3000;
  int n_test_images = 3000;
  uint64_t seed = 1;
  double rare_fraction = 0.3;
  int rare_max_count = 3;
  double feature_noise = 2.0;
  int feature_dim = 16;
  int embed_dim = 8;
  double head_signal = 1.0;
  double satellite_signal = 0.6;
  double object_signal = 0.5;
  double background_rate = 0.5;  // chance an image gets an unlabeled pair
  double headless_rate = 0.1;    // chance a pair holds only the free action
  double twin_similarity = 1.0;  // shared share of twin satellite means
  double interaction_specificity = 1.0;  // object-specific share of action means

  // Throws ConfigError for inconsistent or infeasible settings.
  void Validate() const;
};

struct SynthDataset {
  HoiSpace space;
  std::vector<AnnotationRecord> train;
  std::vector<AnnotationRecord> test;
  std::vector<PairExample> train_pairs;
  std::vector<PairExample> test_pairs;
  EmbeddingTable embeddings;
  // Exact conditional structure of the training distribution (before the
  // positive cap), for every object and for the object mixture.
  std::vector<PriorMatrices> planted_per_object;
  PriorMatrices planted_global;
  std::vector<int> rare_classes;  // planted rare classes, ascending
};

// Deterministic in `cfg` (including seed).
SynthDataset SynthGenerate(const SynthConfig& cfg);

// Writes space.json, train.json, test.json, train_pairs.jsonl,
// test_pairs.jsonl, embeddings.txt and planted_priors.json into `dir`
// (created if missing).
void WriteSynthDataset(const SynthDataset& data, const std::string& dir);

}  // namespace acp

#endif  // ACP_SYNTH_H_
