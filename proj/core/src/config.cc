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

#include "acp/config.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "acp/errors.h"

namespace acp {
namespace {

namespace fs = std::filesystem;

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double ToReal(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("expected a real number, got '" + v + "'");
  }
  return out;
}

int64_t ToInt(const std::string& v) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + v + "'");
  }
  return out;
}

int ToInt32(const std::string& v) { return static_cast<int>(ToInt(v)); }

bool ToBool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

std::vector<std::string> ToList(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Key {
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&,
                     const std::string& base)>
      set;
};

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Key>& Keys() {
  static const std::map<std::string, Key> keys = [] {
    std::map<std::string, Key> k;
    auto plain = [&](const std::string& name, const std::string& help,
                     Setter set) {
      k[name] = {help, [set](ExperimentConfig& c, const std::string& v,
                             const std::string&) { set(c, v); }};
    };
    auto path = [&](const std::string& name, const std::string& help,
                    std::string ExperimentConfig::*member) {
      k[name] = {help, [member](ExperimentConfig& c, const std::string& v,
                                const std::string& base) {
                   fs::path p(v);
                   c.*member =
                       p.is_absolute() ? v : (fs::path(base) / p).string();
                 }};
    };
    // model
    plain("variant", "baseline|modified|multitask|twostream|hierarchical (modified)",
          [](auto& c, auto& v) { c.train.model.variant = ParseVariant(v); });
    plain("attention", "pair self-attention (false)",
          [](auto& c, auto& v) { c.train.model.attention = ToBool(v); });
    plain("emb_head", "object-embedding regression head (false)",
          [](auto& c, auto& v) { c.train.model.emb_head = ToBool(v); });
    plain("mask_groups", "zero group outputs for actions outside the group (true)",
          [](auto& c, auto& v) { c.train.model.mask_groups = ToBool(v); });
    plain("hidden", "fused feature width (64)",
          [](auto& c, auto& v) { c.train.model.dims.hidden = ToInt32(v); });
    plain("attn_proj", "self-attention projection width (32)",
          [](auto& c, auto& v) { c.train.model.dims.attn_proj = ToInt32(v); });
    // losses
    plain("alpha", "projection weight on present actions (1.2)",
          [](auto& c, auto& v) { c.train.projection.alpha = ToReal(v); });
    plain("beta", "projection weight on absent actions (0.8)",
          [](auto& c, auto& v) { c.train.projection.beta = ToReal(v); });
    plain("use_per_object", "project with per-object priors (true)",
          [](auto& c, auto& v) {
            c.train.projection.use_per_object = ToBool(v);
          });
    plain("post_process", "project predictions at evaluation (false)",
          [](auto& c, auto& v) { c.train.post_process = ToBool(v); });
    plain("lambda0", "embedding loss weight (0.1)",
          [](auto& c, auto& v) { c.train.weights.lambda0 = ToReal(v); });
    plain("lambda1", "ground-truth BCE weight (1.0)",
          [](auto& c, auto& v) { c.train.weights.lambda1 = ToReal(v); });
    plain("lambda2", "projected-prediction teacher weight (0.5)",
          [](auto& c, auto& v) { c.train.weights.lambda2 = ToReal(v); });
    plain("lambda3", "projected-ground-truth teacher weight (0.5)",
          [](auto& c, auto& v) { c.train.weights.lambda3 = ToReal(v); });
    plain("anchor_ce_weight", "anchor softmax cross-entropy weight (1.0)",
          [](auto& c, auto& v) { c.train.anchor_ce_weight = ToReal(v); });
    // optimization
    plain("optimizer", "adam|sgd (adam)", [](auto& c, auto& v) {
      if (v == "adam") {
        c.train.optimizer = OptimizerKind::kAdam;
      } else if (v == "sgd") {
        c.train.optimizer = OptimizerKind::kSgd;
      } else {
        throw ConfigError("optimizer must be adam or sgd");
      }
    });
    plain("lr", "learning rate (0.001)",
          [](auto& c, auto& v) { c.train.lr = ToReal(v); });
    plain("epochs", "training epochs (30)",
          [](auto& c, auto& v) { c.train.epochs = ToInt32(v); });
    plain("batch_images", "images per optimizer step (16)",
          [](auto& c, auto& v) { c.train.batch_images = ToInt32(v); });
    plain("eval_every", "epochs between evaluations, 0 = final only (0)",
          [](auto& c, auto& v) { c.train.eval_every = ToInt32(v); });
    plain("max_anchors", "anchor cap K, or 'unlimited' (15)",
          [](auto& c, auto& v) {
            if (v == "unlimited" || v == "none") {
              c.train.max_anchors.reset();
            } else {
              c.train.max_anchors = ToInt32(v);
            }
          });
    plain("grad_check", "finite-difference check on the first step (false)",
          [](auto& c, auto& v) { c.train.grad_check_first_step = ToBool(v); });
    plain("seeds", "comma-separated run seeds (1)", [](auto& c, auto& v) {
      c.seeds.clear();
      for (const auto& s : ToList(v)) {
        c.seeds.push_back(static_cast<uint64_t>(ToInt(s)));
      }
    });
    // data
    plain("data", "synth|files (synth)", [](auto& c, auto& v) {
      if (v == "synth") {
        c.source = DataSource::kSynth;
      } else if (v == "files") {
        c.source = DataSource::kFiles;
      } else {
        throw ConfigError("data must be synth or files");
      }
    });
    path("space", "HoiSpace JSON (files)", &ExperimentConfig::space_path);
    path("train_annotations", "training annotation JSON (files)",
         &ExperimentConfig::train_annotations);
    path("test_annotations", "test annotation JSON (files)",
         &ExperimentConfig::test_annotations);
    path("train_pairs", "training pair features, JSON lines (files)",
         &ExperimentConfig::train_pairs);
    path("test_pairs", "test pair features, JSON lines (files)",
         &ExperimentConfig::test_pairs);
    path("embeddings", "object embedding table; overrides pair o_embed",
         &ExperimentConfig::embeddings);
    path("partition", "anchor partition JSON instead of NES",
         &ExperimentConfig::partition_path);
    path("output_dir", "directory for metrics, checkpoints, reports (acp_out)",
         &ExperimentConfig::output_dir);
    // synthetic generator
    auto synth_int = [&](const std::string& name, int SynthConfig::*m,
                         const std::string& help) {
      plain("synth." + name, help,
            [m](auto& c, auto& v) { c.synth.*m = ToInt32(v); });
    };
    auto synth_real = [&](const std::string& name, double SynthConfig::*m,
                          const std::string& help) {
      plain("synth." + name, help,
            [m](auto& c, auto& v) { c.synth.*m = ToReal(v); });
    };
    synth_int("n_actions", &SynthConfig::n_actions, "actions (12)");
    synth_int("n_objects", &SynthConfig::n_objects, "objects (6)");
    synth_int("n_heads", &SynthConfig::n_heads, "exclusive head actions (4)");
    synth_int("n_train_images", &SynthConfig::n_train_images,
              "training images (3000)");
    synth_int("n_test_images", &SynthConfig::n_test_images, "test images (3000)");
    synth_int("rare_max_count", &SynthConfig::rare_max_count,
              "cap on training positives of rare classes (3)");
    synth_int("feature_dim", &SynthConfig::feature_dim, "per-stream width (16)");
    synth_int("embed_dim", &SynthConfig::embed_dim, "embedding width (8)");
    synth_real("rare_fraction", &SynthConfig::rare_fraction,
               "share of satellite actions made rare (0.3)");
    synth_real("feature_noise", &SynthConfig::feature_noise,
               "feature noise scale (2.0)");
    synth_real("head_signal", &SynthConfig::head_signal,
               "head feature strength (1.0)");
    synth_real("satellite_signal", &SynthConfig::satellite_signal,
               "satellite feature strength (0.6)");
    synth_real("object_signal", &SynthConfig::object_signal,
               "object feature strength (0.5)");
    synth_real("background_rate", &SynthConfig::background_rate,
               "chance of an unlabeled pair per image (0.5)");
    synth_real("headless_rate", &SynthConfig::headless_rate,
               "chance a pair holds only the free action (0.1)");
    synth_real("twin_similarity", &SynthConfig::twin_similarity,
               "shared share of twin satellite features (1.0)");
    synth_real("interaction_specificity",
               &SynthConfig::interaction_specificity,
               "object-specific share of action features (1.0)");
    plain("synth.seed", "base generator seed (1)", [](auto& c, auto& v) {
      c.synth.seed = static_cast<uint64_t>(ToInt(v));
    });
    // experiments
    plain("zero_shot_k", "held-out non-rare classes, 0 = off (0)",
          [](auto& c, auto& v) {
            const int k = ToInt32(v);
            if (k <= 0) {
              c.zero_shot.reset();
            } else {
              if (!c.zero_shot) c.zero_shot.emplace();
              c.zero_shot->k = k;
            }
          });
    plain("zero_shot_seed", "held-out split seed (7)", [](auto& c, auto& v) {
      if (!c.zero_shot) c.zero_shot.emplace();
      c.zero_shot->seed = static_cast<uint64_t>(ToInt(v));
    });
    plain("recipes", "comma-separated recipes for the ablation table",
          [](auto& c, auto& v) { c.recipes = ToList(v); });
    plain("k_sweep", "comma-separated anchor caps (5,10,15,20)",
          [](auto& c, auto& v) {
            c.k_sweep.clear();
            for (const auto& s : ToList(v)) c.k_sweep.push_back(ToInt32(s));
          });
    plain("k_sweep_recipe", "recipe used for the anchor sweep (acp)",
          [](auto& c, auto& v) { c.k_sweep_recipe = v; });
    return k;
  }();
  return keys;
}

}  // namespace

ExperimentConfig ParseExperimentConfig(std::string_view text,
                                       const std::string& base_dir) {
  ExperimentConfig config;
  config.train.model.dims.hidden = 64;
  config.train.model.dims.attn_proj = 32;
  config.output_dir = (fs::path(base_dir) / config.output_dir).string();
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = Trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + "expected 'key = value'");
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    const auto& keys = Keys();
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) {
      throw ConfigError(where + "key '" + key + "' given twice");
    }
    try {
      it->second.set(config, value, base_dir);
    } catch (const Error& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  if (config.seeds.empty()) throw ConfigError("seeds must not be empty");
  config.train.weights.Validate();
  config.train.projection.Validate();
  if (config.source == DataSource::kSynth) config.synth.Validate();
  return config;
}

void CheckInputsExist(const ExperimentConfig& config) {
  std::vector<std::pair<const char*, const std::string*>> inputs = {
      {"embeddings", &config.embeddings},
      {"partition", &config.partition_path}};
  if (config.source == DataSource::kFiles) {
    inputs.insert(inputs.end(),
                  {{"space", &config.space_path},
                   {"train_annotations", &config.train_annotations},
                   {"test_annotations", &config.test_annotations},
                   {"train_pairs", &config.train_pairs},
                   {"test_pairs", &config.test_pairs}});
    for (const char* required :
         {"train_annotations", "test_annotations", "train_pairs",
          "test_pairs"}) {
      for (auto& [name, value] : inputs) {
        if (std::string_view(name) == required && value->empty()) {
          throw ConfigError(std::string("data = files needs '") + required + "'");
        }
      }
    }
  }
  for (auto& [name, value] : inputs) {
    if (!value->empty() && !fs::exists(*value)) {
      throw ConfigError(std::string(name) + ": file '" + *value +
                        "' does not exist");
    }
  }
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  const std::string text = ReadFileToString(path);
  std::string base = fs::path(path).parent_path().string();
  if (base.empty()) base = ".";
  ExperimentConfig config = ParseExperimentConfig(text, base);
  CheckInputsExist(config);
  return config;
}

std::string ConfigKeyHelp() {
  std::string out;
  for (const auto& [name, key] : Keys()) {
    out += "  " + name;
    out += std::string(name.size() < 24 ? 24 - name.size() : 1, ' ');
    out += key.help + "\n";
  }
  return out;
}

}  // namespace acp
