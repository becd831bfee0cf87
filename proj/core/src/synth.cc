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

#include "acp/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "acp/errors.h"
#include "json_util.h"

namespace acp {
namespace {

using Rng = std::mt19937_64;

// Per-object generative parameters.
struct ObjectModel {
  std::vector<int> heads;           // valid heads
  std::vector<double> head_weight;  // aligned with heads, sums to 1
  std::vector<double> q_train;      // per action; satellites and free
  std::vector<double> q_test;
  bool free_valid = false;
  double headless = 0.0;
};

struct Planted {
  int n_heads = 0;
  int free_action = 0;
  std::vector<int> parent;  // per action, -1 for heads and free
  std::vector<ObjectModel> objects;
};

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool Coin(Rng& rng, double p) { return Uniform(rng, 0.0, 1.0) < p; }

std::vector<double> Gaussian(Rng& rng, int dim, double scale) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = scale * n(rng);
  return v;
}

// Joint inclusion probabilities P(i in L), P(i, j in L) for one object.
void Moments(const Planted& p, const ObjectModel& om, int n,
             std::vector<double>& single, std::vector<double>& pair) {
  single.assign(n, 0.0);
  pair.assign(static_cast<std::size_t>(n) * n, 0.0);
  const double labeled = 1.0 - om.headless;
  for (std::size_t k = 0; k < om.heads.size(); ++k) {
    const int h = om.heads[k];
    std::vector<double> inc(n, 0.0);
    inc[h] = 1.0;
    for (int a = 0; a < n; ++a) {
      if (p.parent[a] == h) inc[a] = om.q_train[a];
    }
    const double w = labeled * om.head_weight[k];
    for (int i = 0; i < n; ++i) {
      single[i] += w * inc[i];
      for (int j = 0; j < n; ++j) {
        pair[static_cast<std::size_t>(i) * n + j] +=
            w * (i == j ? inc[i] : inc[i] * inc[j]);
      }
    }
  }
  const int f = p.free_action;
  single[f] += om.headless;
  pair[static_cast<std::size_t>(f) * n + f] += om.headless;
}

PriorMatrices FromMoments(const std::vector<double>& single,
                          const std::vector<double>& pair, int n,
                          PriorScope scope) {
  PriorMatrices m;
  m.scope = scope;
  m.num_actions = n;
  m.cooccurrence.assign(static_cast<std::size_t>(n) * n, 0.0);
  m.complement.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t ij = static_cast<std::size_t>(i) * n + j;
      if (single[i] > 0.0) m.cooccurrence[ij] = pair[ij] / single[i];
      if (i != j && single[i] < 1.0) {
        m.complement[ij] = (single[j] - pair[ij]) / (1.0 - single[i]);
      }
    }
  }
  return m;
}

Planted PlantStructure(const SynthConfig& cfg, Rng& rng) {
  Planted p;
  const int n = cfg.n_actions;
  p.n_heads = cfg.n_heads;
  p.free_action = n - 1;
  p.parent.assign(n, -1);
  for (int a = cfg.n_heads; a < n - 1; ++a) {
    p.parent[a] = (a - cfg.n_heads) % cfg.n_heads;
  }

  bool any_free = false;
  for (int o = 0; o < cfg.n_objects; ++o) {
    ObjectModel om;
    std::vector<int> heads(cfg.n_heads);
    std::iota(heads.begin(), heads.end(), 0);
    std::shuffle(heads.begin(), heads.end(), rng);
    const int count = std::uniform_int_distribution<int>(
        std::min(2, cfg.n_heads), cfg.n_heads)(rng);
    heads.resize(count);
    // Long-tailed weights in the shuffled order, then sorted by index.
    std::vector<std::pair<int, double>> hw;
    double total = 0.0;
    for (int k = 0; k < count; ++k) {
      const double w = 1.0 / (k + 1.0);
      hw.emplace_back(heads[k], w);
      total += w;
    }
    std::sort(hw.begin(), hw.end());
    for (auto [h, w] : hw) {
      om.heads.push_back(h);
      om.head_weight.push_back(w / total);
    }
    om.q_train.assign(n, 0.0);
    for (int a = cfg.n_heads; a < n - 1; ++a) {
      const bool parent_valid =
          std::find(om.heads.begin(), om.heads.end(), p.parent[a]) !=
          om.heads.end();
      // Drawn unconditionally so the stream does not depend on validity.
      const double q = Uniform(rng, 0.25, 0.6);
      if (parent_valid) om.q_train[a] = q;
    }
    om.free_valid = Coin(rng, 0.7);
    if (o == cfg.n_objects - 1 && !any_free) om.free_valid = true;
    if (om.free_valid) {
      any_free = true;
      om.headless = cfg.headless_rate;
    }
    om.q_test = om.q_train;
    p.objects.push_back(std::move(om));
  }
  return p;
}

HoiSpace MakeSpace(const SynthConfig& cfg, const Planted& p) {
  std::vector<std::string> actions;
  for (int a = 0; a < cfg.n_actions; ++a) {
    if (a < cfg.n_heads) {
      actions.push_back("head" + std::to_string(a));
    } else if (a == p.free_action) {
      actions.push_back("free");
    } else {
      actions.push_back("sat" + std::to_string(a - cfg.n_heads) + "_of_head" +
                        std::to_string(p.parent[a]));
    }
  }
  std::vector<std::string> objects;
  for (int o = 0; o < cfg.n_objects; ++o) {
    objects.push_back("obj" + std::to_string(o));
  }
  std::vector<HoiClass> classes;
  for (int o = 0; o < cfg.n_objects; ++o) {
    const ObjectModel& om = p.objects[o];
    for (int a = 0; a < cfg.n_actions; ++a) {
      bool valid = om.q_train[a] > 0.0;
      if (a < cfg.n_heads) {
        valid = std::find(om.heads.begin(), om.heads.end(), a) != om.heads.end();
      } else if (a == p.free_action) {
        valid = om.free_valid;
      }
      if (valid) classes.push_back({o, a});
    }
  }
  return HoiSpace(std::move(actions), std::move(objects), std::move(classes));
}

Box RandomBox(Rng& rng, double offset) {
  const double x1 = offset + Uniform(rng, 0.0, 40.0);
  const double y1 = offset + Uniform(rng, 0.0, 40.0);
  return {x1, y1, x1 + Uniform(rng, 20.0, 60.0), y1 + Uniform(rng, 20.0, 60.0)};
}

struct FeatureBank {
  // [stream][object][action] and [stream][object] mean vectors.
  std::vector<std::vector<std::vector<std::vector<double>>>> action_mean;
  std::vector<std::vector<std::vector<double>>> object_mean;
};

// Satellite k = a - n_heads is paired with k ^ 1 when that exists and hangs
// off another head. Twins look alike; only their heads tell them apart.
int Twin(const Planted& p, int action) {
  if (p.parent[action] < 0) return -1;
  const int k = action - p.n_heads;
  const int t = (k ^ 1) + p.n_heads;
  if (t >= p.free_action || p.parent[t] == p.parent[action]) return -1;
  return t;
}

FeatureBank MakeFeatureBank(const SynthConfig& cfg, const Planted& p,
                            Rng& rng) {
  FeatureBank bank;
  const double inv = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
  const double shared = std::sqrt(cfg.twin_similarity);
  const double own = std::sqrt(1.0 - cfg.twin_similarity);
  for (int s = 0; s < ModelConfig::kNumStreams; ++s) {
    std::vector<std::vector<double>> am, om;
    for (int a = 0; a < cfg.n_actions; ++a) {
      const double signal =
          a < cfg.n_heads ? cfg.head_signal : cfg.satellite_signal;
      am.push_back(Gaussian(rng, cfg.feature_dim, 2.0 * signal * inv));
    }
    for (int a = 0; a < cfg.n_actions; ++a) {
      const int t = Twin(p, a);
      if (t < a) continue;
      std::vector<double> base =
          Gaussian(rng, cfg.feature_dim, 2.0 * cfg.satellite_signal * inv);
      for (int d = 0; d < cfg.feature_dim; ++d) {
        am[a][d] = shared * base[d] + own * am[a][d];
        am[t][d] = shared * base[d] + own * am[t][d];
      }
    }
    for (int o = 0; o < cfg.n_objects; ++o) {
      om.push_back(Gaussian(rng, cfg.feature_dim, 2.0 * cfg.object_signal * inv));
    }
    // Part of each interaction's look depends on the object it is done to.
    const double own_obj = std::sqrt(cfg.interaction_specificity);
    const double common = std::sqrt(1.0 - cfg.interaction_specificity);
    std::vector<std::vector<std::vector<double>>> cm(cfg.n_objects);
    for (int o = 0; o < cfg.n_objects; ++o) {
      for (int a = 0; a < cfg.n_actions; ++a) {
        const double signal =
            a < cfg.n_heads ? cfg.head_signal : cfg.satellite_signal;
        std::vector<double> v =
            Gaussian(rng, cfg.feature_dim, 2.0 * signal * inv);
        for (int d = 0; d < cfg.feature_dim; ++d) {
          v[d] = own_obj * v[d] + common * am[a][d];
        }
        cm[o].push_back(std::move(v));
      }
    }
    bank.action_mean.push_back(std::move(cm));
    bank.object_mean.push_back(std::move(om));
  }
  return bank;
}

PairExample MakePair(const SynthConfig& cfg, const FeatureBank& bank,
                     const EmbeddingTable& table, const std::string& image_id,
                     int object, const std::vector<int>& actions,
                     bool labeled, Rng& rng) {
  PairExample pair;
  pair.image_id = image_id;
  pair.object = object;
  pair.gt_actions = actions;
  const double noise =
      cfg.feature_noise / std::sqrt(static_cast<double>(cfg.feature_dim));
  std::vector<double>* streams[] = {&pair.x_h, &pair.x_o, &pair.k, &pair.b};
  for (int s = 0; s < ModelConfig::kNumStreams; ++s) {
    std::vector<double> v = Gaussian(rng, cfg.feature_dim, noise);
    for (int d = 0; d < cfg.feature_dim; ++d) {
      v[d] += bank.object_mean[s][object][d];
      for (int a : actions) v[d] += bank.action_mean[s][object][a][d];
    }
    *streams[s] = std::move(v);
  }
  pair.o_embed = table.row(object);
  pair.det_h = labeled ? Uniform(rng, 0.6, 1.0) : Uniform(rng, 0.3, 0.9);
  pair.det_o = labeled ? Uniform(rng, 0.6, 1.0) : Uniform(rng, 0.3, 0.9);
  const double offset = labeled ? 0.0 : 200.0;
  pair.human_box = RandomBox(rng, offset);
  pair.object_box = RandomBox(rng, offset);
  return pair;
}

std::vector<int> SampleLabels(const Planted& p, const ObjectModel& om,
                              const std::vector<double>& q, Rng& rng) {
  // Draw every coin so the stream length is fixed per pair.
  const bool headless = Coin(rng, om.headless);
  const double pick = Uniform(rng, 0.0, 1.0);
  std::vector<bool> coins(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) coins[a] = Coin(rng, q[a]);
  if (headless) return {p.free_action};
  std::size_t k = 0;
  double acc = om.head_weight[0];
  while (pick >= acc && k + 1 < om.heads.size()) acc += om.head_weight[++k];
  const int h = om.heads[k];
  std::vector<int> labels{h};
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (!coins[a]) continue;
    if (p.parent[a] == h) labels.push_back(static_cast<int>(a));
  }
  std::sort(labels.begin(), labels.end());
  return labels;
}

}  // namespace

void SynthConfig::Validate() const {
  if (n_heads < 2) throw ConfigError("synth needs at least 2 heads");
  if (n_actions < n_heads + 2) {
    throw ConfigError("synth needs n_actions >= n_heads + 2");
  }
  if (n_objects < 1) throw ConfigError("synth needs at least one object");
  if (n_train_images < 1 || n_test_images < 1) {
    throw ConfigError("synth needs positive image counts");
  }
  if (feature_dim < 1 || embed_dim < 1) {
    throw ConfigError("synth dimensions must be positive");
  }
  for (double p :
       {rare_fraction, background_rate, headless_rate, twin_similarity,
        interaction_specificity}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError("synth rates must lie in [0, 1]");
    }
  }
  if (rare_max_count < 0) throw ConfigError("rare_max_count must be >= 0");
  if (!(feature_noise >= 0.0)) throw ConfigError("feature_noise must be >= 0");
  // Worst case: every satellite class of every object is rare.
  const int64_t max_rare = static_cast<int64_t>(
      std::ceil(rare_fraction * (n_actions - n_heads - 1) * n_objects));
  if (max_rare * rare_max_count > n_train_images) {
    throw ConfigError("rare classes need more positives than the image budget");
  }
}

SynthDataset SynthGenerate(const SynthConfig& cfg) {
  cfg.Validate();
  Rng rng(cfg.seed);
  Planted planted = PlantStructure(cfg, rng);
  SynthDataset data;
  data.space = MakeSpace(cfg, planted);
  const HoiSpace& space = data.space;
  const int n = cfg.n_actions;

  // Rare classes: every class of a seeded fraction of the satellite
  // actions (twinned ones first), with the training rate lowered to about
  // half the cap in expectation.
  std::vector<int> twinned, single;
  for (int a = cfg.n_heads; a < planted.free_action; ++a) {
    (Twin(planted, a) >= 0 ? twinned : single).push_back(a);
  }
  std::shuffle(twinned.begin(), twinned.end(), rng);
  std::shuffle(single.begin(), single.end(), rng);
  std::vector<int> rare_actions = twinned;
  rare_actions.insert(rare_actions.end(), single.begin(), single.end());
  const auto n_rare = static_cast<std::size_t>(
      std::llround(cfg.rare_fraction * rare_actions.size()));
  rare_actions.resize(std::min(n_rare, rare_actions.size()));
  for (int m = 0; m < space.num_classes(); ++m) {
    const HoiClass& c = space.hoi_class(m);
    if (std::find(rare_actions.begin(), rare_actions.end(), c.action) !=
        rare_actions.end()) {
      data.rare_classes.push_back(m);
    }
  }
  const double per_object =
      static_cast<double>(cfg.n_train_images) / cfg.n_objects;
  for (int m : data.rare_classes) {
    const HoiClass& c = space.hoi_class(m);
    ObjectModel& om = planted.objects[c.object];
    const int h = planted.parent[c.action];
    const auto it = std::find(om.heads.begin(), om.heads.end(), h);
    const double w = om.head_weight[it - om.heads.begin()];
    const double context = per_object * (1.0 - om.headless) * w;
    om.q_train[c.action] =
        std::min(om.q_train[c.action], 0.5 * cfg.rare_max_count / context);
  }

  // Planted matrices.
  std::vector<double> g_single(n, 0.0);
  std::vector<double> g_pair(static_cast<std::size_t>(n) * n, 0.0);
  for (int o = 0; o < cfg.n_objects; ++o) {
    std::vector<double> single, pair;
    Moments(planted, planted.objects[o], n, single, pair);
    data.planted_per_object.push_back(
        FromMoments(single, pair, n, PriorScope::Object(o)));
    for (int i = 0; i < n; ++i) g_single[i] += single[i] / cfg.n_objects;
    for (std::size_t ij = 0; ij < pair.size(); ++ij) {
      g_pair[ij] += pair[ij] / cfg.n_objects;
    }
  }
  data.planted_global = FromMoments(g_single, g_pair, n, PriorScope::Global());

  data.embeddings.num_objects = cfg.n_objects;
  data.embeddings.dim = cfg.embed_dim;
  data.embeddings.values =
      Gaussian(rng, cfg.n_objects * cfg.embed_dim,
               1.0 / std::sqrt(static_cast<double>(cfg.embed_dim)));
  const FeatureBank bank = MakeFeatureBank(cfg, planted, rng);

  std::vector<bool> is_rare(space.num_classes(), false);
  for (int m : data.rare_classes) is_rare[m] = true;
  std::vector<int> rare_seen(space.num_classes(), 0);
  std::vector<std::size_t> labeled_at;  // train record -> its labeled pair

  auto generate = [&](int count, const std::string& prefix, bool train,
                      std::vector<AnnotationRecord>& records,
                      std::vector<PairExample>& pairs) {
    char id[32];
    for (int i = 0; i < count; ++i) {
      std::snprintf(id, sizeof(id), "%s_%05d", prefix.c_str(), i);
      const int object =
          std::uniform_int_distribution<int>(0, cfg.n_objects - 1)(rng);
      const ObjectModel& om = planted.objects[object];
      std::vector<int> labels =
          SampleLabels(planted, om, train ? om.q_train : om.q_test, rng);
      if (train) {
        // Enforce the cap on rare positives by dropping the satellite.
        std::erase_if(labels, [&](int a) {
          auto m = space.ClassIndex(object, a);
          if (!m || !is_rare[*m]) return false;
          if (rare_seen[*m] >= cfg.rare_max_count) return true;
          ++rare_seen[*m];
          return false;
        });
      }
      PairExample labeled =
          MakePair(cfg, bank, data.embeddings, id, object, labels, true, rng);
      AnnotationRecord rec;
      rec.image_id = id;
      rec.instances.push_back(
          {labeled.human_box, labeled.object_box, object, labels});
      records.push_back(std::move(rec));
      if (train) labeled_at.push_back(pairs.size());
      pairs.push_back(std::move(labeled));
      const bool background = Coin(rng, cfg.background_rate);
      const int bg_object =
          std::uniform_int_distribution<int>(0, cfg.n_objects - 1)(rng);
      if (background) {
        pairs.push_back(MakePair(cfg, bank, data.embeddings, id, bg_object, {},
                                 false, rng));
      }
    }
  };
  generate(cfg.n_train_images, "train", true, data.train, data.train_pairs);
  // Every rare class keeps at least one training positive: the first
  // image with its object and parent head gets the satellite added.
  for (int m : data.rare_classes) {
    if (rare_seen[m] > 0 || cfg.rare_max_count == 0) continue;
    const HoiClass& c = space.hoi_class(m);
    const int h = planted.parent[c.action];
    for (std::size_t r = 0; r < data.train.size(); ++r) {
      Instance& inst = data.train[r].instances.front();
      if (inst.object != c.object ||
          std::find(inst.actions.begin(), inst.actions.end(), h) ==
              inst.actions.end()) {
        continue;
      }
      inst.actions.insert(
          std::upper_bound(inst.actions.begin(), inst.actions.end(), c.action),
          c.action);
      PairExample& pair = data.train_pairs[labeled_at[r]];
      pair = MakePair(cfg, bank, data.embeddings, pair.image_id, c.object,
                      inst.actions, true, rng);
      inst.human_box = pair.human_box;
      inst.object_box = pair.object_box;
      ++rare_seen[m];
      break;
    }
  }
  generate(cfg.n_test_images, "test", false, data.test, data.test_pairs);
  return data;
}

void WriteSynthDataset(const SynthDataset& data, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  const fs::path root(dir);
  SaveHoiSpace(data.space, (root / "space.json").string());
  SaveAnnotations(data.train, data.space, (root / "train.json").string());
  SaveAnnotations(data.test, data.space, (root / "test.json").string());
  SavePairs(data.train_pairs, data.space, (root / "train_pairs.jsonl").string());
  SavePairs(data.test_pairs, data.space, (root / "test_pairs.jsonl").string());
  SaveEmbeddingTable(data.embeddings, (root / "embeddings.txt").string());

  using internal::Json;
  auto matrices = [](const PriorMatrices& m) {
    return Json{{"C", m.cooccurrence}, {"C_comp", m.complement}};
  };
  Json per_object = Json::object();
  for (const PriorMatrices& m : data.planted_per_object) {
    per_object[data.space.object_name(m.scope.object())] = matrices(m);
  }
  Json planted = {{"num_actions", data.planted_global.num_actions},
                  {"global", matrices(data.planted_global)},
                  {"per_object", per_object},
                  {"rare_classes", data.rare_classes}};
  WriteStringToFile((root / "planted_priors.json").string(), planted.dump());
}

}  // namespace acp
