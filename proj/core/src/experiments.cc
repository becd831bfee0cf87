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

#include "acp/experiments.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "acp/errors.h"
#include "acp/pair_io.h"
#include "acp/synth.h"

namespace acp {
namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct RecipeSpec {
  const char* name;
  Variant variant;
  bool distill;
  bool post;
  bool attention;
  bool emb;
};

constexpr RecipeSpec kRecipes[] = {
    {"baseline", Variant::kBaseline, false, false, false, false},
    {"modified", Variant::kModified, false, false, false, false},
    {"multitask", Variant::kMultiTask, false, false, false, false},
    {"twostream", Variant::kTwoStream, false, false, false, false},
    {"hierarchical", Variant::kHierarchical, false, false, false, false},
    {"modified_post", Variant::kModified, false, true, false, false},
    {"distill", Variant::kModified, true, false, false, false},
    {"distill_post", Variant::kModified, true, true, false, false},
    {"hier_distill", Variant::kHierarchical, true, false, false, false},
    {"acp", Variant::kHierarchical, true, true, false, false},
    {"acp_sa", Variant::kHierarchical, true, true, true, false},
    {"acp_emb", Variant::kHierarchical, true, true, false, true},
    {"acp_pp", Variant::kHierarchical, true, true, true, true},
};

std::string Real(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Mean and sample standard deviation over the finite entries.
std::pair<double, double> MeanSd(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.empty()) return {kNaN, kNaN};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (v.size() - 1))};
}

struct Job {
  std::size_t seed_index = 0;
  TrainSettings settings;
  std::vector<std::string> recipes;  // share this trained model
  std::vector<bool> post;
};

}  // namespace

const std::vector<std::string>& KnownRecipes() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const RecipeSpec& r : kRecipes) n.push_back(r.name);
    return n;
  }();
  return names;
}

TrainSettings ApplyRecipe(std::string_view recipe, TrainSettings base) {
  for (const RecipeSpec& r : kRecipes) {
    if (recipe != r.name) continue;
    base.model.variant = r.variant;
    base.model.attention = r.attention;
    base.model.emb_head = r.emb;
    base.post_process = r.post;
    if (!r.distill) {
      base.weights.lambda2 = 0.0;
      base.weights.lambda3 = 0.0;
    }
    if (!r.emb) base.weights.lambda0 = 0.0;
    return base;
  }
  throw ConfigError("unknown recipe '" + std::string(recipe) + "'");
}

std::string TrainingSignature(const TrainSettings& s) {
  std::ostringstream out;
  out.precision(17);
  const ModelConfig& m = s.model;
  out << VariantName(m.variant) << "|att" << m.attention << "|emb"
      << m.emb_head << "|mask" << m.mask_groups << "|h" << m.dims.hidden
      << "|p" << m.dims.attn_proj << "|l" << s.weights.lambda0 << ','
      << s.weights.lambda1 << ',' << s.weights.lambda2 << ','
      << s.weights.lambda3 << "|ce" << s.anchor_ce_weight << "|proj"
      << s.projection.alpha << ',' << s.projection.beta << ','
      << s.projection.use_per_object << "|opt"
      << static_cast<int>(s.optimizer) << ',' << s.lr << ',' << s.epochs << ','
      << s.batch_images << "|k" << s.max_anchors.value_or(0) << "|part"
      << s.partition.has_value();
  return out.str();
}

Dataset LoadDataset(const ExperimentConfig& config, uint64_t seed) {
  Dataset d;
  if (config.source == DataSource::kSynth) {
    SynthConfig sc = config.synth;
    sc.seed = config.synth.seed + seed;
    SynthDataset s = SynthGenerate(sc);
    d.space = std::move(s.space);
    d.train = std::move(s.train);
    d.test = std::move(s.test);
    d.train_pairs = std::move(s.train_pairs);
    d.test_pairs = std::move(s.test_pairs);
  } else {
    d.space = config.space_path.empty()
                  ? InferHoiSpace(ReadFileToString(config.train_annotations))
                  : LoadHoiSpace(config.space_path);
    d.train = LoadAnnotations(config.train_annotations, d.space);
    d.test = LoadAnnotations(config.test_annotations, d.space);
    d.train_pairs = LoadPairs(config.train_pairs, d.space);
    d.test_pairs = LoadPairs(config.test_pairs, d.space);
  }
  if (!config.embeddings.empty()) {
    const EmbeddingTable table = LoadEmbeddingTable(config.embeddings);
    if (table.num_objects != d.space.num_objects()) {
      throw ConfigError("embedding table rows do not match the object count");
    }
    AttachEmbeddings(table, d.train_pairs);
    AttachEmbeddings(table, d.test_pairs);
  }
  return d;
}

Dataset DropClasses(const Dataset& data, std::span<const int> classes) {
  Dataset out = data;
  const std::set<int> drop(classes.begin(), classes.end());
  auto dropped = [&](int object, int action) {
    auto m = data.space.ClassIndex(object, action);
    return m && drop.contains(*m);
  };
  for (AnnotationRecord& rec : out.train) {
    for (Instance& inst : rec.instances) {
      std::erase_if(inst.actions,
                    [&](int a) { return dropped(inst.object, a); });
    }
    std::erase_if(rec.instances,
                  [](const Instance& i) { return i.actions.empty(); });
  }
  for (PairExample& p : out.train_pairs) {
    std::erase_if(p.gt_actions, [&](int a) { return dropped(p.object, a); });
  }
  return out;
}

int ThreadBudget() {
  const char* env = std::getenv("ACP_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

std::vector<RunResult> RunRecipes(const ExperimentConfig& config,
                                  const std::vector<std::string>& recipes,
                                  bool write_outputs) {
  struct SeedData {
    Dataset data;
    Dataset train;
    std::vector<int64_t> counts;
    std::vector<int> heldout;
  };
  std::vector<SeedData> seeds;
  for (uint64_t seed : config.seeds) {
    SeedData sd;
    sd.data = LoadDataset(config, seed);
    sd.counts = CountClassInstances(sd.data.train, sd.data.space);
    if (config.zero_shot) {
      sd.heldout = ZeroShotSplit(sd.data.space, sd.counts,
                                 config.zero_shot->seed + seed,
                                 config.zero_shot->k);
      sd.train = DropClasses(sd.data, sd.heldout);
    } else {
      sd.train = sd.data;
    }
    seeds.push_back(std::move(sd));
  }

  std::vector<Job> jobs;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    std::map<std::string, std::size_t> by_signature;
    for (const std::string& recipe : recipes) {
      TrainSettings s = ApplyRecipe(recipe, config.train);
      if (config.zero_shot) s.projection.use_per_object = false;
      if (!config.partition_path.empty() && NeedsPartition(s.model.variant)) {
        s.partition = LoadPartition(config.partition_path, seeds[si].data.space);
      }
      const bool post = s.post_process;
      s.post_process = false;
      const std::string sig = TrainingSignature(s);
      auto [it, fresh] = by_signature.try_emplace(sig, jobs.size());
      if (fresh) jobs.push_back({si, std::move(s), {}, {}});
      jobs[it->second].recipes.push_back(recipe);
      jobs[it->second].post.push_back(post);
    }
  }

  if (write_outputs) fs::create_directories(config.output_dir);
  std::vector<std::vector<RunResult>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    const SeedData& sd = seeds[job.seed_index];
    const uint64_t seed = config.seeds[job.seed_index];
    Trainer trainer(job.settings, sd.train, seed);
    RunOutputs outputs;
    outputs.label = job.recipes.front();
    if (write_outputs) {
      const fs::path dir(config.output_dir);
      outputs.metrics_csv =
          (dir / (".metrics_" + std::to_string(j) + ".csv")).string();
      fs::remove(outputs.metrics_csv);
      outputs.checkpoint = (dir / (job.recipes.front() + "_seed" +
                                   std::to_string(seed) + ".ckpt"))
                               .string();
    }
    const auto rows = RunTraining(trainer, sd.data, sd.counts, sd.heldout,
                                  outputs);
    const auto& partition = trainer.model().partition();
    for (std::size_t r = 0; r < job.recipes.size(); ++r) {
      RunResult res;
      res.recipe = job.recipes[r];
      res.seed = seed;
      res.max_anchors = job.settings.max_anchors.value_or(0);
      res.num_anchors = partition ? partition->num_anchors() : 0;
      res.eval = job.post[r] ? trainer.Evaluate(sd.data, sd.counts, true)
                             : *rows.back().eval;
      res.heldout = sd.heldout;
      res.map_heldout =
          sd.heldout.empty() ? kNaN : MeanAp(res.eval.report, sd.heldout);
      res.final_loss = rows.back().train_loss;
      results[j].push_back(std::move(res));
    }
  };

  const int threads = std::min<int>(ThreadBudget(), static_cast<int>(jobs.size()));
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
          try {
            run_job(j);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  if (write_outputs) {
    std::string merged = std::string(kMetricsHeader) + "\n";
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      const fs::path part =
          fs::path(config.output_dir) / (".metrics_" + std::to_string(j) + ".csv");
      std::istringstream in(ReadFileToString(part.string()));
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) merged += line + "\n";
      fs::remove(part);
    }
    WriteStringToFile((fs::path(config.output_dir) / "metrics.csv").string(),
                      merged);
  }

  // Order: recipe-major within each seed, matching the request order.
  std::vector<RunResult> out;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    for (const std::string& recipe : recipes) {
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (jobs[j].seed_index != si) continue;
        for (const RunResult& r : results[j]) {
          if (r.recipe == recipe) out.push_back(r);
        }
      }
    }
  }
  return out;
}

std::vector<RunResult> RunKSweep(const ExperimentConfig& config,
                                 bool write_outputs) {
  std::vector<RunResult> out;
  for (int k : config.k_sweep) {
    if (k <= 0) throw ConfigError("k_sweep entries must be positive");
    ExperimentConfig c = config;
    c.train.max_anchors = k;
    c.output_dir =
        (fs::path(config.output_dir) / ("k" + std::to_string(k))).string();
    for (RunResult& r : RunRecipes(c, {config.k_sweep_recipe}, write_outputs)) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string AblationTableCsv(const std::vector<RunResult>& runs,
                             const std::vector<std::string>& recipes) {
  std::string out =
      "recipe,seeds,map_full_mean,map_full_sd,map_rare_mean,map_rare_sd,"
      "map_nonrare_mean,map_nonrare_sd,map_known_full_mean,"
      "map_known_full_sd,map_heldout_mean,map_heldout_sd\n";
  for (const std::string& recipe : recipes) {
    std::vector<double> full, rare, nonrare, known, held;
    for (const RunResult& r : runs) {
      if (r.recipe != recipe) continue;
      full.push_back(r.eval.report.map_full);
      rare.push_back(r.eval.report.map_rare);
      nonrare.push_back(r.eval.report.map_nonrare);
      known.push_back(r.eval.known_object.map_full);
      held.push_back(r.map_heldout);
    }
    out += recipe + "," + std::to_string(full.size());
    for (const auto* v : {&full, &rare, &nonrare, &known, &held}) {
      auto [mean, sd] = MeanSd(*v);
      out += "," + Real(mean) + "," + Real(sd);
    }
    out += "\n";
  }
  return out;
}

std::string RunsCsv(const std::vector<RunResult>& runs) {
  std::string out =
      "recipe,seed,map_full,map_rare,map_nonrare,map_known_full,map_heldout\n";
  for (const RunResult& r : runs) {
    out += r.recipe + "," + std::to_string(r.seed) + "," +
           Real(r.eval.report.map_full) + "," + Real(r.eval.report.map_rare) +
           "," + Real(r.eval.report.map_nonrare) + "," +
           Real(r.eval.known_object.map_full) + "," + Real(r.map_heldout) +
           "\n";
  }
  return out;
}

std::string KSweepCsv(const std::vector<RunResult>& runs,
                      const std::vector<int>& ks) {
  std::string out = "k,num_anchors,seeds,map_full,map_rare,map_nonrare\n";
  for (int k : ks) {
    std::vector<double> full, rare, nonrare, anchors;
    for (const RunResult& r : runs) {
      if (r.max_anchors != k) continue;
      full.push_back(r.eval.report.map_full);
      rare.push_back(r.eval.report.map_rare);
      nonrare.push_back(r.eval.report.map_nonrare);
      anchors.push_back(r.num_anchors);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", MeanSd(anchors).first);
    out += std::to_string(k) + "," + buf + "," + std::to_string(full.size()) +
           "," + Real(MeanSd(full).first) + "," + Real(MeanSd(rare).first) +
           "," + Real(MeanSd(nonrare).first) + "\n";
  }
  return out;
}

}  // namespace acp
