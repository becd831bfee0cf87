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

#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acp/anchors.h"
#include "acp/annotations.h"
#include "acp/config.h"
#include "acp/errors.h"
#include "acp/evaluation.h"
#include "acp/experiments.h"
#include "acp/losses.h"
#include "acp/prior_io.h"
#include "acp/synth.h"
#include "acp/trainer.h"

namespace acp::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

HoiSpace SpaceFor(const std::string& space_path,
                  const std::string& annotations_path) {
  if (!space_path.empty()) return LoadHoiSpace(space_path);
  return InferHoiSpace(ReadFileToString(annotations_path));
}

struct BuildPriorsArgs {
  std::string annotations;
  std::string space;
  std::string out;
};

void BuildPriorsCmd(const BuildPriorsArgs& a, std::ostream& out) {
  const HoiSpace space = SpaceFor(a.space, a.annotations);
  const auto records = LoadAnnotations(a.annotations, space);
  const PriorBundle bundle = MakePriorBundle(space, records);
  SavePriorBundle(bundle, a.out);
  out << "wrote " << a.out << ": " << space.num_actions() << " actions, "
      << space.num_objects() << " objects, " << bundle.stats.global.n_images
      << " images\n";
}

struct SelectAnchorsArgs {
  std::string priors;
  std::string max_anchors = "15";
  std::string scope = "global";
  std::string out;
};

void SelectAnchorsCmd(const SelectAnchorsArgs& a, std::ostream& out,
                      std::ostream& err) {
  std::optional<int> k;
  if (a.max_anchors != "unlimited") {
    try {
      k = std::stoi(a.max_anchors);
    } catch (const std::exception&) {
      throw UsageError("--max-anchors takes a positive integer or 'unlimited'");
    }
    if (*k <= 0) throw UsageError("--max-anchors must be positive");
  }
  const PriorBundle bundle = LoadPriorBundle(a.priors);
  const PriorScope scope =
      a.scope == "global"
          ? PriorScope::Global()
          : PriorScope::Object(bundle.space.ObjectIndex(a.scope));
  const PriorMatrices& priors = bundle.ForScope(scope);
  AnchorPartition p = SelectAnchors(priors, Exclusiveness(priors), k);
  p = BuildGroups(priors, std::move(p), CountsFor(bundle.stats, scope));
  const auto problems = ValidatePartition(p, priors);
  for (const auto& msg : problems) err << "error: " << msg << "\n";
  if (!problems.empty()) throw ContractError("partition failed validation");
  if (!p.uncovered.empty()) {
    err << "warning: only reachable through 'other':";
    for (int j : p.uncovered) err << " " << bundle.space.action_name(j);
    err << "\n";
  }
  SavePartition(p, bundle.space, a.out);
  out << "wrote " << a.out << ": " << p.num_anchors() << " anchors:";
  for (int i : p.anchors) out << " " << bundle.space.action_name(i);
  out << "\n";
}

struct SynthArgs {
  std::string out_dir;
  SynthConfig cfg;
};

void SynthCmd(const SynthArgs& a, std::ostream& out) {
  const SynthDataset data = SynthGenerate(a.cfg);
  WriteSynthDataset(data, a.out_dir);
  out << "wrote " << a.out_dir << ": " << data.space.num_classes()
      << " classes (" << data.rare_classes.size() << " rare), "
      << data.train_pairs.size() << " train pairs, " << data.test_pairs.size()
      << " test pairs\n";
}

struct TrainArgs {
  std::string config;
  std::vector<uint64_t> seeds;
};

void TrainCmd(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = LoadExperimentConfig(a.config);
  if (!a.seeds.empty()) cfg.seeds = a.seeds;
  fs::create_directories(cfg.output_dir);
  const std::string metrics = (fs::path(cfg.output_dir) / "metrics.csv").string();
  fs::remove(metrics);
  for (uint64_t seed : cfg.seeds) {
    Dataset data = LoadDataset(cfg, seed);
    const auto counts = CountClassInstances(data.train, data.space);
    std::vector<int> heldout;
    Dataset train = data;
    if (cfg.zero_shot) {
      heldout = ZeroShotSplit(data.space, counts, cfg.zero_shot->seed + seed,
                              cfg.zero_shot->k);
      train = DropClasses(data, heldout);
      cfg.train.projection.use_per_object = false;
    }
    TrainSettings settings = cfg.train;
    if (!cfg.partition_path.empty() && NeedsPartition(settings.model.variant)) {
      settings.partition = LoadPartition(cfg.partition_path, data.space);
    }
    Trainer trainer(settings, train, seed);
    for (const auto& w : trainer.warnings()) err << "warning: " << w << "\n";
    RunOutputs outputs;
    outputs.metrics_csv = metrics;
    outputs.label = std::string(VariantName(settings.model.variant));
    outputs.checkpoint = (fs::path(cfg.output_dir) /
                          ("model_seed" + std::to_string(seed) + ".ckpt"))
                             .string();
    const auto rows = RunTraining(trainer, data, counts, heldout, outputs);
    const EvalReport& r = rows.back().eval->report;
    out << "seed " << seed << ": loss " << rows.back().train_loss
        << ", mAP full " << r.map_full << ", rare " << r.map_rare
        << ", non-rare " << r.map_nonrare;
    if (trainer.first_step_grad_error()) {
      out << ", first-step grad check " << *trainer.first_step_grad_error();
    }
    out << "\n";
  }
  out << "metrics: " << metrics << "\n";
}

struct EvalArgs {
  std::string gt;
  std::string dets;
  std::string mode = "default";
  std::string space;
  std::string train;
  std::string out;
  std::string summary_csv;
};

void EvalCmd(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const EvalSetting setting = [&] {
    try {
      return ParseEvalSetting(a.mode);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }();
  const HoiSpace space = SpaceFor(a.space, a.gt);
  if (a.space.empty()) {
    err << "warning: no --space given; class indices follow first appearance"
           " in the ground truth\n";
  }
  const auto gt = LoadAnnotations(a.gt, space);
  const auto dets = LoadDetections(a.dets);
  std::vector<int64_t> counts;
  if (!a.train.empty()) {
    counts = CountClassInstances(LoadAnnotations(a.train, space), space);
  } else {
    // Without training counts every class lands in the non-rare split.
    counts.assign(space.num_classes(), space.rare_threshold());
  }
  const EvalReport report = Evaluate(dets, gt, space, setting, counts);
  const std::string json = ReportToJson(report, space);
  if (a.out.empty()) {
    out << json;
  } else {
    WriteStringToFile(a.out, json);
    out << "wrote " << a.out << "\n";
  }
  if (!a.summary_csv.empty()) {
    WriteStringToFile(a.summary_csv, ReportSummaryCsv(report));
  }
}

struct ProjectArgs {
  std::string priors;
  std::string scores;
  double alpha = 1.2;
  double beta = 0.8;
  bool global = false;
  std::string out;
};

// Rows "image_id,object,det_h,det_o,p_1..p_N"; an optional header line
// starting with "image_id" is skipped.
void ProjectCmd(const ProjectArgs& a, std::ostream& out) {
  ProjectionConfig cfg{a.alpha, a.beta, !a.global};
  try {
    cfg.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const PriorBundle bundle = LoadPriorBundle(a.priors);
  const HoiSpace& space = bundle.space;
  const PriorSource source(bundle.stats, cfg.use_per_object);
  std::istringstream in(ReadFileToString(a.scores));
  std::vector<ProjectionRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (line_no == 1 && line.rfind("image_id", 0) == 0)) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    const std::string where = "line " + std::to_string(line_no);
    if (static_cast<int>(cells.size()) != 4 + space.num_actions()) {
      throw ParseError(where, "expected " +
                                  std::to_string(4 + space.num_actions()) +
                                  " columns");
    }
    PairExample pair;
    pair.image_id = cells[0];
    pair.object = space.ObjectIndex(cells[1]);
    std::vector<double> probs;
    try {
      pair.det_h = std::stod(cells[2]);
      pair.det_o = std::stod(cells[3]);
      for (std::size_t i = 4; i < cells.size(); ++i) {
        probs.push_back(std::stod(cells[i]));
      }
    } catch (const std::logic_error&) {
      throw ParseError(where, "malformed number");
    }
    const auto before = JointHoi(probs, pair, space);
    const auto after = PostProcess(probs, pair, source, cfg, space).hoi_scores;
    for (int m : space.ClassesForObject(pair.object)) {
      rows.push_back({pair.image_id, m, before[m], after[m]});
    }
  }
  const std::string csv = ProjectionRowsToCsv(rows);
  if (a.out.empty()) {
    out << csv;
  } else {
    WriteStringToFile(a.out, csv);
    out << "wrote " << a.out << "\n";
  }
}

struct ReportArgs {
  std::string config;
  bool skip_sweep = false;
};

void ReportCmd(const ReportArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = LoadExperimentConfig(a.config);
  const auto runs = RunRecipes(cfg, cfg.recipes);
  const fs::path dir(cfg.output_dir);
  WriteStringToFile((dir / "ablation.csv").string(),
                    AblationTableCsv(runs, cfg.recipes));
  WriteStringToFile((dir / "ablation_runs.csv").string(), RunsCsv(runs));
  out << AblationTableCsv(runs, cfg.recipes);
  if (!a.skip_sweep && !cfg.k_sweep.empty()) {
    const auto sweep = RunKSweep(cfg, false);
    const std::string csv = KSweepCsv(sweep, cfg.k_sweep);
    WriteStringToFile((dir / "k_sweep.csv").string(), csv);
    out << csv;
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Action co-occurrence priors: priors, anchors, training and "
               "evaluation for human-object interaction labels."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  BuildPriorsArgs bp;
  auto* build = app.add_subcommand("build-priors",
                                   "Count label co-occurrence and write the "
                                   "prior file");
  build->add_option("--annotations", bp.annotations, "Annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--space", bp.space,
                    "HoiSpace JSON (inferred from annotations if absent)")
      ->check(CLI::ExistingFile);
  build->add_option("--out", bp.out, "Output prior file")->required();

  SelectAnchorsArgs sa;
  auto* select = app.add_subcommand(
      "select-anchors", "Run non-exclusive suppression and build groups");
  select->add_option("--priors", sa.priors, "Prior file")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--max-anchors", sa.max_anchors,
                     "Anchor cap K or 'unlimited'")
      ->capture_default_str();
  select->add_option("--scope", sa.scope,
                     "'global' or an object name whose matrices to use")
      ->capture_default_str();
  select->add_option("--out", sa.out, "Output partition JSON")->required();

  SynthArgs sy;
  auto* synth =
      app.add_subcommand("synth", "Generate the synthetic long-tail benchmark");
  synth->add_option("--out-dir", sy.out_dir, "Output directory")->required();
  synth->add_option("--seed", sy.cfg.seed, "Generator seed")->capture_default_str();
  synth->add_option("--n-actions", sy.cfg.n_actions, "Actions")
      ->capture_default_str();
  synth->add_option("--n-objects", sy.cfg.n_objects, "Objects")
      ->capture_default_str();
  synth->add_option("--n-heads", sy.cfg.n_heads, "Exclusive head actions")
      ->capture_default_str();
  synth->add_option("--n-train", sy.cfg.n_train_images, "Training images")
      ->capture_default_str();
  synth->add_option("--n-test", sy.cfg.n_test_images, "Test images")
      ->capture_default_str();
  synth->add_option("--rare-fraction", sy.cfg.rare_fraction,
                    "Share of satellite actions made rare")
      ->capture_default_str();
  synth->add_option("--rare-max-count", sy.cfg.rare_max_count,
                    "Cap on training positives of rare classes")
      ->capture_default_str();
  synth->add_option("--feature-noise", sy.cfg.feature_noise, "Noise scale")
      ->capture_default_str();
  synth->add_option("--feature-dim", sy.cfg.feature_dim, "Per-stream width")
      ->capture_default_str();
  synth->add_option("--embed-dim", sy.cfg.embed_dim, "Embedding width")
      ->capture_default_str();
  synth->add_option("--twin-similarity", sy.cfg.twin_similarity,
                    "Shared share of twin satellite features")
      ->capture_default_str();
  synth->add_option("--interaction-specificity",
                    sy.cfg.interaction_specificity,
                    "Object-specific share of action features")
      ->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand(
      "train", "Train one model per seed from a config file");
  train->add_option("--config", tr.config, "Experiment config (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--seed", tr.seeds, "Override the config's seeds");
  train->footer("Config keys:\n" + ConfigKeyHelp());

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
  eval->add_option("--gt", ev.gt, "Ground-truth annotation JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--dets", ev.dets, "Detections CSV")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--mode", ev.mode, "default | known-object")
      ->capture_default_str();
  eval->add_option("--space", ev.space, "HoiSpace JSON")
      ->check(CLI::ExistingFile);
  eval->add_option("--train", ev.train,
                   "Training annotations, for the rare/non-rare split")
      ->check(CLI::ExistingFile);
  eval->add_option("--out", ev.out, "Report JSON (stdout if absent)");
  eval->add_option("--summary-csv", ev.summary_csv, "One-row CSV summary");

  ProjectArgs pr;
  auto* project = app.add_subcommand(
      "project", "Apply prior projection to action scores (before/after CSV)");
  project->add_option("--priors", pr.priors, "Prior file")
      ->required()
      ->check(CLI::ExistingFile);
  project->add_option("--scores", pr.scores,
                      "CSV rows: image_id,object,det_h,det_o,p_1..p_N")
      ->required()
      ->check(CLI::ExistingFile);
  project->add_option("--alpha", pr.alpha, "Weight on present actions")
      ->capture_default_str();
  project->add_option("--beta", pr.beta, "Weight on absent actions")
      ->capture_default_str();
  project->add_flag("--global", pr.global,
                    "Use global matrices instead of per-object ones");
  project->add_option("--out", pr.out, "Output CSV (stdout if absent)");

  ReportArgs rp;
  auto* report = app.add_subcommand(
      "report", "Run the ablation table and anchor-count sweep from a config");
  report->add_option("--config", rp.config, "Experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_flag("--skip-sweep", rp.skip_sweep, "Skip the anchor-count sweep");
  report->footer("Config keys:\n" + ConfigKeyHelp());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) BuildPriorsCmd(bp, out);
    if (*select) SelectAnchorsCmd(sa, out, err);
    if (*synth) SynthCmd(sy, out);
    if (*train) TrainCmd(tr, out, err);
    if (*eval) EvalCmd(ev, out, err);
    if (*project) ProjectCmd(pr, out);
    if (*report) ReportCmd(rp, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace acp::cli
