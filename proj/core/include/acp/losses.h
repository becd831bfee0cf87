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

#ifndef ACP_LOSSES_H_
#define ACP_LOSSES_H_

#include <span>
#include <string>
#include <vector>

#include "acp/hoi_space.h"
#include "acp/model.h"
#include "acp/nn/matrix.h"
#include "acp/nn/ops.h"
#include "acp/priors.h"

namespace acp {

struct ProjectionConfig {
  double alpha = 1.2;
  double beta = 0.8;
  // Project with the pair object's matrices rather than the global ones.
  bool use_per_object = true;

  // alpha + beta = 2 (to 1e-12), alpha > beta, both >= 0. Throws ConfigError.
  void Validate() const;
};

struct LossWeights {
  double lambda0 = 0.1;  // embedding loss
  double lambda1 = 1.0;  // ground truth
  double lambda2 = 0.5;  // projected prediction
  double lambda3 = 0.5;  // projected ground truth

  // All non-negative and lambda1 > 0. Throws ConfigError.
  void Validate() const;
};

// A*(j) = (1/N) sum_i [alpha A(i) c_ij + beta (1 - A(i)) c'_ij].
// Throws ContractError when an entry of `a` lies outside [0, 1].
std::vector<double> Project(std::span<const double> a,
                            const PriorMatrices& priors,
                            const ProjectionConfig& cfg);

// Resolves the matrices used to project a pair. Objects without any
// training image fall back to the global scope; each such object is
// recorded once in warnings().
class PriorSource {
 public:
  PriorSource(const CooccurrenceStats& stats, bool use_per_object);

  const PriorMatrices& For(int object) const;
  const PriorMatrices& global() const { return global_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  bool use_per_object_;
  PriorMatrices global_;
  std::vector<PriorMatrices> per_object_;
  std::vector<bool> has_stats_;
  std::vector<std::string> warnings_;
};

// Batched joint HOI scores: row r is JointHoi(action_probs row r, pairs[r]).
nn::Matrix JointHoiBatch(const nn::Matrix& action_probs,
                         std::span<const PairExample> pairs,
                         const HoiSpace& space);
// Pulls dL/dY back to dL/dA through Y(m) = det_h det_o A(action(m)).
nn::Matrix JointHoiBackward(const nn::Matrix& grad_hoi,
                            std::span<const PairExample> pairs,
                            const HoiSpace& space);

// Binary ground-truth HOI vector (length M) of a pair.
std::vector<double> GroundTruthHoi(const PairExample& pair,
                                   const HoiSpace& space);

// joint(det_h, det_o, project(A, C_o, C'_o)), clamped to [0, 1]. Constant
// target: callers never differentiate through it.
std::vector<double> TeacherFromPrediction(std::span<const double> action_probs,
                                          const PairExample& pair,
                                          const PriorSource& priors,
                                          const ProjectionConfig& cfg,
                                          const HoiSpace& space);
// joint(1, 1, project(A_gt, C_o, C'_o)), clamped to [0, 1].
std::vector<double> TeacherFromGroundTruth(const PairExample& pair,
                                           const PriorSource& priors,
                                           const ProjectionConfig& cfg,
                                           const HoiSpace& space);

// lambda1 BCE(Y, Ygt) + lambda2 BCE(Y, Yproj) + lambda3 BCE(Y, Ygt_proj).
// Terms with a zero weight are skipped entirely. Gradient is dL/dY.
nn::LossValue DistillLoss(const nn::Matrix& pred, const nn::Matrix& gt,
                          const nn::Matrix& pred_teacher,
                          const nn::Matrix& gt_teacher, const LossWeights& w);

// -log sigmoid(o . v) for one pair.
double EmbLoss(std::span<const double> o_embed, std::span<const double> v);
// Mean of EmbLoss over rows of `v` (B x d_e) against each pair's o_embed.
// Gradient is dL/dv.
nn::LossValue EmbLossBatch(const nn::Matrix& v,
                           std::span<const PairExample> pairs);

// distill + lambda0 * emb.
double TotalLoss(double distill, double emb, const LossWeights& w);

struct PostProcessed {
  std::vector<double> action_probs;  // projected, N
  std::vector<double> hoi_scores;    // recomposed, M
};
// Test-time projection of a prediction; touches no parameters. Scores are
// not clamped, so projected actions may exceed 1 (up to alpha).
PostProcessed PostProcess(std::span<const double> action_probs,
                          const PairExample& pair, const PriorSource& priors,
                          const ProjectionConfig& cfg, const HoiSpace& space);

struct ProjectionRow {
  std::string image_id;
  int hoi_class = 0;
  double score_before = 0.0;
  double score_after = 0.0;
};
// CSV "image_id,hoi_class,score_before,score_after".
std::string ProjectionRowsToCsv(const std::vector<ProjectionRow>& rows);

}  // namespace acp

#endif  // ACP_LOSSES_H_
