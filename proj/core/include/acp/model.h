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

#ifndef ACP_MODEL_H_
#define ACP_MODEL_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acp/anchors.h"
#include "acp/annotations.h"
#include "acp/hoi_space.h"
#include "acp/nn/matrix.h"
#include "acp/nn/ops.h"
#include "acp/nn/param_store.h"

namespace acp {

// One human-object candidate pair with its per-stream features.
struct PairExample {
  std::string image_id;
  std::vector<double> x_h;      // human appearance
  std::vector<double> x_o;      // object appearance
  std::vector<double> k;        // pose proxy
  std::vector<double> b;        // box geometry
  std::vector<double> o_embed;  // object word embedding
  int object = 0;
  double det_h = 1.0;
  double det_o = 1.0;
  std::vector<int> gt_actions;  // sorted; empty for background pairs
  Box human_box{0, 0, 1, 1};
  Box object_box{0, 0, 1, 1};
};

enum class Variant { kBaseline, kModified, kMultiTask, kTwoStream, kHierarchical };

std::string_view VariantName(Variant v);
// Accepts "baseline", "modified", "multitask", "twostream", "hierarchical".
Variant ParseVariant(std::string_view name);
bool NeedsPartition(Variant v);

struct ModelDims {
  int d_h = 16;
  int d_o = 16;
  int d_k = 16;
  int d_b = 16;
  int d_e = 8;
  int hidden = 512;
  int attn_proj = 128;
};

struct ModelConfig {
  Variant variant = Variant::kModified;
  bool attention = false;
  bool emb_head = false;
  // Zero the group output for actions outside that anchor's group.
  bool mask_groups = true;
  ModelDims dims;
  static constexpr int kNumStreams = 4;
};

struct ActionPrediction {
  std::vector<double> anchor_probs;              // |D|+1, empty if absent
  std::vector<std::vector<double>> group_probs;  // per slot, N-|D| each
  std::vector<double> action_probs;              // N
  std::vector<double> regressed_embed;           // d_e, empty if absent
};

// Parameter names of the pair self-attention block. Weights are
// hidden x attn_proj, no biases.
struct AttentionWeights {
  std::string wa = "attn.wa";
  std::string wb = "attn.wb";
  std::string wx = "attn.wx";
  std::string wz = "attn.wz";
};

struct AttentionCache {
  nn::Matrix z;         // B x hidden input
  nn::Matrix pre_a;     // Z Wa
  nn::Matrix pre_b;     // Z Wb
  nn::Matrix pre_x;     // Z Wx
  nn::Matrix relation;  // R, B x B
  nn::Matrix mixed;     // R relu(Z Wx), B x attn_proj
  nn::Matrix output;    // Z + A
};

// R = softmax_rows(relu(Z Wa) relu(Z Wb)^T); A = R relu(Z Wx) Wz^T;
// returns Z + A along with intermediates.
AttentionCache SelfAttentionForward(const nn::Matrix& z, const nn::Matrix& wa,
                                    const nn::Matrix& wb, const nn::Matrix& wx,
                                    const nn::Matrix& wz);
// Accumulates weight gradients into `store` (names from `weights`) and
// returns dL/dZ.
nn::Matrix SelfAttentionBackward(nn::ParamStore& store,
                                 const AttentionWeights& weights,
                                 const AttentionCache& cache,
                                 const nn::Matrix& grad_out);

// Law of total probability over the anchor slots plus `other`. Returns N
// action probabilities: anchors copy their anchor probability; a regular
// action sums anchor_probs[i] * group_probs[i][j] over the slots whose group
// holds it (over all slots when `mask` is false).
std::vector<double> ComposeHierarchical(
    std::span<const double> anchor_probs,
    const std::vector<std::vector<double>>& group_probs,
    const AnchorPartition& partition, bool mask);

// Y(m) = det_h * det_o * A(action(m)) for classes of `object`, else 0.
std::vector<double> JointHoi(std::span<const double> action_probs,
                             double det_h, double det_o, int object,
                             const HoiSpace& space);
std::vector<double> JointHoi(std::span<const double> action_probs,
                             const PairExample& pair, const HoiSpace& space);

// Two dense layers with ReLU between.
struct Mlp2Cache {
  nn::Matrix input;
  nn::Matrix pre_hidden;
  nn::Matrix hidden;
  nn::Matrix output;
};

class Mlp2 {
 public:
  Mlp2() = default;
  static Mlp2 Create(nn::ParamStore& store, const std::string& name, int in,
                     int hidden, int out);
  Mlp2Cache Forward(const nn::ParamStore& store, nn::Matrix input) const;
  nn::Matrix Backward(nn::ParamStore& store, const Mlp2Cache& cache,
                      const nn::Matrix& grad_out) const;

 private:
  nn::Dense first_;
  nn::Dense second_;
};

// The multi-stream fusion network with its action prediction head.
// Forward/Backward operate on the pairs of one image at a time, which is
// also the scope of self-attention.
class HoiModel {
 public:
  struct Pass {
    std::size_t batch = 0;
    std::vector<Mlp2Cache> streams;  // h, o, k, b
    std::vector<nn::Matrix> stream_pre;  // pre-ReLU stream outputs
    nn::Matrix fused;                // Z
    std::optional<AttentionCache> attention;
    nn::Matrix features;             // Z or Z + A
    Mlp2Cache sub;                   // modified / multitask
    Mlp2Cache anchor;                // multitask / twostream / hierarchical
    Mlp2Cache regular;               // twostream
    std::vector<Mlp2Cache> groups;   // hierarchical
    nn::Matrix anchor_probs;         // B x (|D|+1)
    nn::Matrix regular_probs;        // twostream, B x R
    std::vector<nn::Matrix> group_probs;  // hierarchical, unmasked sigmoid
    nn::Matrix action_probs;         // B x N
    nn::Matrix embed;                // B x d_e
  };

  // Gradients of the loss with respect to model outputs. Empty matrices
  // mean zero.
  struct OutputGrads {
    nn::Matrix action;         // B x N
    nn::Matrix anchor_logits;  // B x (|D|+1)
    nn::Matrix embed;          // B x d_e
  };

  HoiModel(ModelConfig config, const HoiSpace& space,
           std::optional<AnchorPartition> partition = std::nullopt);

  const ModelConfig& config() const { return config_; }
  const HoiSpace& space() const { return space_; }
  const std::optional<AnchorPartition>& partition() const { return partition_; }
  bool has_anchor_head() const;

  // Registers every parameter in `store` in a fixed order.
  void InitParams(nn::ParamStore& store);

  Pass Forward(const nn::ParamStore& store,
               std::span<const PairExample> pairs) const;
  void Backward(nn::ParamStore& store, const Pass& pass,
                const OutputGrads& grads) const;

  std::vector<ActionPrediction> Predictions(const Pass& pass) const;

  // One-hot (baseline) or embedding object code, as fed to f_k and f_b.
  int object_code_dim() const;

 private:
  void BuildInputs(std::span<const PairExample> pairs,
                   std::vector<nn::Matrix>& inputs) const;
  double GroupMask(int slot, int regular_index) const;

  ModelConfig config_;
  HoiSpace space_;
  std::optional<AnchorPartition> partition_;
  int num_actions_ = 0;
  int out_dim_ = 0;  // stream width: N for baseline, hidden otherwise

  std::vector<Mlp2> streams_;
  AttentionWeights attention_;
  Mlp2 sub_;
  Mlp2 anchor_;
  Mlp2 regular_;
  std::vector<Mlp2> groups_;
  nn::Dense embed_;
  std::vector<std::vector<double>> mask_;  // [slot][regular index]
  bool initialized_ = false;
};

}  // namespace acp

#endif  // ACP_MODEL_H_
