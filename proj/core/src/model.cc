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

#include "acp/model.h"

#include <algorithm>

#include "acp/errors.h"

namespace acp {

using nn::Matrix;
using nn::ParamStore;

std::string_view VariantName(Variant v) {
  switch (v) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kModified:
      return "modified";
    case Variant::kMultiTask:
      return "multitask";
    case Variant::kTwoStream:
      return "twostream";
    case Variant::kHierarchical:
      return "hierarchical";
  }
  return "unknown";
}

Variant ParseVariant(std::string_view name) {
  for (Variant v : {Variant::kBaseline, Variant::kModified, Variant::kMultiTask,
                    Variant::kTwoStream, Variant::kHierarchical}) {
    if (VariantName(v) == name) return v;
  }
  throw ConfigError("unknown model variant '" + std::string(name) + "'");
}

bool NeedsPartition(Variant v) {
  return v == Variant::kMultiTask || v == Variant::kTwoStream ||
         v == Variant::kHierarchical;
}

// ---------------------------------------------------------------------------
// Self-attention

AttentionCache SelfAttentionForward(const Matrix& z, const Matrix& wa,
                                    const Matrix& wb, const Matrix& wx,
                                    const Matrix& wz) {
  AttentionCache c;
  c.z = z;
  c.pre_a = nn::MatMul(z, wa);
  c.pre_b = nn::MatMul(z, wb);
  c.pre_x = nn::MatMul(z, wx);
  c.relation = nn::SoftmaxRows(
      nn::MatMulTransB(nn::Relu(c.pre_a), nn::Relu(c.pre_b)));
  c.mixed = nn::MatMul(c.relation, nn::Relu(c.pre_x));
  c.output = z + nn::MatMulTransB(c.mixed, wz);
  nn::RequireFinite(c.output, "self-attention output");
  return c;
}

Matrix SelfAttentionBackward(ParamStore& store, const AttentionWeights& w,
                             const AttentionCache& c, const Matrix& grad_out) {
  const Matrix& wa = store.value(w.wa);
  const Matrix& wb = store.value(w.wb);
  const Matrix& wx = store.value(w.wx);
  const Matrix& wz = store.value(w.wz);

  // A = U Wz^T with U = R V.
  store.mutable_grad(w.wz) += nn::MatMulTransA(grad_out, c.mixed);
  const Matrix d_mixed = nn::MatMul(grad_out, wz);
  const Matrix value = nn::Relu(c.pre_x);
  const Matrix d_relation = nn::MatMulTransB(d_mixed, value);
  const Matrix d_value = nn::MatMulTransA(c.relation, d_mixed);

  const Matrix d_pre_x = nn::ReluBackward(c.pre_x, d_value);
  store.mutable_grad(w.wx) += nn::MatMulTransA(c.z, d_pre_x);

  const Matrix d_logits = nn::SoftmaxRowsBackward(c.relation, d_relation);
  const Matrix key = nn::Relu(c.pre_a);
  const Matrix query = nn::Relu(c.pre_b);
  const Matrix d_pre_a = nn::ReluBackward(c.pre_a, nn::MatMul(d_logits, query));
  const Matrix d_pre_b =
      nn::ReluBackward(c.pre_b, nn::MatMulTransA(d_logits, key));
  store.mutable_grad(w.wa) += nn::MatMulTransA(c.z, d_pre_a);
  store.mutable_grad(w.wb) += nn::MatMulTransA(c.z, d_pre_b);

  Matrix dz = grad_out;
  dz += nn::MatMulTransB(d_pre_x, wx);
  dz += nn::MatMulTransB(d_pre_a, wa);
  dz += nn::MatMulTransB(d_pre_b, wb);
  return dz;
}

// ---------------------------------------------------------------------------
// Composition and joint probabilities

std::vector<double> ComposeHierarchical(
    std::span<const double> anchor_probs,
    const std::vector<std::vector<double>>& group_probs,
    const AnchorPartition& partition, bool mask) {
  const int slots = partition.num_anchors() + 1;
  if (static_cast<int>(anchor_probs.size()) != slots ||
      static_cast<int>(group_probs.size()) != slots) {
    throw ShapeError("composition expects |D|+1 anchor and group entries");
  }
  std::vector<double> out(partition.num_actions, 0.0);
  for (int k = 0; k < partition.num_anchors(); ++k) {
    out[partition.anchors[k]] = anchor_probs[k];
  }
  for (int r = 0; r < partition.num_regular(); ++r) {
    const int j = partition.regular[r];
    double total = 0.0;
    for (int slot = 0; slot < slots; ++slot) {
      if (mask && !partition.InGroup(slot, j)) continue;
      total += anchor_probs[slot] * group_probs[slot].at(r);
    }
    out[j] = total;
  }
  return out;
}

std::vector<double> JointHoi(std::span<const double> action_probs,
                             double det_h, double det_o, int object,
                             const HoiSpace& space) {
  std::vector<double> y(space.num_classes(), 0.0);
  for (int m : space.ClassesForObject(object)) {
    y[m] = det_h * det_o * action_probs[space.hoi_class(m).action];
  }
  return y;
}

std::vector<double> JointHoi(std::span<const double> action_probs,
                             const PairExample& pair, const HoiSpace& space) {
  return JointHoi(action_probs, pair.det_h, pair.det_o, pair.object, space);
}

// ---------------------------------------------------------------------------
// Mlp2

Mlp2 Mlp2::Create(ParamStore& store, const std::string& name, int in,
                  int hidden, int out) {
  Mlp2 m;
  m.first_ = nn::Dense::Create(store, name + ".l1", in, hidden);
  m.second_ = nn::Dense::Create(store, name + ".l2", hidden, out);
  return m;
}

Mlp2Cache Mlp2::Forward(const ParamStore& store, Matrix input) const {
  Mlp2Cache c;
  c.input = std::move(input);
  c.pre_hidden = first_.Forward(store, c.input);
  c.hidden = nn::Relu(c.pre_hidden);
  c.output = second_.Forward(store, c.hidden);
  return c;
}

Matrix Mlp2::Backward(ParamStore& store, const Mlp2Cache& c,
                      const Matrix& grad_out) const {
  Matrix d_hidden = second_.Backward(store, c.hidden, grad_out);
  return first_.Backward(store, c.input,
                         nn::ReluBackward(c.pre_hidden, d_hidden));
}

// ---------------------------------------------------------------------------
// HoiModel

HoiModel::HoiModel(ModelConfig config, const HoiSpace& space,
                   std::optional<AnchorPartition> partition)
    : config_(config),
      space_(space),
      partition_(std::move(partition)),
      num_actions_(space.num_actions()) {
  if (NeedsPartition(config_.variant) && !partition_) {
    throw ConfigError(std::string(VariantName(config_.variant)) +
                      " variant requires an anchor partition");
  }
  if (config_.variant == Variant::kBaseline &&
      (config_.attention || config_.emb_head)) {
    throw ConfigError("baseline variant has no fused features for attention "
                      "or the embedding head");
  }
  if (partition_ && partition_->num_actions != num_actions_) {
    throw ConfigError("partition action count does not match the space");
  }
  out_dim_ = config_.variant == Variant::kBaseline ? num_actions_
                                                   : config_.dims.hidden;
  if (partition_) {
    const AnchorPartition& p = *partition_;
    if (static_cast<int>(p.groups.size()) != p.num_anchors() + 1) {
      throw ConfigError("partition has no groups; run BuildGroups first");
    }
    mask_.assign(p.num_anchors() + 1,
                 std::vector<double>(p.num_regular(), 1.0));
    if (config_.mask_groups) {
      for (int slot = 0; slot <= p.num_anchors(); ++slot) {
        for (int r = 0; r < p.num_regular(); ++r) {
          mask_[slot][r] = p.InGroup(slot, p.regular[r]) ? 1.0 : 0.0;
        }
      }
    }
  }
}

bool HoiModel::has_anchor_head() const {
  return config_.variant == Variant::kMultiTask ||
         config_.variant == Variant::kTwoStream ||
         config_.variant == Variant::kHierarchical;
}

int HoiModel::object_code_dim() const {
  return config_.variant == Variant::kBaseline ? space_.num_objects()
                                               : config_.dims.d_e;
}

double HoiModel::GroupMask(int slot, int regular_index) const {
  return mask_[slot][regular_index];
}

void HoiModel::InitParams(ParamStore& store) {
  const ModelDims& d = config_.dims;
  const int hidden = d.hidden;
  const int code = object_code_dim();
  streams_.clear();
  streams_.push_back(Mlp2::Create(store, "stream.h", d.d_h, hidden, out_dim_));
  streams_.push_back(Mlp2::Create(store, "stream.o", d.d_o, hidden, out_dim_));
  streams_.push_back(
      Mlp2::Create(store, "stream.k", d.d_k + code, hidden, out_dim_));
  streams_.push_back(
      Mlp2::Create(store, "stream.b", d.d_b + code, hidden, out_dim_));

  if (config_.attention) {
    store.AddGlorot(attention_.wa, hidden, d.attn_proj);
    store.AddGlorot(attention_.wb, hidden, d.attn_proj);
    store.AddGlorot(attention_.wx, hidden, d.attn_proj);
    store.AddGlorot(attention_.wz, hidden, d.attn_proj);
  }

  const int n = num_actions_;
  switch (config_.variant) {
    case Variant::kBaseline:
      break;
    case Variant::kModified:
      sub_ = Mlp2::Create(store, "head.sub", hidden, hidden, n);
      break;
    case Variant::kMultiTask:
      sub_ = Mlp2::Create(store, "head.sub", hidden, hidden, n);
      anchor_ = Mlp2::Create(store, "head.anchor", hidden, hidden,
                             partition_->num_anchors() + 1);
      break;
    case Variant::kTwoStream:
      anchor_ = Mlp2::Create(store, "head.anchor", hidden, hidden,
                             partition_->num_anchors() + 1);
      regular_ = Mlp2::Create(store, "head.regular", hidden, hidden,
                              partition_->num_regular());
      break;
    case Variant::kHierarchical:
      anchor_ = Mlp2::Create(store, "head.anchor", hidden, hidden,
                             partition_->num_anchors() + 1);
      groups_.clear();
      for (int slot = 0; slot <= partition_->num_anchors(); ++slot) {
        groups_.push_back(Mlp2::Create(store,
                                       "head.group" + std::to_string(slot),
                                       hidden, hidden,
                                       partition_->num_regular()));
      }
      break;
  }
  if (config_.emb_head) {
    embed_ = nn::Dense::Create(store, "head.embed", hidden, d.d_e);
  }
  initialized_ = true;
}

void HoiModel::BuildInputs(std::span<const PairExample> pairs,
                           std::vector<Matrix>& inputs) const {
  const ModelDims& d = config_.dims;
  const int code = object_code_dim();
  const std::size_t batch = pairs.size();
  inputs.assign(4, Matrix());
  inputs[0] = Matrix(batch, d.d_h);
  inputs[1] = Matrix(batch, d.d_o);
  inputs[2] = Matrix(batch, d.d_k + code);
  inputs[3] = Matrix(batch, d.d_b + code);
  auto put = [](Matrix& m, std::size_t r, std::size_t offset,
                const std::vector<double>& v, int expected, const char* what) {
    if (static_cast<int>(v.size()) != expected) {
      throw ShapeError(std::string(what) + " has " + std::to_string(v.size()) +
                       " entries, expected " + std::to_string(expected));
    }
    std::copy(v.begin(), v.end(), m.row(r).begin() + offset);
  };
  for (std::size_t r = 0; r < batch; ++r) {
    const PairExample& p = pairs[r];
    put(inputs[0], r, 0, p.x_h, d.d_h, "x_h");
    put(inputs[1], r, 0, p.x_o, d.d_o, "x_o");
    put(inputs[2], r, 0, p.k, d.d_k, "k");
    put(inputs[3], r, 0, p.b, d.d_b, "b");
    if (p.object < 0 || p.object >= space_.num_objects()) {
      throw ShapeError("pair object index out of range");
    }
    if (config_.variant == Variant::kBaseline) {
      inputs[2](r, d.d_k + p.object) = 1.0;
      inputs[3](r, d.d_b + p.object) = 1.0;
    } else {
      put(inputs[2], r, d.d_k, p.o_embed, d.d_e, "o_embed");
      put(inputs[3], r, d.d_b, p.o_embed, d.d_e, "o_embed");
    }
  }
}

HoiModel::Pass HoiModel::Forward(const ParamStore& store,
                                 std::span<const PairExample> pairs) const {
  if (!initialized_) throw ContractError("HoiModel::InitParams not called");
  Pass pass;
  pass.batch = pairs.size();
  const std::size_t batch = pairs.size();
  const int n = num_actions_;

  std::vector<Matrix> inputs;
  BuildInputs(pairs, inputs);
  Matrix sum(batch, out_dim_);
  for (int s = 0; s < ModelConfig::kNumStreams; ++s) {
    pass.streams.push_back(streams_[s].Forward(store, std::move(inputs[s])));
    if (config_.variant == Variant::kBaseline) {
      sum += pass.streams.back().output;
    } else {
      sum += nn::Relu(pass.streams.back().output);
    }
  }

  if (config_.variant == Variant::kBaseline) {
    pass.action_probs = nn::Sigmoid(sum);
    return pass;
  }

  pass.fused = sum * (1.0 / ModelConfig::kNumStreams);
  if (config_.attention) {
    pass.attention = SelfAttentionForward(
        pass.fused, store.value(attention_.wa), store.value(attention_.wb),
        store.value(attention_.wx), store.value(attention_.wz));
    pass.features = pass.attention->output;
  } else {
    pass.features = pass.fused;
  }
  const Matrix& f = pass.features;

  switch (config_.variant) {
    case Variant::kBaseline:
      break;
    case Variant::kModified:
      pass.sub = sub_.Forward(store, f);
      pass.action_probs = nn::Sigmoid(pass.sub.output);
      break;
    case Variant::kMultiTask:
      pass.sub = sub_.Forward(store, f);
      pass.action_probs = nn::Sigmoid(pass.sub.output);
      pass.anchor = anchor_.Forward(store, f);
      pass.anchor_probs = nn::SoftmaxRows(pass.anchor.output);
      break;
    case Variant::kTwoStream: {
      const AnchorPartition& p = *partition_;
      pass.anchor = anchor_.Forward(store, f);
      pass.anchor_probs = nn::SoftmaxRows(pass.anchor.output);
      pass.regular = regular_.Forward(store, f);
      pass.regular_probs = nn::Sigmoid(pass.regular.output);
      pass.action_probs = Matrix(batch, n);
      for (std::size_t r = 0; r < batch; ++r) {
        for (int k = 0; k < p.num_anchors(); ++k) {
          pass.action_probs(r, p.anchors[k]) = pass.anchor_probs(r, k);
        }
        for (int j = 0; j < p.num_regular(); ++j) {
          pass.action_probs(r, p.regular[j]) = pass.regular_probs(r, j);
        }
      }
      break;
    }
    case Variant::kHierarchical: {
      const AnchorPartition& p = *partition_;
      pass.anchor = anchor_.Forward(store, f);
      pass.anchor_probs = nn::SoftmaxRows(pass.anchor.output);
      for (const Mlp2& g : groups_) {
        pass.groups.push_back(g.Forward(store, f));
        pass.group_probs.push_back(nn::Sigmoid(pass.groups.back().output));
      }
      pass.action_probs = Matrix(batch, n);
      const int slots = p.num_anchors() + 1;
      for (std::size_t r = 0; r < batch; ++r) {
        for (int k = 0; k < p.num_anchors(); ++k) {
          pass.action_probs(r, p.anchors[k]) = pass.anchor_probs(r, k);
        }
        for (int j = 0; j < p.num_regular(); ++j) {
          double total = 0.0;
          for (int slot = 0; slot < slots; ++slot) {
            total += pass.anchor_probs(r, slot) * GroupMask(slot, j) *
                     pass.group_probs[slot](r, j);
          }
          pass.action_probs(r, p.regular[j]) = total;
        }
      }
      break;
    }
  }
  if (config_.emb_head) pass.embed = embed_.Forward(store, f);
  return pass;
}

void HoiModel::Backward(ParamStore& store, const Pass& pass,
                        const OutputGrads& grads) const {
  const std::size_t batch = pass.batch;
  const int n = num_actions_;
  Matrix d_action =
      grads.action.empty() ? Matrix(batch, n) : grads.action;
  nn::RequireSameShape(d_action, pass.action_probs, "action gradient");

  std::vector<Matrix> d_stream(ModelConfig::kNumStreams);
  if (config_.variant == Variant::kBaseline) {
    Matrix d_sum = nn::SigmoidBackward(pass.action_probs, d_action);
    for (auto& d : d_stream) d = d_sum;
  } else {
    Matrix d_features(batch, config_.dims.hidden);
    auto anchor_backward = [&](Matrix d_probs) {
      Matrix d_logits = nn::SoftmaxRowsBackward(pass.anchor_probs, d_probs);
      if (!grads.anchor_logits.empty()) d_logits += grads.anchor_logits;
      d_features += anchor_.Backward(store, pass.anchor, d_logits);
    };

    switch (config_.variant) {
      case Variant::kBaseline:
        break;
      case Variant::kModified:
      case Variant::kMultiTask:
        d_features += sub_.Backward(
            store, pass.sub, nn::SigmoidBackward(pass.action_probs, d_action));
        if (config_.variant == Variant::kMultiTask) {
          anchor_backward(Matrix(batch, partition_->num_anchors() + 1));
        }
        break;
      case Variant::kTwoStream: {
        const AnchorPartition& p = *partition_;
        Matrix d_probs(batch, p.num_anchors() + 1);
        Matrix d_regular(batch, p.num_regular());
        for (std::size_t r = 0; r < batch; ++r) {
          for (int k = 0; k < p.num_anchors(); ++k) {
            d_probs(r, k) = d_action(r, p.anchors[k]);
          }
          for (int j = 0; j < p.num_regular(); ++j) {
            d_regular(r, j) = d_action(r, p.regular[j]);
          }
        }
        anchor_backward(std::move(d_probs));
        d_features += regular_.Backward(
            store, pass.regular,
            nn::SigmoidBackward(pass.regular_probs, d_regular));
        break;
      }
      case Variant::kHierarchical: {
        const AnchorPartition& p = *partition_;
        const int slots = p.num_anchors() + 1;
        Matrix d_probs(batch, slots);
        std::vector<Matrix> d_group(slots, Matrix(batch, p.num_regular()));
        for (std::size_t r = 0; r < batch; ++r) {
          for (int k = 0; k < p.num_anchors(); ++k) {
            d_probs(r, k) += d_action(r, p.anchors[k]);
          }
          for (int j = 0; j < p.num_regular(); ++j) {
            const double g = d_action(r, p.regular[j]);
            for (int slot = 0; slot < slots; ++slot) {
              const double m = GroupMask(slot, j);
              d_probs(r, slot) += g * m * pass.group_probs[slot](r, j);
              d_group[slot](r, j) = g * m * pass.anchor_probs(r, slot);
            }
          }
        }
        anchor_backward(std::move(d_probs));
        for (int slot = 0; slot < slots; ++slot) {
          d_features += groups_[slot].Backward(
              store, pass.groups[slot],
              nn::SigmoidBackward(pass.group_probs[slot], d_group[slot]));
        }
        break;
      }
    }
    if (config_.emb_head && !grads.embed.empty()) {
      d_features += embed_.Backward(store, pass.features, grads.embed);
    }

    Matrix d_fused = pass.attention
                         ? SelfAttentionBackward(store, attention_,
                                                 *pass.attention, d_features)
                         : std::move(d_features);
    d_fused *= 1.0 / ModelConfig::kNumStreams;
    for (int s = 0; s < ModelConfig::kNumStreams; ++s) {
      d_stream[s] = nn::ReluBackward(pass.streams[s].output, d_fused);
    }
  }

  for (int s = 0; s < ModelConfig::kNumStreams; ++s) {
    streams_[s].Backward(store, pass.streams[s], d_stream[s]);
  }
}

std::vector<ActionPrediction> HoiModel::Predictions(const Pass& pass) const {
  std::vector<ActionPrediction> out(pass.batch);
  for (std::size_t r = 0; r < pass.batch; ++r) {
    ActionPrediction& pred = out[r];
    auto a = pass.action_probs.row(r);
    pred.action_probs.assign(a.begin(), a.end());
    if (!pass.anchor_probs.empty()) {
      auto p = pass.anchor_probs.row(r);
      pred.anchor_probs.assign(p.begin(), p.end());
    }
    for (std::size_t slot = 0; slot < pass.group_probs.size(); ++slot) {
      auto g = pass.group_probs[slot].row(r);
      std::vector<double> probs(g.begin(), g.end());
      for (std::size_t j = 0; j < probs.size(); ++j) {
        probs[j] *= GroupMask(static_cast<int>(slot), static_cast<int>(j));
      }
      pred.group_probs.push_back(std::move(probs));
    }
    if (!pass.embed.empty()) {
      auto v = pass.embed.row(r);
      pred.regressed_embed.assign(v.begin(), v.end());
    }
  }
  return out;
}

}  // namespace acp
