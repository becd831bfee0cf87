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

#include "acp/nn/ops.h"

#include <algorithm>
#include <cmath>

#include "acp/errors.h"

namespace acp::nn {

Matrix DenseForward(const Matrix& x, const Matrix& weight, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != weight.cols()) {
    throw ShapeError("dense bias " + bias.ShapeString() + " for weight " +
                     weight.ShapeString());
  }
  Matrix y = MatMul(x, weight);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < y.cols(); ++c) row[c] += bias(0, c);
  }
  RequireFinite(y, "dense output");
  return y;
}

DenseGrads DenseBackward(const Matrix& x, const Matrix& weight,
                         const Matrix& grad_out) {
  DenseGrads g;
  g.weight = MatMulTransA(x, grad_out);
  g.bias = ColumnSums(grad_out);
  g.input = MatMulTransB(grad_out, weight);
  return g;
}

Dense Dense::Create(ParamStore& store, const std::string& name, std::size_t in,
                    std::size_t out) {
  Dense d;
  d.weight_ = name + ".w";
  d.bias_ = name + ".b";
  store.AddGlorot(d.weight_, in, out);
  store.AddZeros(d.bias_, 1, out);
  return d;
}

Matrix Dense::Forward(const ParamStore& store, const Matrix& x) const {
  return DenseForward(x, store.value(weight_), store.value(bias_));
}

Matrix Dense::Backward(ParamStore& store, const Matrix& x,
                       const Matrix& grad_out) const {
  DenseGrads g = DenseBackward(x, store.value(weight_), grad_out);
  store.mutable_grad(weight_) += g.weight;
  store.mutable_grad(bias_) += g.bias;
  return std::move(g.input);
}

Matrix Relu(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Matrix ReluBackward(const Matrix& pre, const Matrix& grad_out) {
  RequireSameShape(pre, grad_out, "relu_backward");
  Matrix g = grad_out;
  auto p = pre.data();
  auto d = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(p[i] > 0.0)) d[i] = 0.0;
  }
  return g;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix Sigmoid(const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data()) v = Sigmoid(v);
  return y;
}

Matrix SigmoidBackward(const Matrix& out, const Matrix& grad_out) {
  RequireSameShape(out, grad_out, "sigmoid_backward");
  Matrix g = grad_out;
  auto y = out.data();
  auto d = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
  return g;
}

Matrix SoftmaxRows(const Matrix& x) {
  Matrix y = x;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
  return y;
}

Matrix SoftmaxRowsBackward(const Matrix& out, const Matrix& grad_out) {
  RequireSameShape(out, grad_out, "softmax_backward");
  Matrix g(out.rows(), out.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto y = out.row(r);
    auto d = grad_out.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) dot += y[c] * d[c];
    auto o = g.row(r);
    for (std::size_t c = 0; c < y.size(); ++c) o[c] = y[c] * (d[c] - dot);
  }
  return g;
}

LossValue Bce(const Matrix& pred, const Matrix& target) {
  RequireSameShape(pred, target, "bce");
  RequireFinite(pred, "bce prediction");
  LossValue loss;
  loss.grad = Matrix(pred.rows(), pred.cols());
  if (pred.empty()) return loss;
  const double inv_n = 1.0 / static_cast<double>(pred.size());
  auto p = pred.data();
  auto t = target.data();
  auto g = loss.grad.data();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(t[i] >= 0.0 && t[i] <= 1.0)) {
      throw ContractError("bce target outside [0, 1]");
    }
    const bool clamped = p[i] < kProbEpsilon || p[i] > 1.0 - kProbEpsilon;
    const double q = std::clamp(p[i], kProbEpsilon, 1.0 - kProbEpsilon);
    total -= t[i] * std::log(q) + (1.0 - t[i]) * std::log(1.0 - q);
    g[i] = clamped ? 0.0 : inv_n * ((1.0 - t[i]) / (1.0 - q) - t[i] / q);
  }
  loss.value = total * inv_n;
  return loss;
}

LossValue CeSoftmax(const Matrix& logits, const Matrix& one_hot) {
  RequireSameShape(logits, one_hot, "ce_softmax");
  RequireFinite(logits, "ce_softmax logits");
  LossValue loss;
  loss.grad = SoftmaxRows(logits);
  if (logits.rows() == 0) return loss;
  const double inv_rows = 1.0 / static_cast<double>(logits.rows());
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto z = logits.row(r);
    auto t = one_hot.row(r);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double log_norm = mx + std::log(sum);
    double t_sum = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
      total -= t[c] * (z[c] - log_norm);
      t_sum += t[c];
    }
    auto g = loss.grad.row(r);
    for (std::size_t c = 0; c < z.size(); ++c) {
      g[c] = inv_rows * (t_sum * g[c] - t[c]);
    }
  }
  loss.value = total * inv_rows;
  return loss;
}

}  // namespace acp::nn
