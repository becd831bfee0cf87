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

#ifndef ACP_NN_OPS_H_
#define ACP_NN_OPS_H_

#include <string>

#include "acp/nn/matrix.h"
#include "acp/nn/param_store.h"

namespace acp::nn {

// Clamp applied to probabilities before taking logs.
inline constexpr double kProbEpsilon = 1e-12;

// y = x W + b, with W in x.cols() x out and b a 1 x out row.
Matrix DenseForward(const Matrix& x, const Matrix& weight, const Matrix& bias);

struct DenseGrads {
  Matrix input;   // dL/dx
  Matrix weight;  // dL/dW
  Matrix bias;    // dL/db
};
DenseGrads DenseBackward(const Matrix& x, const Matrix& weight,
                         const Matrix& grad_out);

// Handle to a dense layer living in a ParamStore as "<name>.w" / "<name>.b".
class Dense {
 public:
  Dense() = default;
  static Dense Create(ParamStore& store, const std::string& name,
                      std::size_t in, std::size_t out);

  Matrix Forward(const ParamStore& store, const Matrix& x) const;
  // Accumulates parameter gradients into `store`; returns dL/dx.
  Matrix Backward(ParamStore& store, const Matrix& x,
                  const Matrix& grad_out) const;

  const std::string& weight_name() const { return weight_; }
  const std::string& bias_name() const { return bias_; }

 private:
  std::string weight_;
  std::string bias_;
};

Matrix Relu(const Matrix& x);
// grad * 1[pre > 0]
Matrix ReluBackward(const Matrix& pre, const Matrix& grad_out);
Matrix Sigmoid(const Matrix& x);
double Sigmoid(double x);
// grad * y (1 - y), y = sigmoid output
Matrix SigmoidBackward(const Matrix& out, const Matrix& grad_out);
Matrix SoftmaxRows(const Matrix& x);
// y * (grad - rowsum(grad * y)), y = softmax output
Matrix SoftmaxRowsBackward(const Matrix& out, const Matrix& grad_out);

struct LossValue {
  double value = 0.0;
  Matrix grad;  // dL/d(first argument)
};

// Mean over all entries of -(t log p + (1 - t) log(1 - p)), p clamped to
// [eps, 1 - eps]; the gradient is zero where the clamp is active. Throws
// ContractError for targets outside [0, 1].
LossValue Bce(const Matrix& pred, const Matrix& target);

// Mean over rows of -sum(t * log softmax(z)); gradient is with respect to
// the logits.
LossValue CeSoftmax(const Matrix& logits, const Matrix& one_hot);

}  // namespace acp::nn

#endif  // ACP_NN_OPS_H_
