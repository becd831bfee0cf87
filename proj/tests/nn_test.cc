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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "acp/errors.h"
#include "acp/nn/checkpoint.h"
#include "acp/nn/grad_check.h"
#include "acp/nn/matrix.h"
#include "acp/nn/ops.h"
#include "acp/nn/optim.h"
#include "acp/nn/param_store.h"
#include "test_util.h"

namespace acp::nn {
namespace {

Matrix RandomMatrix(std::mt19937_64& rng, std::size_t r, std::size_t c,
                    double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

Matrix RandomProbs(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Matrix m(r, c);
  for (double& v : m.data()) v = u(rng);
  return m;
}

TEST(Matrix, ProductsAgree) {
  std::mt19937_64 rng(1);
  const Matrix a = RandomMatrix(rng, 3, 4), b = RandomMatrix(rng, 4, 2);
  const Matrix ab = MatMul(a, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(ab(i, j), s, 1e-14);
    }
  }
  const Matrix tb = MatMulTransB(a, Transpose(b));
  const Matrix ta = MatMulTransA(Transpose(a), b);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_NEAR(tb.data()[i], ab.data()[i], 1e-14);
    EXPECT_NEAR(ta.data()[i], ab.data()[i], 1e-14);
  }
  EXPECT_THROW(MatMul(a, a), ShapeError);
}

TEST(Matrix, RequireFiniteNamesTheCulprit) {
  Matrix m(1, 2);
  m(0, 1) = NAN;
  try {
    RequireFinite(m, "logits");
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("logits"), std::string::npos);
  }
}

TEST(Dense, ZeroAndIdentityWeights) {
  std::mt19937_64 rng(2);
  const Matrix x = RandomMatrix(rng, 2, 3);
  EXPECT_EQ(DenseForward(x, Matrix(3, 3), Matrix(1, 3)), Matrix(2, 3));
  EXPECT_EQ(DenseForward(x, Matrix::Identity(3), Matrix(1, 3)), x);
}

TEST(Dense, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    ParamStore store(seed);
    const Dense layer = Dense::Create(store, "fc", 3, 4);
    const Matrix x = RandomMatrix(rng, 5, 3);
    const Matrix w = RandomMatrix(rng, 5, 4);
    auto loss = [&](const ParamStore& s) {
      return SumSquares(Hadamard(layer.Forward(s, x), w));
    };
    const Matrix y = layer.Forward(store, x);
    Matrix g = Hadamard(Hadamard(y, w), w) * 2.0;
    layer.Backward(store, x, g);
    const auto r = FiniteDiffCheck(loss, store, {.abs_floor = 1e-8});
    EXPECT_LT(r.max_rel_error, 1e-6) << r.worst_param;
  }
}

TEST(Dense, InputGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const Matrix x = RandomMatrix(rng, 2, 3), w = RandomMatrix(rng, 3, 4),
               b = RandomMatrix(rng, 1, 4);
  const Matrix g = RandomMatrix(rng, 2, 4);
  const DenseGrads grads = DenseBackward(x, w, g);
  for (std::size_t i = 0; i < x.size(); ++i) {
    Matrix up = x, down = x;
    up.data()[i] += 1e-5;
    down.data()[i] -= 1e-5;
    const double num =
        (SumSquares(DenseForward(up, w, b) + g) -
         SumSquares(DenseForward(down, w, b) + g)) / 2e-5;
    // d/dx of ||xW + b + g||^2 relates to DenseBackward with 2(xW + b + g).
    const DenseGrads full =
        DenseBackward(x, w, (DenseForward(x, w, b) + g) * 2.0);
    EXPECT_NEAR(full.input.data()[i], num, 1e-6 * std::max(1.0, std::abs(num)));
  }
  EXPECT_EQ(grads.bias, ColumnSums(g));
}

TEST(Activations, HandValues) {
  EXPECT_EQ(Sigmoid(0.0), 0.5);
  const Matrix r = Relu(Matrix{{-2.0, 3.0}});
  EXPECT_EQ(r, (Matrix{{0.0, 3.0}}));
  const Matrix s = SoftmaxRows(Matrix{{0.0, 0.0}});
  EXPECT_EQ(s, (Matrix{{0.5, 0.5}}));
}

TEST(Activations, SoftmaxRowsSumToOneAndSigmoidInRange) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Matrix z = RandomMatrix(rng, 4, 7, 20.0);
    const Matrix p = SoftmaxRows(z);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0;
      for (double v : p.row(r)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
    const Matrix sig = Sigmoid(RandomMatrix(rng, 3, 3, 5.0));
    for (double v : sig.data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

// Elementwise backward passes against central differences of <f(x), g>.
template <typename F, typename B>
double ElementwiseError(F forward, B backward, const Matrix& x,
                        const Matrix& g) {
  const Matrix out = forward(x);
  const Matrix analytic = backward(x, out, g);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Matrix up = x, down = x;
    up.data()[i] += 1e-6;
    down.data()[i] -= 1e-6;
    double fu = 0, fd = 0;
    const Matrix ou = forward(up), od = forward(down);
    for (std::size_t k = 0; k < g.size(); ++k) {
      fu += ou.data()[k] * g.data()[k];
      fd += od.data()[k] * g.data()[k];
    }
    const double num = (fu - fd) / 2e-6;
    const double a = analytic.data()[i];
    worst = std::max(worst, std::abs(a - num) /
                                std::max({std::abs(a), std::abs(num), 1e-3}));
  }
  return worst;
}

TEST(Activations, BackwardPassesMatchFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Matrix x = RandomMatrix(rng, 3, 5, 2.0);
    // Keep ReLU inputs away from the kink.
    for (double& v : x.data()) {
      if (std::abs(v) < 1e-3) v = 0.5;
    }
    const Matrix g = RandomMatrix(rng, 3, 5);
    EXPECT_LT(ElementwiseError([](const Matrix& a) { return Sigmoid(a); },
                               [](const Matrix&, const Matrix& o,
                                  const Matrix& gr) {
                                 return SigmoidBackward(o, gr);
                               },
                               x, g),
              1e-6);
    EXPECT_LT(ElementwiseError([](const Matrix& a) { return Relu(a); },
                               [](const Matrix& a, const Matrix&,
                                  const Matrix& gr) {
                                 return ReluBackward(a, gr);
                               },
                               x, g),
              1e-6);
    EXPECT_LT(ElementwiseError([](const Matrix& a) { return SoftmaxRows(a); },
                               [](const Matrix&, const Matrix& o,
                                  const Matrix& gr) {
                                 return SoftmaxRowsBackward(o, gr);
                               },
                               x, g),
              1e-6);
  }
}

TEST(Bce, ClosedForm) {
  const LossValue l = Bce(Matrix{{0.5}}, Matrix{{0.5}});
  EXPECT_NEAR(l.value, std::log(2.0), 1e-15);
  const LossValue k = Bce(Matrix{{0.2, 0.9}}, Matrix{{1.0, 0.0}});
  EXPECT_NEAR(k.value, -(std::log(0.2) + std::log(0.1)) / 2, 1e-15);
}

TEST(Bce, MinimumAtTarget) {
  for (double t : {0.1, 0.3, 0.77}) {
    const double at = Bce(Matrix{{t}}, Matrix{{t}}).value;
    for (double d : {-1e-3, 1e-3, 0.05, -0.05}) {
      EXPECT_GT(Bce(Matrix{{t + d}}, Matrix{{t}}).value, at);
    }
  }
}

TEST(Bce, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix p = RandomProbs(rng, 3, 4), t = RandomProbs(rng, 3, 4);
    const LossValue l = Bce(p, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
      Matrix up = p, down = p;
      up.data()[i] += 1e-7;
      down.data()[i] -= 1e-7;
      const double num = (Bce(up, t).value - Bce(down, t).value) / 2e-7;
      EXPECT_NEAR(l.grad.data()[i], num, 1e-6 * std::abs(num) + 1e-9);
    }
  }
}

TEST(Bce, RejectsTargetsOutsideUnitInterval) {
  EXPECT_THROW(Bce(Matrix{{0.5}}, Matrix{{1.5}}), ContractError);
  EXPECT_THROW(Bce(Matrix{{0.5}}, Matrix{{-0.1}}), ContractError);
}

TEST(Bce, ClampKeepsLossFinite) {
  const LossValue l = Bce(Matrix{{0.0, 1.0}}, Matrix{{1.0, 0.0}});
  EXPECT_TRUE(std::isfinite(l.value));
  EXPECT_NEAR(l.value, -std::log(1e-12), 1e-4);
  EXPECT_EQ(l.grad, Matrix(1, 2));
}

TEST(CeSoftmax, GradientMatchesFiniteDifferences) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix z = RandomMatrix(rng, 3, 4);
    Matrix t(3, 4);
    for (std::size_t r = 0; r < 3; ++r) t(r, rng() % 4) = 1.0;
    const LossValue l = CeSoftmax(z, t);
    for (std::size_t i = 0; i < z.size(); ++i) {
      Matrix up = z, down = z;
      up.data()[i] += 1e-6;
      down.data()[i] -= 1e-6;
      const double num = (CeSoftmax(up, t).value - CeSoftmax(down, t).value) / 2e-6;
      EXPECT_NEAR(l.grad.data()[i], num, 1e-7);
    }
  }
}

TEST(Sgd, ZeroGradientLeavesParameters) {
  ParamStore store(5);
  store.AddGlorot("w", 3, 3);
  const Matrix before = store.value("w");
  SgdStep(store, 0.1);
  EXPECT_EQ(store.value("w"), before);
}

TEST(Sgd, ScalarQuadraticConverges) {
  ParamStore store;
  store.Add("w", Matrix{{0.0}});
  for (int i = 0; i < 200; ++i) {
    store.mutable_grad("w")(0, 0) = store.value("w")(0, 0) - 1.0;
    SgdStep(store, 0.1);
  }
  EXPECT_LT(std::abs(store.value("w")(0, 0) - 1.0), 1e-6);
  EXPECT_EQ(store.grad("w")(0, 0), 0.0);
}

TEST(Sgd, NonFiniteGradientThrowsBeforeUpdating) {
  ParamStore store;
  store.Add("a", Matrix{{1.0}});
  store.Add("b", Matrix{{2.0}});
  store.mutable_grad("a")(0, 0) = 1.0;
  store.mutable_grad("b")(0, 0) = INFINITY;
  EXPECT_THROW(SgdStep(store, 0.1), NumericError);
  EXPECT_EQ(store.value("a")(0, 0), 1.0);
}

TEST(Adam, FirstStepBiasCorrection) {
  ParamStore store;
  store.Add("w", Matrix{{0.3, -0.2}});
  store.mutable_grad("w") = Matrix{{0.5, -2.0}};
  Adam adam({.lr = 0.01});
  adam.Step(store);
  EXPECT_EQ(adam.BiasCorrectedFirstMoment("w"), (Matrix{{0.5, -2.0}}));
  // m_hat / sqrt(v_hat) = sign(g) at t = 1, so each weight moves by ~lr.
  EXPECT_NEAR(store.value("w")(0, 0), 0.3 - 0.01, 1e-9);
  EXPECT_NEAR(store.value("w")(0, 1), -0.2 + 0.01, 1e-9);
}

TEST(Adam, ConvergesOnQuadratic) {
  ParamStore store;
  store.Add("w", Matrix{{5.0, -3.0}});
  Adam adam({.lr = 0.05});
  for (int i = 0; i < 2000; ++i) {
    store.mutable_grad("w") = store.value("w");
    adam.Step(store);
  }
  EXPECT_LT(std::abs(store.value("w")(0, 0)), 1e-3);
  EXPECT_LT(std::abs(store.value("w")(0, 1)), 1e-3);
}

TEST(ParamStore, SeedDeterminesInitialization) {
  ParamStore a(42), b(42), c(43);
  for (ParamStore* s : {&a, &b, &c}) {
    s->AddGlorot("x", 4, 5);
    s->AddZeros("y", 1, 5);
  }
  EXPECT_EQ(a.Checksum(), b.Checksum());
  EXPECT_NE(a.Checksum(), c.Checksum());
  const double bound = std::sqrt(6.0 / 9.0);
  for (double v : a.value("x").data()) EXPECT_LE(std::abs(v), bound);
  EXPECT_THROW(a.AddZeros("x", 1, 1), Error);
}

TEST(GradCheck, QuadraticIsExact) {
  ParamStore store;
  store.Add("w", Matrix{{0.4, -1.2, 2.0}});
  auto loss = [](const ParamStore& s) {
    const Matrix& w = s.value("w");
    return 0.5 * w(0, 0) * w(0, 0) + w(0, 1) * w(0, 1) + 3.0 * w(0, 2) * w(0, 0);
  };
  const Matrix& w = store.value("w");
  store.mutable_grad("w") =
      Matrix{{w(0, 0) + 3.0 * w(0, 2), 2.0 * w(0, 1), 3.0 * w(0, 0)}};
  const Matrix saved = w;
  EXPECT_LT(FiniteDiffCheck(loss, store).max_rel_error, 1e-9);
  EXPECT_EQ(store.value("w"), saved);
}

TEST(GradCheck, CorruptedGradientFails) {
  ParamStore store;
  store.Add("w", Matrix{{0.4, -0.2, 2.0}});
  auto loss = [](const ParamStore& s) { return SumSquares(s.value("w")); };
  store.mutable_grad("w") = store.value("w") * 2.0;
  store.mutable_grad("w")(0, 1) += 1.0;
  const auto r = FiniteDiffCheck(loss, store);
  EXPECT_GE(r.max_rel_error, 0.5);
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(GradCheck, SubsamplesLargeStores) {
  ParamStore store(1);
  store.AddGlorot("w", 120, 100);
  auto loss = [](const ParamStore& s) { return 0.5 * SumSquares(s.value("w")); };
  store.mutable_grad("w") = store.value("w");
  const auto r = FiniteDiffCheck(loss, store, {.max_coords = 500});
  EXPECT_EQ(r.coords_checked, 500u);
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  testing::TempDir dir("ckpt");
  ParamStore store(9);
  store.AddGlorot("a.w", 3, 4);
  store.AddGlorot("a.b", 1, 4);
  SaveCheckpoint(store, dir.file("m.ckpt"));
  const ParamStore back = LoadCheckpoint(dir.file("m.ckpt"));
  EXPECT_EQ(back.Checksum(), store.Checksum());
  EXPECT_EQ(back.seed(), 9u);
  ParamStore target(0);
  target.AddZeros("a.w", 3, 4);
  target.AddZeros("a.b", 1, 4);
  CopyValues(back, target);
  EXPECT_EQ(target.value("a.w"), store.value("a.w"));
}

TEST(Checkpoint, RejectsMismatchAndCorruption) {
  ParamStore store(9);
  store.AddGlorot("a.w", 3, 4);
  std::string bytes = SerializeCheckpoint(store);
  EXPECT_THROW(DeserializeCheckpoint(bytes + "x"), ParseError);
  EXPECT_THROW(DeserializeCheckpoint(bytes.substr(0, 20)), ParseError);
  ParamStore other;
  other.AddZeros("a.w", 4, 3);
  EXPECT_THROW(CopyValues(store, other), ContractError);
  ParamStore missing;
  missing.AddZeros("z", 1, 1);
  EXPECT_THROW(CopyValues(store, missing), ContractError);
}

}  // namespace
}  // namespace acp::nn
