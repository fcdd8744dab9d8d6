/*
 * Copyright 2026 The Sesnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sesnet/common/errors.h"
#include "sesnet/ndcore/adam.h"
#include "sesnet/ndcore/grad_check.h"
#include "sesnet/ndcore/ops.h"
#include "sesnet/ndcore/tape.h"
#include "sesnet/ndcore/tensor.h"

namespace sesnet::nd {
namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = u(rng);
  return t;
}

// Sum of out * w for a fixed random w, so every output coordinate receives a
// distinct upstream gradient.
Var weighted_sum(Tape& tape, Var out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sum(mul(out, tape.constant(random_tensor(out.shape(), rng))));
}

double max_error(const std::function<Var(Tape&)>& f, std::vector<Parameter*> params) {
  return grad_check(f, params, 1e-6).max_relative_error;
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor(Shape{}), ShapeError);
  EXPECT_THROW(Tensor(Shape{2, 0}), ShapeError);
  EXPECT_THROW(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
  EXPECT_THROW(t.reshaped({4}), ShapeError);
}

TEST(Ops, MatmulMatchesNestedLoops) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor({3, 4}, rng), b = random_tensor({4, 5}, rng);
  Tape tape;
  const Tensor& c = matmul(tape.constant(a), tape.constant(b)).value();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), acc, 1e-14);
    }
  }
  EXPECT_THROW(matmul(tape.constant(a), tape.constant(a)), ShapeError);
}

TEST(Ops, Conv1dMatchesNestedLoops) {
  std::mt19937_64 rng(5);
  const std::size_t batch = 2, cin = 3, len = 9, cout = 4, k = 3;
  const Tensor x = random_tensor({batch, cin, len}, rng);
  const Tensor w = random_tensor({cout, cin, k}, rng);
  const Tensor b = random_tensor({cout}, rng);
  Tape tape;
  const Tensor& y = conv1d(tape.constant(x), tape.constant(w), tape.constant(b)).value();
  ASSERT_EQ(y.shape(), (Shape{batch, cout, len - k + 1}));
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t t = 0; t + k <= len; ++t) {
        double acc = b[o];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t j = 0; j < k; ++j) {
            acc += w[(o * cin + c) * k + j] * x[(n * cin + c) * len + t + j];
          }
        }
        EXPECT_NEAR(y[(n * cout + o) * (len - k + 1) + t], acc, 1e-14);
      }
    }
  }
  Tape t2;
  EXPECT_THROW(conv1d(t2.constant(random_tensor({1, 1, 2}, rng)),
                      t2.constant(random_tensor({1, 1, 3}, rng)),
                      t2.constant(random_tensor({1}, rng))),
               ShapeError);
}

class OpGradients : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(OpGradients, EveryPrimitiveMatchesFiniteDifferences) {
  const std::uint64_t seed = GetParam();
  std::mt19937_64 rng(seed);
  Parameter a("a", random_tensor({3, 4}, rng));
  Parameter b("b", random_tensor({3, 4}, rng));
  Parameter m("m", random_tensor({4, 2}, rng));
  Parameter bias("bias", random_tensor({1, 4}, rng));
  Parameter table("table", random_tensor({5, 3}, rng));
  Parameter x("x", random_tensor({2, 2, 7}, rng));
  Parameter kern("kern", random_tensor({3, 2, 3}, rng));
  Parameter kb("kb", random_tensor({3}, rng));
  Parameter probs("probs", random_tensor({4, 1}, rng, 0.05, 0.95));

  const double tol = 1e-4;
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, matmul(t.leaf(a), t.leaf(m)), 1); },
                      {&a, &m}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, add(t.leaf(a), t.leaf(b)), 2); },
                      {&a, &b}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, sub(t.leaf(a), t.leaf(b)), 3); },
                      {&a, &b}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, mul(t.leaf(a), t.leaf(b)), 4); },
                      {&a, &b}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, add_bias(t.leaf(a), t.leaf(bias)), 5); },
                      {&a, &bias}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, scale(t.leaf(a), -2.5), 6); }, {&a}),
            tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, sigmoid(t.leaf(a)), 7); }, {&a}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, nd::tanh(t.leaf(a)), 8); }, {&a}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return mean(mul(t.leaf(a), t.leaf(a))); }, {&a}), tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, slice_cols(t.leaf(a), 1, 3), 9); },
                      {&a}), tol);
  EXPECT_LT(max_error(
                [&](Tape& t) {
                  std::vector<Var> parts = {t.leaf(a), t.leaf(b)};
                  return weighted_sum(t, concat_cols(parts), 10);
                },
                {&a, &b}),
            tol);
  EXPECT_LT(max_error(
                [&](Tape& t) {
                  const std::vector<int> idx = {4, 0, 4, 2};
                  return weighted_sum(t, gather_rows(t.leaf(table), idx), 11);
                },
                {&table}),
            tol);
  EXPECT_LT(max_error(
                [&](Tape& t) {
                  return weighted_sum(t, conv1d(t.leaf(x), t.leaf(kern), t.leaf(kb)), 12);
                },
                {&x, &kern, &kb}),
            tol);
  EXPECT_LT(max_error([&](Tape& t) { return weighted_sum(t, reshape(t.leaf(x), {4, 7}), 13); },
                      {&x}), tol);
  EXPECT_LT(max_error(
                [&](Tape& t) {
                  const std::vector<double> y = {1, 0, 0, 1};
                  return bce_loss(t.leaf(probs), y);
                },
                {&probs}),
            tol);
}

INSTANTIATE_TEST_SUITE_P(TenSeeds, OpGradients, ::testing::Range<std::uint64_t>(1, 11));

TEST(Tape, BackwardRunsOncePerTape) {
  Parameter p("p", Tensor({1}, 2.0));
  Tape tape;
  Var loss = sum(mul(tape.leaf(p), tape.leaf(p)));
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(p.grad[0], 4.0);
  EXPECT_THROW(tape.backward(loss), ValidationError);
}

TEST(Tape, RejectsNonScalarLoss) {
  Parameter p("p", Tensor({2}, 1.0));
  Tape tape;
  EXPECT_THROW(tape.backward(scale(tape.leaf(p), 2.0)), ShapeError);
}

TEST(Tape, NonFiniteValueNamesTheOperation) {
  Tape tape;
  Var big = tape.constant(Tensor({1, 1}, 1e308));
  try {
    scale(big, 10.0);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos) << e.what();
  }
}

TEST(Tape, FrozenParametersGetNoGradient) {
  Parameter live("live", Tensor({1, 2}, 1.0));
  Parameter frozen("frozen", Tensor({1, 2}, 3.0), false);
  Tape tape;
  tape.backward(sum(mul(tape.leaf(live), tape.leaf(frozen))));
  EXPECT_DOUBLE_EQ(live.grad[0], 3.0);
  EXPECT_TRUE(frozen.grad.empty() || frozen.grad[0] == 0.0);
  const auto result =
      grad_check([&](Tape& t) { return sum(mul(t.leaf(live), t.leaf(frozen))); },
                 std::vector<Parameter*>{&live, &frozen}, 1e-6);
  EXPECT_EQ(result.per_parameter.count("frozen"), 0u);
}

TEST(Ops, BceClampsSaturatedProbabilities) {
  Parameter p("p", Tensor({2, 1}, std::vector<double>{0.0, 1.0}));
  Tape tape;
  const std::vector<double> y = {1, 0};
  Var loss = bce_loss(tape.leaf(p), y);
  EXPECT_TRUE(std::isfinite(loss.value()[0]));
  EXPECT_NEAR(loss.value()[0], -std::log(kProbabilityClamp), 1e-9);
  tape.backward(loss);
  EXPECT_TRUE(p.grad.all_finite());
  const std::vector<double> bad = {0.5, 1};
  Tape t2;
  EXPECT_THROW(bce_loss(t2.leaf(p), bad), ValidationError);
}

TEST(Ops, GatherRejectsOutOfRangeIndex) {
  Parameter table("t", Tensor({3, 2}, 0.0));
  Tape tape;
  const std::vector<int> idx = {3};
  EXPECT_THROW(gather_rows(tape.leaf(table), idx), ValidationError);
}

TEST(Adam, FirstStepMovesByLearningRateAgainstTheGradient) {
  // With bias correction m_hat = g and v_hat = g^2 after one step.
  Tensor param({3}, std::vector<double>{1.0, -2.0, 0.5});
  const Tensor grad({3}, std::vector<double>{0.3, -4.0, 1e-3});
  AdamState state;
  AdamHyper hyper;
  hyper.lr = 0.01;
  adam_step(param, grad, state, hyper);
  for (std::size_t i = 0; i < 3; ++i) {
    const double g = grad[i];
    const double expected = std::vector<double>{1.0, -2.0, 0.5}[i] -
                            hyper.lr * g / (std::abs(g) + hyper.eps);
    EXPECT_NEAR(param[i], expected, 1e-12);
  }
}

TEST(Adam, MinimisesAQuadratic) {
  Parameter p("p", Tensor({1, 2}, std::vector<double>{3.0, -1.0}));
  AdamHyper hyper;
  hyper.lr = 0.05;
  Adam adam({&p}, hyper);
  for (int i = 0; i < 2000; ++i) {
    Tape tape;
    Var d = sub(tape.leaf(p), tape.constant(Tensor({1, 2}, std::vector<double>{0.5, 0.25})));
    tape.backward(sum(mul(d, d)));
    adam.step();
  }
  EXPECT_NEAR(p.value[0], 0.5, 1e-3);
  EXPECT_NEAR(p.value[1], 0.25, 1e-3);
}

}  // namespace
}  // namespace sesnet::nd
