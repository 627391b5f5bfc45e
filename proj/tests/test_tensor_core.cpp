// Copyright 2026 The depthcomp Authors. All Rights Reserved.
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
#include <stdexcept>

#include "depthcomp/autograd.hpp"
#include "depthcomp/gradcheck.hpp"
#include "depthcomp/optim.hpp"
#include "test_util.hpp"

namespace depthcomp {
namespace {

using testing_util::random_tensor;

// Direct-summation convolution used as an oracle.
double conv_at(const Tensor& x, const Tensor& w, int oc, int oy, int ox,
               int stride, int pad) {
  const Shape ws = w.shape();
  double acc = 0.0;
  for (int ic = 0; ic < ws.c; ++ic) {
    for (int ky = 0; ky < ws.h; ++ky) {
      for (int kx = 0; kx < ws.w; ++kx) {
        const int y = oy * stride - pad + ky;
        const int xx = ox * stride - pad + kx;
        if (y < 0 || xx < 0 || y >= x.shape().h || xx >= x.shape().w) continue;
        acc += x.at(0, ic, y, xx) * w.at(oc, ic, ky, kx);
      }
    }
  }
  return acc;
}

double dot(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

TEST(TensorTest, ShapeAndLengthValidation) {
  Tensor t({2, 3, 4, 5});
  EXPECT_EQ(t.size(), 120u);
  EXPECT_THROW(Tensor({1, 1, 2, 2}, std::vector<double>{1, 2, 3}),
               std::invalid_argument);
  EXPECT_THROW(Tensor({1, 1, 2, 2}).item(), std::invalid_argument);
}

TEST(Conv2dTest, CenterOfAllOnesKernelIsReceptiveFieldSum) {
  Graph g;
  Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Var y = conv2d(g.constant(x), g.constant(Tensor({1, 1, 3, 3}, 1.0)), Var(), 1, 1);
  EXPECT_DOUBLE_EQ(y.value().at(0, 0, 1, 1), 45.0);
  EXPECT_DOUBLE_EQ(y.value().at(0, 0, 0, 0), 1 + 2 + 4 + 5);
}

TEST(Conv2dTest, MatchesDirectSummation) {
  std::mt19937_64 rng(3);
  const Tensor x = random_tensor({1, 3, 7, 6}, rng);
  const Tensor w = random_tensor({4, 3, 3, 3}, rng);
  for (int stride : {1, 2}) {
    Graph g;
    const Tensor y = conv2d(g.constant(x), g.constant(w), Var(), stride, 1).value();
    ASSERT_EQ(y.shape(), (Shape{1, 4, (7 + 2 - 3) / stride + 1, (6 + 2 - 3) / stride + 1}));
    for (int oc = 0; oc < 4; ++oc) {
      for (int oy = 0; oy < y.shape().h; ++oy) {
        for (int ox = 0; ox < y.shape().w; ++ox) {
          EXPECT_NEAR(y.at(0, oc, oy, ox), conv_at(x, w, oc, oy, ox, stride, 1), 1e-12);
        }
      }
    }
  }
}

TEST(Conv2dTest, CenteredDeltaIsIdentity) {
  std::mt19937_64 rng(4);
  const Tensor x = random_tensor({2, 1, 5, 6}, rng);
  Tensor w({1, 1, 5, 5});
  w.at(0, 0, 2, 2) = 1.0;
  Graph g;
  const Tensor y =
      conv2d(g.constant(x), g.constant(w), g.constant(Tensor({1, 1, 1, 1})), 1, 2).value();
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y[i], x[i]);
}

TEST(Conv2dTest, ZeroInputGivesZeroOutput) {
  std::mt19937_64 rng(5);
  Graph g;
  const Tensor y = conv2d(g.constant(Tensor({1, 2, 4, 4})),
                          g.constant(random_tensor({3, 2, 3, 3}, rng)), Var(), 1, 1)
                       .value();
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv2dTest, RejectsChannelMismatchNamingShapes) {
  Graph g;
  try {
    conv2d(g.constant(Tensor({1, 2, 4, 4})), g.constant(Tensor({3, 5, 3, 3})), Var(), 1, 1);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(1, 2, 4, 4)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(3, 5, 3, 3)"), std::string::npos) << msg;
  }
  EXPECT_THROW(conv2d(g.constant(Tensor({1, 1, 4, 4})), g.constant(Tensor({1, 1, 3, 3})),
                      Var(), 3, 1),
               std::invalid_argument);
}

TEST(ConvTranspose2dTest, IsAdjointOfConv) {
  std::mt19937_64 rng(6);
  for (int stride : {1, 2}) {
    const Tensor w = random_tensor({3, 2, 3, 3}, rng);  // conv: 2 -> 3 channels
    const Tensor y = random_tensor({1, 2, 8, 6}, rng);
    Graph g;
    const Tensor cy = conv2d(g.constant(y), g.constant(w), Var(), stride, 1).value();
    const Tensor x = random_tensor(cy.shape(), rng);
    // The transpose weight layout is (in_c, out_c, kh, kw), which is the
    // conv weight read as-is.
    const Tensor tx = conv_transpose2d(g.constant(x), g.constant(w), Var(), stride, 1).value();
    ASSERT_EQ(tx.shape().h, (cy.shape().h - 1) * stride - 2 + 3);
    if (tx.shape() == y.shape()) {
      const double lhs = dot(tx, y), rhs = dot(x, cy);
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST(ConvTranspose2dTest, AdjointWithOddSizes) {
  std::mt19937_64 rng(7);
  const Tensor w = random_tensor({2, 3, 3, 3}, rng);
  const Tensor y = random_tensor({1, 3, 7, 9}, rng);
  Graph g;
  const Tensor cy = conv2d(g.constant(y), g.constant(w), Var(), 1, 1).value();
  const Tensor x = random_tensor(cy.shape(), rng);
  const Tensor tx = conv_transpose2d(g.constant(x), g.constant(w), Var(), 1, 1).value();
  ASSERT_EQ(tx.shape(), y.shape());
  EXPECT_LE(std::abs(dot(tx, y) - dot(x, cy)), 1e-10 * std::abs(dot(x, cy)));
}

TEST(ConvTranspose2dTest, ScalarCaseAndZeros) {
  Graph g;
  const Tensor y = conv_transpose2d(g.constant(Tensor::scalar(3.0)),
                                    g.constant(Tensor::scalar(-2.0)), Var(), 1, 0)
                       .value();
  EXPECT_DOUBLE_EQ(y.item(), -6.0);
  std::mt19937_64 rng(8);
  const Tensor z = conv_transpose2d(g.constant(Tensor({1, 2, 3, 3})),
                                    g.constant(random_tensor({2, 4, 3, 3}, rng)), Var(), 2, 1, 1)
                       .value();
  EXPECT_EQ(z.shape(), (Shape{1, 4, 6, 6}));
  for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST(ReluTest, ForwardAndMask) {
  Graph g;
  Var x = g.input(Tensor({1, 1, 1, 3}, {-1.0, 0.0, 2.0}));
  Var y = relu(x);
  EXPECT_EQ(y.value().vec(), (std::vector<double>{0.0, 0.0, 2.0}));
  g.backward(sum(y));
  EXPECT_EQ(g.grad(x).vec(), (std::vector<double>{0.0, 0.0, 1.0}));
}

TEST(ReluTest, AllNegativeGivesZeroGradient) {
  Graph g;
  Var x = g.input(Tensor({1, 1, 2, 2}, -3.0));
  Var y = relu(x);
  g.backward(sum(y));
  for (double v : y.value().data()) EXPECT_EQ(v, 0.0);
  for (double v : g.grad(x).data()) EXPECT_EQ(v, 0.0);
}

TEST(ConcatTest, ShapesSliceAndGradient) {
  std::mt19937_64 rng(9);
  const Tensor a = random_tensor({1, 2, 4, 4}, rng);
  const Tensor b = random_tensor({1, 3, 4, 4}, rng);
  Graph g;
  Var va = g.input(a), vb = g.input(b);
  Var c = concat_channels(va, vb);
  EXPECT_EQ(c.shape(), (Shape{1, 5, 4, 4}));
  EXPECT_EQ(slice_channels(c, 0, 2).value().vec(), a.vec());
  EXPECT_EQ(slice_channels(c, 2, 3).value().vec(), b.vec());
  EXPECT_THROW(concat_channels(va, g.constant(Tensor({1, 1, 3, 4}))), std::invalid_argument);
  g.backward(sum(c));
  for (double v : g.grad(va).data()) EXPECT_EQ(v, 1.0);
  for (double v : g.grad(vb).data()) EXPECT_EQ(v, 1.0);
}

TEST(UpsampleTest, ReplicatesBlocks) {
  Graph g;
  const Tensor y = upsample_nearest2x(g.constant(Tensor({1, 1, 2, 2}, {1, 2, 3, 4}))).value();
  ASSERT_EQ(y.shape(), (Shape{1, 1, 4, 4}));
  const std::vector<double> expect = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
  EXPECT_EQ(y.vec(), expect);
  double s = 0;
  for (double v : y.data()) s += v;
  EXPECT_DOUBLE_EQ(s, 4 * 10.0);
}

TEST(PowerPenaltyTest, Values) {
  Graph g;
  EXPECT_DOUBLE_EQ(
      power_penalty(g.constant(Tensor({1, 1, 1, 2}, {3.0, -4.0})), 1).value().item(), 7.0);
  EXPECT_DOUBLE_EQ(
      power_penalty(g.constant(Tensor({1, 1, 1, 2}, {3.0, 4.0})), 2).value().item(), 25.0);
  const Tensor mask({1, 1, 1, 2}, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(
      power_penalty(g.constant(Tensor({1, 1, 1, 2}, {3.0, 4.0})), 2, &mask).value().item(),
      16.0);
  EXPECT_THROW(power_penalty(g.constant(Tensor::scalar(1.0)), 3), std::invalid_argument);
}

TEST(PowerPenaltyTest, L1SubgradientAtZeroIsZero) {
  Graph g;
  Var x = g.input(Tensor({1, 1, 1, 3}, {0.0, 2.0, -1.0}));
  g.backward(power_penalty(x, 1));
  EXPECT_EQ(g.grad(x).vec(), (std::vector<double>{0.0, 1.0, -1.0}));
}

TEST(PowerPenaltyTest, CauchySchwarzBound) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor({1, 1, 3, 5}, rng);
    Graph g;
    const double l1 = power_penalty(g.constant(x), 1).value().item();
    const double l2 = power_penalty(g.constant(x), 2).value().item();
    EXPECT_LE(l1, std::sqrt(15.0 * l2) + 1e-12);
  }
}

TEST(BackwardTest, ChainRuleExample) {
  Graph g;
  Var x = g.input(Tensor::scalar(1.0));
  g.backward(power_penalty(scale(x, 2.0), 2));
  EXPECT_DOUBLE_EQ(g.grad(x).item(), 8.0);
}

TEST(BackwardTest, IndependentInputHasZeroGradient) {
  Graph g;
  Var x = g.input(Tensor({1, 1, 2, 2}, 1.0));
  Var y = g.input(Tensor::scalar(2.0));
  g.backward(power_penalty(y, 2));
  for (double v : g.grad(x).data()) EXPECT_EQ(v, 0.0);
}

TEST(BackwardTest, RejectsNonScalarAndSecondCall) {
  Graph g;
  Var x = g.input(Tensor({1, 1, 2, 2}, 1.0));
  EXPECT_THROW(g.backward(relu(x)), std::invalid_argument);
  Var l = sum(x);
  g.backward(l);
  EXPECT_THROW(g.backward(l), std::logic_error);
}

TEST(BackwardTest, ParameterGradientsAccumulate) {
  Parameter p{"w", Tensor::scalar(3.0), {}};
  Graph g;
  Var w = g.parameter(p);
  g.backward(add(mul(w, w), w));
  EXPECT_DOUBLE_EQ(p.grad.item(), 7.0);
}

TEST(ForwardTest, OpsArePure) {
  std::mt19937_64 rng(11);
  const Tensor x = random_tensor({1, 2, 6, 6}, rng);
  const Tensor w = random_tensor({3, 2, 3, 3}, rng);
  auto run = [&] {
    Graph g;
    return relu(conv2d(g.constant(x), g.constant(w), Var(), 2, 1)).value().vec();
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  Parameter p{"w", Tensor({1, 1, 1, 3}, {1.0, -2.0, 0.5}), {}};
  p.grad = Tensor({1, 1, 1, 3}, {0.3, -7.0, 1e-3});
  std::vector<Parameter*> ps{&p};
  AdamState st = make_adam_state(ps, 0.01);
  adam_step(ps, st);
  // m_hat / sqrt(v_hat) = g / |g| on the first step.
  EXPECT_NEAR(p.value[0], 1.0 - 0.01, 1e-3 * 0.01);
  EXPECT_NEAR(p.value[1], -2.0 + 0.01, 1e-3 * 0.01);
  EXPECT_NEAR(p.value[2], 0.5 - 0.01, 1e-3 * 0.01);
  EXPECT_EQ(st.t, 1);
  EXPECT_FALSE(p.has_grad());
}

TEST(AdamTest, ZeroGradientLeavesParametersAndRejectsMissing) {
  Parameter p{"w", Tensor({1, 1, 1, 2}, {1.0, 2.0}), {}};
  std::vector<Parameter*> ps{&p};
  AdamState st = make_adam_state(ps, 0.1);
  EXPECT_THROW(adam_step(ps, st), std::invalid_argument);
  p.grad = Tensor({1, 1, 1, 2});
  adam_step(ps, st);
  EXPECT_EQ(p.value.vec(), (std::vector<double>{1.0, 2.0}));
}

TEST(AdamTest, HalvingSchedule) {
  const LrSchedule s{1e-4, 50000};
  EXPECT_DOUBLE_EQ(s.at(0), 1e-4);
  EXPECT_DOUBLE_EQ(s.at(49999), 1e-4);
  EXPECT_DOUBLE_EQ(s.at(50000), 5e-5);
  EXPECT_DOUBLE_EQ(s.at(150000), 1.25e-5);
}

TEST(GradCheckTest, LinearFunctionIsExact) {
  std::mt19937_64 rng(12);
  const Tensor c = random_tensor({1, 1, 3, 3}, rng);
  const double err = grad_check(
      [&](Graph& g, const std::vector<Var>& in) { return sum(mul(in[0], g.constant(c))); },
      {random_tensor({1, 1, 3, 3}, rng)});
  EXPECT_LE(err, 1e-9);
}

TEST(GradCheckTest, ConvReluPenaltyComposite) {
  std::mt19937_64 rng(13);
  const double err = grad_check(
      [](Graph&, const std::vector<Var>& in) {
        return power_penalty(relu(conv2d(in[0], in[1], in[2], 1, 1)), 2);
      },
      {random_tensor({1, 2, 5, 5}, rng), random_tensor({3, 2, 3, 3}, rng),
       random_tensor({1, 3, 1, 1}, rng)});
  EXPECT_LE(err, 1e-4);
}

TEST(GradCheckTest, RejectsZeroEpsilon) {
  EXPECT_THROW(grad_check([](Graph&, const std::vector<Var>& in) { return sum(in[0]); },
                          {Tensor::scalar(1.0)}, 0.0),
               std::invalid_argument);
}

}  // namespace
}  // namespace depthcomp
