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

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "depthcomp/gradcheck.hpp"
#include "depthcomp/networks.hpp"
#include "test_util.hpp"

namespace depthcomp {
namespace {

using testing_util::jitter_biases;
using testing_util::random_tensor;

std::int64_t layer_weights(const std::vector<LayerInfo>& layers,
                           const std::string& name) {
  for (const auto& l : layers) {
    if (l.name == name) return l.weight_count();
  }
  ADD_FAILURE() << "no layer " << name;
  return -1;
}

// Two-stage DCN small enough for an all-parameter finite-difference check.
DcnConfig toy_dcn() {
  DcnConfig cfg;
  cfg.depth = {{4, 8}, 0.25, 1, {1, 2}, BlockKind::resnet_block};
  cfg.image = {{4, 8}, 0.75, 3, {1, 2}, BlockKind::resnet_block};
  return cfg;
}

Tensor positive_depth(Shape s, std::mt19937_64& rng) {
  return random_tensor(s, rng, 2.0, 40.0);
}

TEST(ParameterCountTest, FusedSecondLayer) {
  const auto fused = dcn_fused_layout(dcn_preset("full"));
  EXPECT_EQ(layer_weights(fused, "enc_f.1.down"), 73728);
  EXPECT_EQ(conv_weight_count(3, 64, 128), 73728);
}

TEST(ParameterCountTest, TwoBranchSecondLayer) {
  const auto two = dcn_layout(dcn_preset("full"));
  const auto d = layer_weights(two, "enc_d.1.down");
  const auto i = layer_weights(two, "enc_i.1.down");
  EXPECT_EQ(d, 4608);
  EXPECT_EQ(i, 41472);
  EXPECT_EQ(d + i, 46080);
}

TEST(ParameterCountTest, FullModelNearReportedSizeAndBelowFused) {
  const DcnConfig cfg = dcn_preset("full");
  const auto two = count_parameters(dcn_layout(cfg)).total;
  const auto fused = count_parameters(dcn_fused_layout(cfg)).total;
  EXPECT_GE(two, 0.8 * 18.8e6);
  EXPECT_LE(two, 1.2 * 18.8e6);
  EXPECT_LT(two, fused);
}

TEST(ParameterCountTest, LateFusionIsCheaperAtEveryStage) {
  const DcnConfig cfg = dcn_preset("full");
  const auto two = dcn_layout(cfg);
  const auto fused = dcn_fused_layout(cfg);
  for (int s = 0; s < cfg.depth.num_stages(); ++s) {
    std::int64_t a = 0, b = 0;
    const std::string st = "." + std::to_string(s) + ".";
    for (const auto& l : two) {
      if (l.name.rfind("enc_", 0) == 0 && l.name.find(st) != std::string::npos) {
        a += l.weight_count();
      }
    }
    for (const auto& l : fused) {
      if (l.name.rfind("enc_f", 0) == 0 && l.name.find(st) != std::string::npos) {
        b += l.weight_count();
      }
    }
    EXPECT_LT(a, b) << "stage " << s;
  }
}

TEST(ParameterCountTest, EmptyAndBias) {
  EXPECT_EQ(count_parameters(std::vector<LayerInfo>{}).total, 0);
  const std::vector<LayerInfo> one{{"l", LayerKind::conv, 2, 3, 3, 1, true}};
  EXPECT_EQ(count_parameters(one).total, 54);
  EXPECT_EQ(count_parameters(one, true).total, 57);
}

TEST(ParameterCountTest, ModelReportMatchesTensors) {
  const DcnModel m(dcn_preset("tiny"), 1);
  std::int64_t n = 0;
  for (const auto& p : m.params()) n += static_cast<std::int64_t>(p.value.size());
  EXPECT_EQ(m.parameter_count(true).total, n);
}

TEST(EncoderSpecTest, RejectsZeroWidthAndBadStride) {
  EncoderSpec s{{1, 2}, 0.25, 1, {}, BlockKind::plain_conv};
  EXPECT_THROW(s.channels(), std::invalid_argument);
  EncoderSpec t{{8}, 1.0, 1, {3}, BlockKind::plain_conv};
  EXPECT_THROW(t.stride_schedule(), std::invalid_argument);
}

TEST(DcnTest, SameSeedSameParameters) {
  const DcnModel a(dcn_preset("desk"), 7), b(dcn_preset("desk"), 7);
  ASSERT_EQ(a.params().size(), b.params().size());
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    EXPECT_EQ(a.params()[i].value.vec(), b.params()[i].value.vec());
  }
  const DcnModel c(dcn_preset("desk"), 8);
  EXPECT_NE(a.params()[0].value.vec(), c.params()[0].value.vec());
}

TEST(DcnTest, FullSizeInstantiates) {
  EXPECT_NO_THROW(DcnModel(dcn_preset("full"), 1));
}

TEST(DcnTest, UnsupervisedVariantLayers) {
  const DcnModel plain(dcn_preset("desk", false), 1);
  const DcnModel var(dcn_preset("desk", true), 1);
  EXPECT_EQ(plain.layer("enc_d.0.down").stride, 1);
  EXPECT_EQ(plain.layer("enc_i.0.down").stride, 1);
  EXPECT_EQ(var.layer("enc_d.0.down").stride, 2);
  EXPECT_EQ(var.layer("enc_i.0.down").stride, 2);
  EXPECT_NE(plain.layers().back().kind, LayerKind::upsample_nearest);
  EXPECT_EQ(var.layers().back().kind, LayerKind::upsample_nearest);

  std::mt19937_64 rng(2);
  const Tensor z = positive_depth({1, 1, 32, 96}, rng);
  const Tensor img = random_tensor({1, 3, 32, 96}, rng, 0.0, 1.0);
  Graph g;
  EXPECT_EQ(var.forward(g, g.constant(z), g.constant(img)).shape(), z.shape());
}

TEST(DcnTest, OutputShapePositiveAndNotConstant) {
  const DcnModel m(dcn_preset("desk"), 3);
  std::mt19937_64 rng(4);
  const Tensor img = random_tensor({1, 3, 64, 192}, rng, 0.0, 1.0);
  Tensor z1({1, 1, 64, 192}), z2({1, 1, 64, 192});
  for (int i = 0; i < 600; ++i) {
    z1[rng() % z1.size()] = 5.0 + (rng() % 500) / 10.0;
    z2[rng() % z2.size()] = 5.0 + (rng() % 500) / 10.0;
  }
  Graph g;
  const Tensor y1 = m.forward(g, g.constant(z1), g.constant(img)).value();
  const Tensor y2 = m.forward(g, g.constant(z2), g.constant(img)).value();
  EXPECT_EQ(y1.shape(), z1.shape());
  double lo = 1e300;
  for (double v : y1.data()) lo = std::min(lo, v);
  EXPECT_GT(lo, 0.0);
  EXPECT_NE(y1.vec(), y2.vec());
}

TEST(DcnTest, DependsOnBothBranches) {
  const DcnModel m(dcn_preset("tiny"), 5);
  std::mt19937_64 rng(6);
  const Tensor z = positive_depth({1, 1, 32, 96}, rng);
  const Tensor img = random_tensor({1, 3, 32, 96}, rng, 0.0, 1.0);
  const Tensor zero_z({1, 1, 32, 96}), zero_img({1, 3, 32, 96});
  Graph g;
  const auto base = m.forward(g, g.constant(z), g.constant(img)).value().vec();
  EXPECT_NE(base, m.forward(g, g.constant(zero_z), g.constant(img)).value().vec());
  EXPECT_NE(base, m.forward(g, g.constant(z), g.constant(zero_img)).value().vec());
}

TEST(DcnTest, ForwardIsDeterministic) {
  const DcnModel m(dcn_preset("tiny"), 5);
  std::mt19937_64 rng(7);
  const Tensor z = positive_depth({1, 1, 32, 96}, rng);
  const Tensor img = random_tensor({1, 3, 32, 96}, rng, 0.0, 1.0);
  Graph g1, g2;
  EXPECT_EQ(m.forward(g1, g1.constant(z), g1.constant(img)).value().vec(),
            m.forward(g2, g2.constant(z), g2.constant(img)).value().vec());
}

TEST(DcnTest, RejectsMisalignedInputs) {
  const DcnModel m(dcn_preset("tiny"), 5);
  Graph g;
  EXPECT_THROW(m.forward(g, g.constant(Tensor({1, 1, 32, 96})),
                         g.constant(Tensor({1, 3, 32, 64}))),
               std::invalid_argument);
}

TEST(DcnTest, GradientCheckAllParameters) {
  DcnModel m(toy_dcn(), 11);
  jitter_biases(m.params(), 1);
  std::mt19937_64 rng(12);
  const Tensor z = positive_depth({1, 1, 8, 8}, rng);
  const Tensor img = random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
  const Tensor target = positive_depth({1, 1, 8, 8}, rng);
  const double err = grad_check_params(
      [&](Graph& g) {
        Var d = m.forward(g, g.constant(z), g.constant(img), true);
        return power_penalty(sub(d, g.constant(target)), 2);
      },
      m.param_ptrs());
  EXPECT_LE(err, 1e-4);
}

TEST(CpnTest, BuildsDeterministicallyAndRejectsBadEta) {
  const CpnModel a(cpn_preset("desk", 32, 32), 1), b(cpn_preset("desk", 32, 32), 1);
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    EXPECT_EQ(a.params()[i].value.vec(), b.params()[i].value.vec());
  }
  EXPECT_THROW(CpnModel(cpn_preset("desk", 32, 32, 3), 1), std::invalid_argument);
}

TEST(CpnTest, RejectsBottleneckWithoutCompression) {
  CpnConfig cfg = cpn_preset("tiny", 16, 16);
  cfg.bottleneck_channels = 512;
  EXPECT_THROW(CpnModel(cfg, 1), std::invalid_argument);
}

TEST(CpnTest, BottleneckAtMostOneSixteenth) {
  for (auto [h, w] : {std::pair{64, 192}, std::pair{32, 96}, std::pair{32, 32}}) {
    const CpnModel m(cpn_preset("desk", h, w), 1);
    EXPECT_LE(m.bottleneck_size() * 16, static_cast<std::int64_t>(h) * w);
  }
}

TEST(CpnTest, DeskForwardShapeAndSpeed) {
  std::mt19937_64 rng(2);
  const CpnModel m32(cpn_preset("desk", 32, 32), 1);
  const Tensor d = positive_depth({1, 1, 32, 32}, rng);
  const Tensor img = random_tensor({1, 3, 32, 32}, rng, 0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  Graph g;
  EXPECT_EQ(m32.forward(g, g.constant(d), g.constant(img)).shape(), d.shape());
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 1.0);

  for (auto [h, w] : {std::pair{64, 192}, std::pair{32, 96}}) {
    const CpnModel m(cpn_preset("desk", h, w), 1);
    Graph g2;
    const Var out = m.forward(g2, g2.constant(positive_depth({1, 1, h, w}, rng)),
                              g2.constant(random_tensor({1, 3, h, w}, rng, 0.0, 1.0)));
    EXPECT_EQ(out.shape(), (Shape{1, 1, h, w}));
  }
}

TEST(CpnTest, ZeroInputsGiveFiniteOutput) {
  const CpnModel m(cpn_preset("desk", 32, 96), 1);
  Graph g;
  EXPECT_TRUE(m.forward(g, g.constant(Tensor({1, 1, 32, 96})),
                        g.constant(Tensor({1, 3, 32, 96})))
                  .value()
                  .all_finite());
}

TEST(CpnTest, GradientWrtDepthInput) {
  CpnModel m(cpn_preset("tiny", 8, 8), 3);
  jitter_biases(m.params(), 2);
  std::mt19937_64 rng(4);
  const Tensor img = random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
  const double err = grad_check(
      [&](Graph& g, const std::vector<Var>& in) {
        return sum(m.forward(g, in[0], g.constant(img)));
      },
      {positive_depth({1, 1, 8, 8}, rng)},
      // Depths are metres of order 10; a millimetre step keeps round-off
      // below the tolerance on the smallest input sensitivities.
      1e-3);
  EXPECT_LE(err, 1e-4);
}

TEST(CpnTest, GradientCheckAllParameters) {
  CpnModel m(cpn_preset("tiny", 8, 8), 5);
  jitter_biases(m.params(), 3);
  std::mt19937_64 rng(6);
  const Tensor d = positive_depth({1, 1, 8, 8}, rng);
  const Tensor img = random_tensor({1, 3, 8, 8}, rng, 0.0, 1.0);
  const double err = grad_check_params(
      [&](Graph& g) {
        Var dv = g.constant(d);
        return power_penalty(sub(m.forward(g, dv, g.constant(img), true), dv), 2);
      },
      m.param_ptrs());
  EXPECT_LE(err, 1e-4);
}

TEST(CpnScoreTest, ZeroForPerfectReconstructionAndScalesWithEta) {
  // A residual scaled by 2 multiplies the separable penalty by 2^eta.
  std::mt19937_64 rng(7);
  const Tensor r = random_tensor({1, 1, 4, 4}, rng);
  for (int eta : {1, 2}) {
    Graph g;
    const double e1 = power_penalty(g.constant(r), eta).value().item();
    const double e2 = power_penalty(scale(g.constant(r), 2.0), eta).value().item();
    EXPECT_NEAR(e2, std::pow(2.0, eta) * e1, 1e-12 * e2);
    EXPECT_EQ(power_penalty(g.constant(Tensor({1, 1, 4, 4})), eta).value().item(), 0.0);
  }
  const CpnModel m(cpn_preset("tiny", 16, 16), 1);
  const Tensor d = positive_depth({1, 1, 16, 16}, rng);
  const Tensor img = random_tensor({1, 3, 16, 16}, rng, 0.0, 1.0);
  Graph g;
  const Tensor rec = m.forward(g, g.constant(d), g.constant(img)).value();
  double expect = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) expect += std::pow(rec[i] - d[i], 2);
  EXPECT_NEAR(cpn_score(m, d, img), expect, 1e-9 * expect);
}

}  // namespace
}  // namespace depthcomp
