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
#include <vector>

#include "depthcomp/gradcheck.hpp"
#include "depthcomp/losses.hpp"
#include "depthcomp/networks.hpp"
#include "test_util.hpp"

namespace depthcomp {
namespace {

using testing_util::random_tensor;

constexpr int kH = 16;
constexpr int kW = 16;

struct Fixture {
  Tensor d, z_map, validity, image, image_prime;
  std::vector<std::size_t> omega;
  std::vector<double> z;
  StereoRig rig{8.0, 0.5};
};

Fixture make_fixture(std::uint64_t seed, int k = 10) {
  std::mt19937_64 rng(seed);
  Fixture f;
  f.d = random_tensor({1, 1, kH, kW}, rng, 2.0, 30.0);
  f.z_map = Tensor({1, 1, kH, kW});
  f.validity = Tensor({1, 1, kH, kW});
  while (static_cast<int>(f.omega.size()) < k) {
    const std::size_t i = rng() % f.d.size();
    if (f.validity[i] != 0.0) continue;
    f.validity[i] = 1.0;
    f.z_map[i] = std::uniform_real_distribution<double>(2.0, 30.0)(rng);
    f.omega.push_back(i);
    f.z.push_back(f.z_map[i]);
  }
  f.image = random_tensor({1, 3, kH, kW}, rng, 0.0, 1.0);
  f.image_prime = random_tensor({1, 3, kH, kW}, rng, 0.0, 1.0);
  return f;
}

const CpnModel& toy_cpn() {
  static const CpnModel m(cpn_preset("tiny", kH, kW, 2), 3);
  return m;
}

double fidelity(const Tensor& d, const Tensor& z_map, const Tensor& validity, int gamma) {
  Graph g;
  return sparse_fidelity(g.constant(d), z_map, validity, gamma).value().item();
}

TEST(SparseFidelityTest, ZeroWhenDepthAgreesOnSamples) {
  Fixture f = make_fixture(1);
  for (std::size_t i : f.omega) f.d[i] = f.z_map[i];
  EXPECT_EQ(fidelity(f.d, f.z_map, f.validity, 1), 0.0);
  EXPECT_EQ(sparse_fidelity(f.d, f.z, f.omega, 2), 0.0);
}

TEST(SparseFidelityTest, OnePointOffByTwo) {
  Fixture f = make_fixture(2);
  for (std::size_t i : f.omega) f.d[i] = f.z_map[i];
  f.d[f.omega[3]] += 2.0;
  EXPECT_DOUBLE_EQ(fidelity(f.d, f.z_map, f.validity, 1), 2.0);
  EXPECT_DOUBLE_EQ(fidelity(f.d, f.z_map, f.validity, 2), 4.0);
}

TEST(SparseFidelityTest, MatchesDirectLoop) {
  const Fixture f = make_fixture(3);
  for (int gamma : {1, 2}) {
    double expect = 0.0;
    for (std::size_t k = 0; k < f.omega.size(); ++k) {
      expect += std::pow(std::abs(f.z[k] - f.d[f.omega[k]]), gamma);
    }
    EXPECT_NEAR(fidelity(f.d, f.z_map, f.validity, gamma), expect, 1e-12 * expect);
    EXPECT_NEAR(sparse_fidelity(f.d, f.z, f.omega, gamma), expect, 1e-12 * expect);
  }
}

TEST(SparseFidelityTest, RejectsEmptySet) {
  const Fixture f = make_fixture(4);
  EXPECT_THROW(fidelity(f.d, f.z_map, Tensor({1, 1, kH, kW}), 1), std::invalid_argument);
  EXPECT_THROW(sparse_fidelity(f.d, {}, {}, 1), std::invalid_argument);
  EXPECT_THROW(fidelity(f.d, f.z_map, f.validity, 3), std::invalid_argument);
}

TEST(SupervisedLossTest, Values) {
  const Fixture f = make_fixture(5);
  Tensor mask({1, 1, kH, kW});
  for (int i = 0; i < 100; ++i) mask[i] = 1.0;
  Tensor pred = f.d;
  Graph g;
  EXPECT_EQ(supervised_loss(g.constant(pred), f.d, mask).value().item(), 0.0);
  for (auto& v : pred.vec()) v += 1.0;
  EXPECT_DOUBLE_EQ(supervised_loss(g.constant(pred), f.d, mask).value().item(), 100.0);
  pred[200] += 50.0;  // off the mask
  EXPECT_DOUBLE_EQ(supervised_loss(g.constant(pred), f.d, mask).value().item(), 100.0);
  EXPECT_THROW(supervised_loss(g.constant(pred), f.d, Tensor({1, 1, kH, kW})),
               std::invalid_argument);
}

TEST(UnsupervisedLossTest, AlphaZeroIsFidelity) {
  const Fixture f = make_fixture(6);
  LossWeights w;
  w.alpha = 0.0;
  Graph g;
  const auto t = unsupervised_loss(g.constant(f.d), f.z_map, f.validity, g.constant(f.image),
                                   toy_cpn(), NormSpec{1, 2}, w);
  EXPECT_EQ(t.total.value().item(), fidelity(f.d, f.z_map, f.validity, 1));
}

TEST(UnsupervisedLossTest, ComponentsAndDefaultWeights) {
  const Fixture f = make_fixture(7);
  const LossWeights w;  // defaults
  EXPECT_EQ(w.alpha, 0.045);
  Graph g;
  const auto t = unsupervised_loss(g.constant(f.d), f.z_map, f.validity, g.constant(f.image),
                                   toy_cpn(), NormSpec{1, 2}, w);
  const double expect = t.fidelity.value().item() + 0.045 * t.prior.value().item();
  EXPECT_NEAR(t.total.value().item(), expect, 1e-12 * expect);
  EXPECT_NEAR(t.prior.value().item(), cpn_score(toy_cpn(), f.d, f.image),
              1e-12 * t.prior.value().item());
}

TEST(UnsupervisedLossTest, IncreasingAlphaIncreasesTotal) {
  const Fixture f = make_fixture(8);
  double prev = -1.0;
  for (double a : {0.0, 0.01, 0.045, 0.1}) {
    LossWeights w;
    w.alpha = a;
    Graph g;
    const double v = unsupervised_loss(g.constant(f.d), f.z_map, f.validity,
                                       g.constant(f.image), toy_cpn(), NormSpec{1, 2}, w)
                         .total.value()
                         .item();
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(UnsupervisedLossTest, RejectsEtaMismatch) {
  const Fixture f = make_fixture(9);
  Graph g;
  EXPECT_THROW(unsupervised_loss(g.constant(f.d), f.z_map, f.validity, g.constant(f.image),
                                 toy_cpn(), NormSpec{1, 1}, LossWeights{}),
               std::invalid_argument);
}

TEST(UnsupervisedLossTest, CpnStaysFrozenAndGradientReachesDepth) {
  const Fixture f = make_fixture(10);
  CpnModel cpn(cpn_preset("tiny", kH, kW, 2), 3);
  Graph g;
  Var d = g.input(f.d);
  g.backward(unsupervised_loss(d, f.z_map, f.validity, g.constant(f.image), cpn,
                               NormSpec{1, 2}, LossWeights{})
                 .total);
  for (const auto& p : cpn.params()) EXPECT_FALSE(p.has_grad()) << p.name;
  double norm = 0.0;
  for (std::size_t i = 0; i < f.d.size(); ++i) {
    if (f.validity[i] == 0.0) norm += std::abs(g.grad(d)[i]);
  }
  EXPECT_GT(norm, 0.0);  // prior gradient reaches pixels off the sample set
}

TEST(UnsupervisedLossTest, GradientWrtDcnParametersDeskPreset) {
  DcnModel dcn(dcn_preset("desk"), 4);
  const Fixture f = make_fixture(11);
  std::vector<Parameter*> subset;
  for (auto* p : dcn.param_ptrs()) {
    if (p->name == "out.weight" || p->name == "out.bias" || p->name == "enc_d.0.down.weight" ||
        p->name == "enc_i.2.res.b.bias") {
      subset.push_back(p);
    }
  }
  ASSERT_EQ(subset.size(), 4u);
  const double err = grad_check_params(
      [&](Graph& g) {
        Var d = dcn.forward(g, g.constant(f.z_map), g.constant(f.image), true);
        return unsupervised_loss(d, f.z_map, f.validity, g.constant(f.image), toy_cpn(),
                                 NormSpec{2, 2}, LossWeights{})
            .total;
      },
      subset);
  EXPECT_LE(err, 1e-4);
}

TEST(PhotometricTest, ZeroDisparityIdentity) {
  const Fixture f = make_fixture(12);
  Graph g;
  const double v = photometric_raw(g.constant(f.image), g.constant(f.image),
                                   g.constant(Tensor({1, 1, kH, kW}, 1e12)), f.rig)
                       .value()
                       .item();
  EXPECT_LE(v, 1e-6);
  EXPECT_LE(photometric_ssim(g.constant(f.image), g.constant(f.image),
                             g.constant(Tensor({1, 1, kH, kW}, 1e12)), f.rig)
                .value()
                .item(),
            1e-6);
}

TEST(PhotometricTest, ConstructedOnePixelPair) {
  const Fixture f = make_fixture(13);
  // I(x) = I'(x + 1), so disparity 1 px, depth F B.
  Tensor prime({1, 3, kH, kW});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < kH; ++y) {
      for (int x = 1; x < kW; ++x) prime.at(0, c, y, x) = f.image.at(0, c, y, x - 1);
    }
  }
  const Tensor d({1, 1, kH, kW}, f.rig.fb());
  const PhotometricMap m = photometric_residual(f.image, prime, d, f.rig);
  for (int y = 0; y < kH; ++y) {
    for (int x = 0; x + 1 < kW; ++x) EXPECT_NEAR(m.residual.at(0, 0, y, x), 0.0, 1e-12);
    EXPECT_EQ(m.in_bounds.at(0, 0, y, kW - 1), 0.0);
  }
  Graph g;
  EXPECT_NEAR(photometric_raw(g.constant(f.image), g.constant(prime), g.constant(d), f.rig)
                  .value()
                  .item(),
              0.0, 1e-10);
}

TEST(PhotometricTest, UnrelatedImagesArePositiveAndBounded) {
  const Fixture f = make_fixture(14);
  Graph g;
  EXPECT_GT(photometric_raw(g.constant(f.image), g.constant(f.image_prime), g.constant(f.d),
                            f.rig)
                .value()
                .item(),
            0.0);
  const double s = photometric_ssim(g.constant(f.image), g.constant(f.image_prime),
                                    g.constant(f.d), f.rig)
                       .value()
                       .item();
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, 2.0 * kH * kW);
  EXPECT_THROW(photometric_raw(g.constant(f.image), g.constant(f.image_prime),
                               g.constant(Tensor({1, 1, kH, kW})), f.rig),
               std::invalid_argument);
}

TEST(PhotometricTest, SsimTermMatchesFormulaOnWarpedPair) {
  const Fixture f = make_fixture(15);
  Graph g;
  Var d = g.constant(f.d);
  const WarpResult w =
      warp_horizontal(g.constant(f.image_prime), disparity_from_depth(d, f.rig), 1);
  const Tensor m = ssim_map(g.constant(f.image), w.warped).value();
  double expect = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double term = (1.0 - m[i]) * w.in_bounds[i];
    EXPECT_GE(term, 0.0);
    EXPECT_LE(term, 2.0);
    expect += term;
  }
  EXPECT_NEAR(photometric_ssim(g.constant(f.image), g.constant(f.image_prime), d, f.rig)
                  .value()
                  .item(),
              expect, 1e-12 * expect);
}

TEST(StereoLossTest, ZeroPhotometricWeightsGiveUnsupervised) {
  const Fixture f = make_fixture(16);
  LossWeights w;
  w.beta_c = w.beta_s = 0.0;
  Graph g;
  const auto s = stereo_loss(g.constant(f.d), f.z_map, f.validity, g.constant(f.image),
                             g.constant(f.image_prime), f.rig, toy_cpn(), NormSpec{1, 2}, w);
  EXPECT_EQ(s.total.value().item(), s.unsupervised.total.value().item());
}

TEST(StereoLossTest, BookkeepingWithDefaultWeights) {
  const Fixture f = make_fixture(17);
  const LossWeights w;
  EXPECT_EQ(w.beta_c, 0.15);
  EXPECT_EQ(w.beta_s, 0.425);
  Graph g;
  const auto s = stereo_loss(g.constant(f.d), f.z_map, f.validity, g.constant(f.image),
                             g.constant(f.image_prime), f.rig, toy_cpn(), NormSpec{1, 2}, w);
  const double expect = s.unsupervised.total.value().item() +
                        0.15 * s.psi_c.value().item() + 0.425 * s.psi_s.value().item();
  EXPECT_NEAR(s.total.value().item(), expect, 1e-12 * expect);
}

TEST(StereoLossTest, GradientWrtDepth) {
  const Fixture f = make_fixture(18);
  // Depths giving fractional disparities in (0.2, 0.9) px.
  std::mt19937_64 rng(19);
  Tensor d({1, 1, kH, kW});
  for (auto& v : d.vec()) v = f.rig.fb() / std::uniform_real_distribution<double>(0.2, 0.9)(rng);
  const double err = grad_check(
      [&](Graph& g, const std::vector<Var>& in) {
        return stereo_loss(in[0], f.z_map, f.validity, g.constant(f.image),
                           g.constant(f.image_prime), f.rig, toy_cpn(), NormSpec{2, 2},
                           LossWeights{})
            .total;
      },
      {d});
  EXPECT_LE(err, 1e-4);
}

TEST(PosteriorScoreTest, EqualsUnsupervisedLossAtFixedDepth) {
  const Fixture f = make_fixture(20);
  Graph g;
  const double lu = unsupervised_loss(g.constant(f.d), f.z_map, f.validity,
                                      g.constant(f.image), toy_cpn(), NormSpec{1, 2},
                                      LossWeights{})
                        .total.value()
                        .item();
  const double p = posterior_score(f.d, f.z_map, f.validity, f.image, toy_cpn(),
                                   NormSpec{1, 2}, 0.045);
  EXPECT_NEAR(p, lu, 1e-9);
  EXPECT_EQ(p, posterior_score(f.d, f.z_map, f.validity, f.image, toy_cpn(), NormSpec{1, 2},
                               0.045));
}

TEST(WeightsTest, RejectNegativeAndBadNorms) {
  LossWeights w;
  w.beta_s = -1.0;
  EXPECT_THROW(w.validate(), std::invalid_argument);
  EXPECT_THROW((NormSpec{0, 2}).validate(), std::invalid_argument);
  EXPECT_THROW((NormSpec{1, 3}).validate(), std::invalid_argument);
}

}  // namespace
}  // namespace depthcomp
