// Copyright (c) 2026 The emovc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emovc/networks.h"

#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "test_util.h"

namespace emovc {
namespace {

using testing::RandomMatrix;
using testing::TinyNetConfig;

MelSpectrogram RandomMel(int frames, int bins, std::mt19937_64& rng) {
  MelSpectrogram m;
  m.values = RandomMatrix(frames, bins, rng);
  return m;
}

// Gradient norm per top-level parameter group (name up to the first dot).
std::map<std::string, double> GroupGradNorms(const nn::ParamStore& store) {
  std::map<std::string, double> out;
  for (const auto& [name, p] : store.entries()) {
    out[name.substr(0, name.find('.'))] += p.grad().squaredNorm();
  }
  return out;
}

class NetworksTest : public ::testing::Test {
 protected:
  NetworkConfig cfg = TinyNetConfig(3, 20);
  VcNetworks nets{cfg, 17};
  std::mt19937_64 rng{5};
};

TEST_F(NetworksTest, EncoderCodeLengthIsCeilOfDownsampling) {
  for (int frames : {16, 17, 18, 19, 33}) {
    const LatentCode code = EncoderForward(RandomMel(frames, cfg.n_mels, rng), nets);
    EXPECT_EQ(code.values.cols(), (frames + 3) / 4) << frames;
    EXPECT_EQ(code.values.rows(), cfg.gen_channels);
  }
}

TEST_F(NetworksTest, EncoderIsDeterministicAndSensitive) {
  MelSpectrogram x = RandomMel(24, cfg.n_mels, rng);
  const Eigen::MatrixXd a = EncoderForward(x, nets).values;
  EXPECT_EQ(a, EncoderForward(x, nets).values);
  x.values(5, 3) += 1e-3;
  EXPECT_GT((EncoderForward(x, nets).values - a).cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(NetworksTest, GeneratorPreservesShapeAndIsBitStable) {
  const MelSpectrogram x = RandomMel(29, cfg.n_mels, rng);
  const std::vector<double> f0(29, 1.0);
  const StyleEmbedding s = MappingForward(SampleNoise(cfg.latent_dim, rng), {1, DomainKind::kSpeaker}, nets);
  const MelSpectrogram y = GeneratorForward(x, f0, s, nets);
  EXPECT_EQ(y.frames(), 29);
  EXPECT_EQ(y.n_mels(), cfg.n_mels);
  EXPECT_TRUE(y.values.allFinite());
  EXPECT_EQ(y.values, GeneratorForward(x, f0, s, nets).values);
}

TEST_F(NetworksTest, GeneratorGradientReachesEveryGroup) {
  const ad::Var x = MelToVar(RandomMel(20, cfg.n_mels, rng));
  const ad::Var f0 = ad::Var::Constant(ad::Matrix::Ones(1, 20));
  const ad::Var s = ad::Var::Constant(RandomMatrix(cfg.style_dim, 1, rng));
  nets.generator.params().ZeroGrad();
  ad::Sum(nets.generator.Forward(x, f0, s)).Backward();
  const auto norms = GroupGradNorms(nets.generator.params());
  EXPECT_GE(norms.size(), 4u);
  for (const auto& [group, n] : norms) EXPECT_GT(n, 0.0) << group;

  // Finite-difference agreement on one decoder weight.
  const ad::Var w = nets.generator.params().Get("to_mel.weight");
  EXPECT_LT(testing::GradCheck([&] { return ad::Sum(nets.generator.Forward(x, f0, s)); }, w, 20, rng),
            1e-5);
}

TEST_F(NetworksTest, StyleHeadsDifferAndWidthsMatch) {
  const MelSpectrogram x = RandomMel(40, cfg.n_mels, rng);
  const StyleEmbedding a = StyleEncode(x, {0, DomainKind::kSpeaker}, nets);
  const StyleEmbedding b = StyleEncode(x, {1, DomainKind::kSpeaker}, nets);
  EXPECT_EQ(a.values.size(), 64);
  EXPECT_GT((a.values - b.values).norm(), 1e-6);
  EXPECT_EQ(StyleTrunkOutput(x, nets).size(), 512);
  EXPECT_EQ(a.domain, (DomainCode{0, DomainKind::kSpeaker}));
}

TEST_F(NetworksTest, DefaultConfigWidths) {
  const NetworkConfig def;
  EXPECT_EQ(def.trunk_dim, 512);
  EXPECT_EQ(def.style_dim, 64);
  EXPECT_EQ(def.downsample_factor(), 4);
}

TEST_F(NetworksTest, MappingIsDeterministicAndVariesWithNoise) {
  const DomainCode y{2, DomainKind::kSpeaker};
  const LatentNoise z = SampleNoise(cfg.latent_dim, rng);
  EXPECT_EQ(MappingForward(z, y, nets).values, MappingForward(z, y, nets).values);
  EXPECT_EQ(MappingForward(z, y, nets).values.size(), cfg.style_dim);

  Eigen::MatrixXd samples(100, cfg.style_dim);
  for (int i = 0; i < 100; ++i) {
    samples.row(i) = MappingForward(SampleNoise(cfg.latent_dim, rng), y, nets).values.transpose();
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::RowVectorXd var = (samples.rowwise() - mean).array().square().colwise().mean();
  EXPECT_GT(var.minCoeff(), 0.0);
}

TEST_F(NetworksTest, MappingGradientOnlyTouchesTheSelectedHead) {
  nets.mapping.params().ZeroGrad();
  const ad::Var z = ad::Var::Constant(SampleNoise(cfg.latent_dim, rng).values);
  ad::Sum(nets.mapping.Forward(z, {1, DomainKind::kSpeaker})).Backward();
  double other = 0.0, selected = 0.0;
  for (const auto& [name, p] : nets.mapping.params().entries()) {
    if (name.find("head.1.") != std::string::npos) selected += p.grad().norm();
    if (name.find("head.0.") != std::string::npos || name.find("head.2.") != std::string::npos) {
      other += p.grad().norm();
    }
  }
  EXPECT_GT(selected, 0.0);
  EXPECT_EQ(other, 0.0);
}

TEST_F(NetworksTest, DiscriminatorConditioningIsLive) {
  const MelSpectrogram x = RandomMel(32, cfg.n_mels, rng);
  const double a = Discriminate(x, {0, DomainKind::kSpeaker}, nets);
  const double b = Discriminate(x, {1, DomainKind::kSpeaker}, nets);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_NE(a, b);
}

TEST_F(NetworksTest, DiscriminatorInputGradientMatchesFiniteDifference) {
  const ad::Var x = ad::Var::Parameter(MelToVar(RandomMel(16, cfg.n_mels, rng)).value());
  auto f = [&] { return nets.discriminator.Logit(x, {2, DomainKind::kSpeaker}); };
  EXPECT_LT(testing::GradCheck(f, x, 40, rng), 1e-5);
  EXPECT_TRUE(x.grad().allFinite());
}

TEST_F(NetworksTest, SpeakerClassifierSoftmaxSumsToOne) {
  const MelSpectrogram x = RandomMel(24, cfg.n_mels, rng);
  const Eigen::VectorXd logits = ClassifySpeaker(x, nets);
  ASSERT_EQ(logits.size(), 3);
  EXPECT_EQ(logits, ClassifySpeaker(x, nets));
  const Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  EXPECT_NEAR((p / p.sum()).sum(), 1.0, 1e-6);
}

TEST_F(NetworksTest, DomainChecks) {
  EXPECT_THROW(CheckDomain(cfg, {3, DomainKind::kSpeaker}), std::out_of_range);
  EXPECT_THROW(CheckDomain(cfg, {-1, DomainKind::kSpeaker}), std::out_of_range);
  EXPECT_THROW(CheckDomain(cfg, {0, DomainKind::kEmotion}), std::invalid_argument);
  EXPECT_NO_THROW(CheckDomain(cfg, {2, DomainKind::kSpeaker}));
  EXPECT_THROW(StyleEncode(RandomMel(16, cfg.n_mels, rng), {5, DomainKind::kSpeaker}, nets),
               std::out_of_range);
}

TEST_F(NetworksTest, SameSeedSameWeights) {
  VcNetworks again(cfg, 17), other(cfg, 18);
  const auto a = nets.generator.params().Snapshot();
  EXPECT_TRUE(again.generator.params().BitEqual(a));
  EXPECT_FALSE(other.generator.params().BitEqual(a));
}

TEST_F(NetworksTest, MelLayoutRoundTrip) {
  const MelSpectrogram x = RandomMel(7, cfg.n_mels, rng);
  const ad::Var v = MelToVar(x);
  EXPECT_EQ(v.rows(), cfg.n_mels);
  EXPECT_EQ(v.cols(), 7);
  EXPECT_EQ(VarToMel(v).values, x.values);
}

TEST(EmotionClassifierShape, HeadWidthsAndTrunkTransfer) {
  const NetworkConfig cfg = TinyNetConfig(2, 20);
  EmotionClassifier c(cfg, kNumEmotions, 3);
  std::mt19937_64 rng(1);
  const ad::Var mel = MelToVar(RandomMel(30, 20, rng));
  const auto out = c.Forward(mel);
  EXPECT_EQ(out.embedding.rows(), 64);
  EXPECT_EQ(out.logits.rows(), kNumEmotions);
  EXPECT_EQ(c.head_params().entries().size(), 6u);

  const StyleEncoder se(cfg, 99);
  c.LoadTrunkFrom(se);
  EXPECT_EQ(c.Trunk(mel).value(), se.Trunk(mel).value());
}

}  // namespace
}  // namespace emovc
