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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "emovc/checkpoint.h"
#include "emovc/config.h"
#include "test_util.h"

namespace emovc {
namespace {

namespace fs = std::filesystem;

TEST(ConfigFile, EmptyTextKeepsDefaults) {
  const ConfigFile c = ParseConfigText("");
  EXPECT_FALSE(c.seed.has_value());
  EXPECT_EQ(c.train, TrainConfig{});
  EXPECT_EQ(c.weights, losses::LossWeights{});
  EXPECT_EQ(c.mel, MelConfig{});
}

TEST(ConfigFile, ReadsYamlSections) {
  const ConfigFile c = ParseConfigText(R"(
seed: 9
mel:
  n_mels: 40
train:
  batch_size: 4
  style_policy: mapping
  style_loss: vanilla
  max_steps: 12
loss_weights:
  demo: 0
  f0: 2.5
tsne:
  perplexity: 5
)");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.mel.n_mels, 40);
  EXPECT_EQ(c.network.n_mels, 40);
  EXPECT_EQ(c.train.batch_size, 4);
  EXPECT_EQ(c.train.style_policy, StylePolicy::kMapping);
  EXPECT_EQ(c.train.style_loss, losses::StyleLossMode::kVanilla);
  EXPECT_EQ(c.train.max_steps, 12);
  EXPECT_EQ(c.weights.demo, 0.0);
  EXPECT_EQ(c.weights.f0, 2.5);
  EXPECT_EQ(c.weights.cycle, losses::LossWeights{}.cycle);
  EXPECT_EQ(c.tsne.perplexity, 5.0);
}

TEST(ConfigFile, JsonDocumentIsAccepted) {
  const ConfigFile c = ParseConfigText(R"({"train": {"epochs": 3}})");
  EXPECT_EQ(c.train.epochs, 3);
}

TEST(ConfigFile, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ParseConfigText("trian: {}"), ConfigError);
  EXPECT_THROW(ParseConfigText("train: {batchsize: 4}"), ConfigError);
  EXPECT_THROW(ParseConfigText("train: {batch_size: many}"), ConfigError);
  EXPECT_THROW(ParseConfigText("train: {style_policy: sometimes}"), ConfigError);
  EXPECT_THROW(ParseConfigText("loss_weights: {demo_weight: 1}"), ConfigError);
  EXPECT_THROW(ParseConfigText("- a\n- b\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("train: [unclosed"), ConfigError);
  EXPECT_THROW(LoadConfigFile("/nonexistent/emovc.yaml"), ConfigError);
}

TEST(ConfigFile, JsonFormsRoundTrip) {
  TrainConfig t;
  t.batch_size = 3;
  t.style_policy = StylePolicy::kEncoder;
  t.domain_kind = DomainKind::kEmotion;
  t.emotion_checkpoint = "c_emo.ckpt";
  EXPECT_EQ(TrainConfigFromJson(ToJson(t)), t);

  NetworkConfig n = testing::TinyNetConfig(5);
  EXPECT_EQ(NetworkConfigFromJson(ToJson(n)), n);

  MelConfig m;
  m.n_mels = 20;
  EXPECT_EQ(MelConfigFromJson(ToJson(m)), m);

  Stage2Config s;
  s.steps = 17;
  EXPECT_EQ(Stage2ConfigFromJson(ToJson(s)), s);

  TsneConfig ts;
  ts.seed = 4;
  EXPECT_EQ(TsneConfigFromJson(ToJson(ts)), ts);
}

TEST(ConfigFile, LoadsFromDisk) {
  const std::string path = testing::TempDir("cfg") + "/c.yaml";
  std::ofstream(path) << "train:\n  learning_rate: 0.001\n";
  EXPECT_EQ(LoadConfigFile(path).train.learning_rate, 1e-3);
}

class CheckpointTest : public ::testing::Test {
 protected:
  std::string path = testing::TempDir("ckpt") + "/a.ckpt";

  static Checkpoint Sample() {
    std::mt19937_64 rng(1);
    Checkpoint c;
    c.meta = {{"kind", "test"}, {"step", 7}};
    c.PutGroup("g", {{"w", testing::RandomMatrix(3, 4, rng)}, {"b", testing::RandomMatrix(3, 1, rng)}});
    c.PutGroup("empty", {});
    return c;
  }

  std::string ReadBytes() const {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  void WriteBytes(const std::string& bytes) const {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
  }
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  const Checkpoint a = Sample();
  SaveCheckpoint(a, path);
  const Checkpoint b = LoadCheckpoint(path);
  EXPECT_EQ(b.meta, a.meta);
  ASSERT_TRUE(b.HasGroup("g"));
  EXPECT_TRUE(b.HasGroup("empty"));
  EXPECT_FALSE(b.HasGroup("nope"));
  const NamedTensors& g = b.Group("g");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].first, "w");
  EXPECT_EQ(g[0].second, a.Group("g")[0].second);
  EXPECT_EQ(g[1].second, a.Group("g")[1].second);
  EXPECT_THROW(b.Group("nope"), CheckpointError);
  EXPECT_FALSE(fs::exists(path + ".tmp"));
}

TEST_F(CheckpointTest, HeaderLayout) {
  SaveCheckpoint(Sample(), path);
  const std::string bytes = ReadBytes();
  EXPECT_EQ(bytes.substr(0, 8), "EMOVCKPT");
  uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 8, sizeof(version));
  EXPECT_EQ(version, kCheckpointVersion);
}

TEST_F(CheckpointTest, RejectsForeignAndDamagedFiles) {
  SaveCheckpoint(Sample(), path);
  std::string bytes = ReadBytes();

  std::string bad_version = bytes;
  const uint32_t future = kCheckpointVersion + 1;
  std::memcpy(bad_version.data() + 8, &future, sizeof(future));
  WriteBytes(bad_version);
  EXPECT_THROW(LoadCheckpoint(path), CheckpointError);

  WriteBytes("NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(LoadCheckpoint(path), CheckpointError);

  WriteBytes(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(LoadCheckpoint(path), CheckpointError);

  WriteBytes(bytes.substr(0, 10));
  EXPECT_THROW(LoadCheckpoint(path), CheckpointError);

  EXPECT_THROW(LoadCheckpoint(path + ".missing"), CheckpointError);
}

TEST_F(CheckpointTest, RestoreParamsChecksNamesAndShapes) {
  std::mt19937_64 rng(2);
  nn::ParamStore src;
  src.Add("w", testing::RandomMatrix(2, 3, rng));
  src.Add("b", testing::RandomMatrix(2, 1, rng));
  Checkpoint c;
  c.PutParams("net", src);
  SaveCheckpoint(c, path);
  const Checkpoint loaded = LoadCheckpoint(path);

  nn::ParamStore dst;
  dst.Add("w", ad::Matrix::Zero(2, 3));
  dst.Add("b", ad::Matrix::Zero(2, 1));
  loaded.RestoreParams("net", &dst);
  EXPECT_TRUE(dst.BitEqual(src.Snapshot()));

  nn::ParamStore wrong_shape;
  wrong_shape.Add("w", ad::Matrix::Zero(3, 2));
  wrong_shape.Add("b", ad::Matrix::Zero(2, 1));
  EXPECT_THROW(loaded.RestoreParams("net", &wrong_shape), CheckpointError);

  nn::ParamStore wrong_name;
  wrong_name.Add("weight", ad::Matrix::Zero(2, 3));
  wrong_name.Add("b", ad::Matrix::Zero(2, 1));
  EXPECT_THROW(loaded.RestoreParams("net", &wrong_name), CheckpointError);

  nn::ParamStore too_few;
  too_few.Add("w", ad::Matrix::Zero(2, 3));
  EXPECT_THROW(loaded.RestoreParams("net", &too_few), CheckpointError);
}

}  // namespace
}  // namespace emovc
