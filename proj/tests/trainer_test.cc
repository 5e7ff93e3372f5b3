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

#include "emovc/trainer.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "test_util.h"

namespace emovc {
namespace {

namespace fs = std::filesystem;
using ad::Matrix;
using ad::Var;

class TrainerTest : public ::testing::Test {
 protected:
  FeatureStore store{testing::TinyMelConfig()};
  Manifest manifest = testing::AddSyntheticCorpus(store, 3, 5, 40, 21);
  std::shared_ptr<EmotionClassifier> c_emo =
      std::make_shared<EmotionClassifier>(testing::TinyNetConfig(3), kNumEmotions, 8);

  std::unique_ptr<VcTrainer> Make(losses::LossWeights w = {}, uint64_t seed = 4) {
    auto t = std::make_unique<VcTrainer>(testing::TinyNetConfig(3), testing::TinyTrainConfig(seed),
                                         w, store.config());
    t->SetEmotionClassifier(c_emo);
    t->speaker_labels = manifest.speaker_labels;
    return t;
  }

  TrainBatch Batch(const VcTrainer& t, int size = 2) {
    return testing::MakeBatch(manifest, store, size, 32, t.nets().config.latent_dim, 13);
  }
};

// Cross-entropy written out from the raw logits.
double CrossEntropy(const Matrix& logits, int label) {
  double m = logits.maxCoeff(), sum = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) sum += std::exp(logits(i, 0) - m);
  return m + std::log(sum) - logits(label, 0);
}

TEST_F(TrainerTest, AntiSpeakerTermClassifiesTheSourceSpeaker) {
  auto t = Make();
  const TrainBatch batch = Batch(*t, 3);
  const VcNetworks& n = t->nets();
  double with_src = 0.0, with_trg = 0.0;
  for (const TrainingSample& s : batch.samples) {
    const Var style = n.style_encoder.Encode(Var::Constant(s.mel_ref), s.trg_domain);
    const Var fake = n.generator.Forward(Var::Constant(s.mel_src), Var::Constant(s.f0_src), style);
    const Matrix logits = n.speaker_classifier.Logits(fake).value();
    with_src += CrossEntropy(logits, s.src_domain.index) / 3.0;
    with_trg += CrossEntropy(logits, s.trg_domain.index) / 3.0;
  }
  const double aspk = t->EvaluateDiscriminator(batch, 0).aspk;
  EXPECT_NEAR(aspk, with_src, 1e-10);
  EXPECT_GT(std::abs(aspk - with_trg), 1e-8);
}

TEST_F(TrainerTest, SpeakerTermTargetsTheTargetSpeaker) {
  auto t = Make();
  const TrainBatch batch = Batch(*t, 2);
  const VcNetworks& n = t->nets();
  double want = 0.0;
  for (const TrainingSample& s : batch.samples) {
    const Var style = n.style_encoder.Encode(Var::Constant(s.mel_ref), s.trg_domain);
    const Var fake = n.generator.Forward(Var::Constant(s.mel_src), Var::Constant(s.f0_src), style);
    want += CrossEntropy(n.speaker_classifier.Logits(fake).value(), s.trg_domain.index) / 2.0;
  }
  EXPECT_NEAR(t->EvaluateGenerator(batch, 0).spk, want, 1e-10);
}

TEST_F(TrainerTest, StyleSourceAlternatesPerStep) {
  auto t = Make();
  EXPECT_FALSE(t->UsesMapping(0));
  EXPECT_TRUE(t->UsesMapping(1));
  EXPECT_FALSE(t->UsesMapping(2));
  EXPECT_TRUE(t->UsesMapping(7));

  const TrainBatch batch = Batch(*t);
  const auto even = t->EvaluateGenerator(batch, 0);
  const auto odd = t->EvaluateGenerator(batch, 1);
  Var w = t->nets().mapping.params().entries().front().second;
  w.mutable_value().array() += 0.5;
  EXPECT_EQ(t->EvaluateGenerator(batch, 0).total, even.total);
  EXPECT_EQ(t->EvaluateDiscriminator(batch, 0).total, t->EvaluateDiscriminator(batch, 2).total);
  EXPECT_NE(t->EvaluateGenerator(batch, 1).total, odd.total);
}

TEST_F(TrainerTest, StylePolicyNames) {
  EXPECT_EQ(ParseStylePolicy(StylePolicyName(StylePolicy::kMapping)), StylePolicy::kMapping);
  EXPECT_EQ(ParseStylePolicy("alternate"), StylePolicy::kAlternate);
  TrainConfig tc = testing::TinyTrainConfig();
  tc.style_policy = StylePolicy::kEncoder;
  VcTrainer enc(testing::TinyNetConfig(3), tc, {}, store.config());
  EXPECT_FALSE(enc.UsesMapping(1));
  tc.style_policy = StylePolicy::kMapping;
  VcTrainer map(testing::TinyNetConfig(3), tc, {}, store.config());
  EXPECT_TRUE(map.UsesMapping(0));
}

TEST_F(TrainerTest, DemoTermIsLazy) {
  losses::LossWeights off;
  off.demo = 0.0;
  auto t = Make(off);
  const TrainBatch batch = Batch(*t);
  const auto parts = t->EvaluateGenerator(batch, 0);
  t->GeneratorStep(batch, 1);
  EXPECT_EQ(t->emotion_calls(), 0);
  EXPECT_FALSE(parts.demo_evaluated);
  EXPECT_EQ(parts.demo, 0.0);

  auto on = Make();
  on->EvaluateGenerator(batch, 0);
  EXPECT_EQ(on->emotion_calls(), 4);  // source and converted, per sample
}

TEST_F(TrainerTest, DemoWithoutEmbedderIsAConfigError) {
  VcTrainer t(testing::TinyNetConfig(3), testing::TinyTrainConfig(), {}, store.config());
  EXPECT_THROW(t.EvaluateGenerator(Batch(t), 0), ConfigError);
}

TEST_F(TrainerTest, EmbedderStaysFrozen) {
  auto t = Make();
  const auto trunk = c_emo->trunk_params().Snapshot(), head = c_emo->head_params().Snapshot();
  const TrainBatch batch = Batch(*t);
  t->DiscriminatorStep(batch, 0);
  t->GeneratorStep(batch, 0);
  EXPECT_TRUE(c_emo->trunk_params().BitEqual(trunk));
  EXPECT_TRUE(c_emo->head_params().BitEqual(head));
}

TEST_F(TrainerTest, IdenticalStateGivesIdenticalDeltas) {
  auto a = Make(), b = Make();
  const TrainBatch batch = Batch(*a);
  a->DiscriminatorStep(batch, 0);
  b->DiscriminatorStep(batch, 0);
  EXPECT_TRUE(b->nets().discriminator.params().BitEqual(a->nets().discriminator.params().Snapshot()));
  a->GeneratorStep(batch, 0);
  b->GeneratorStep(batch, 0);
  EXPECT_TRUE(b->nets().generator.params().BitEqual(a->nets().generator.params().Snapshot()));
}

TEST_F(TrainerTest, NonFiniteBatchThrowsWithoutUpdating) {
  auto t = Make();
  TrainBatch batch = Batch(*t);
  batch.samples[0].mel_src(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const auto c = t->nets().discriminator.params().Snapshot();
  const auto g = t->nets().generator.params().Snapshot();
  EXPECT_THROW(t->DiscriminatorStep(batch, 0), NonFiniteLoss);
  EXPECT_THROW(t->GeneratorStep(batch, 0), NonFiniteLoss);
  EXPECT_TRUE(t->nets().discriminator.params().BitEqual(c));
  EXPECT_TRUE(t->nets().generator.params().BitEqual(g));
}

TEST_F(TrainerTest, TrainStepAdvancesTheCounter) {
  auto t = Make();
  const TupleSampler sampler(manifest.records, DomainKind::kSpeaker);
  const auto report = t->TrainStep(sampler, store);
  EXPECT_EQ(t->step(), 1);
  EXPECT_TRUE(report.generator.has_value());
  EXPECT_TRUE(report.discriminator.has_value());
}

TEST_F(TrainerTest, CheckpointRestoresState) {
  auto a = Make();
  const TupleSampler sampler(manifest.records, DomainKind::kSpeaker);
  a->TrainStep(sampler, store);
  const std::string path = testing::TempDir("trainer") + "/a.ckpt";
  a->Save(path);

  auto b = Make({}, 99);
  b->Restore(LoadCheckpoint(path));
  EXPECT_EQ(b->step(), 1);
  const auto ra = a->TrainStep(sampler, store);
  const auto rb = b->TrainStep(sampler, store);
  EXPECT_EQ(ra.generator->total, rb.generator->total);
  EXPECT_EQ(ra.discriminator->total, rb.discriminator->total);

  std::vector<std::string> labels;
  const auto nets = LoadVcNetworks(path, &labels);
  EXPECT_EQ(labels, manifest.speaker_labels);
  EXPECT_TRUE(nets->generator.params().BitEqual(
      LoadVcNetworks(path)->generator.params().Snapshot()));

  VcTrainer wrong(testing::TinyNetConfig(4), testing::TinyTrainConfig(), {}, store.config());
  EXPECT_THROW(wrong.Restore(LoadCheckpoint(path)), CheckpointError);
}

TEST(CropMel, CropsAndPads) {
  MelSpectrogram mel;
  mel.values = Matrix(5, 2);  // [frames x bins]
  for (int t = 0; t < 5; ++t) mel.values.row(t) << t, 10 + t;
  const Matrix crop = CropMel(mel, 1, 3, -9.0);
  ASSERT_EQ(crop.rows(), 2);
  ASSERT_EQ(crop.cols(), 3);
  EXPECT_EQ(crop(0, 0), 1.0);
  EXPECT_EQ(crop(1, 2), 13.0);
  const Matrix padded = CropMel(mel, 3, 4, -9.0);
  EXPECT_EQ(padded(0, 0), 3.0);
  EXPECT_EQ(padded(0, 1), 4.0);
  EXPECT_EQ(padded(0, 2), -9.0);
  EXPECT_EQ(padded(1, 3), -9.0);
}

class RunTrainingTest : public ::testing::Test {
 protected:
  FeatureStore store{testing::TinyMelConfig()};
  Manifest manifest = testing::AddSyntheticCorpus(store, 2, 4, 40, 3);

  RunOptions Options(long steps) {
    RunOptions o;
    o.net = testing::TinyNetConfig();
    o.train = testing::TinyTrainConfig(6);
    o.train.max_steps = steps;
    o.train.log_interval = 1;
    o.train.checkpoint_interval = 2;
    o.weights.demo = 0.0;
    o.mel = store.config();
    return o;
  }
};

TEST_F(RunTrainingTest, WritesLogsPeriodicAndFinalCheckpoints) {
  const std::string dir = testing::TempDir("run");
  const CheckpointSet set = RunTraining(manifest, store, Options(5), dir);
  EXPECT_EQ(set.periodic.size(), 2u);
  EXPECT_TRUE(fs::exists(dir + "/step_2.ckpt"));
  EXPECT_TRUE(fs::exists(dir + "/step_4.ckpt"));
  EXPECT_EQ(set.final_checkpoint, dir + "/final.ckpt");
  std::ifstream log(set.log_path);
  int lines = 0;
  long last = -1;
  for (std::string line; std::getline(log, line);) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_GT(j.at("step").get<long>(), last);
    last = j.at("step").get<long>();
    EXPECT_TRUE(j.contains("generator"));
    ++lines;
  }
  EXPECT_EQ(lines, 5);
}

TEST_F(RunTrainingTest, ResumeMatchesAnUninterruptedRun) {
  const std::string full = testing::TempDir("run"), resumed = testing::TempDir("run");
  RunTraining(manifest, store, Options(4), full);
  RunOptions o = Options(4);
  o.resume_from = full + "/step_2.ckpt";
  RunTraining(manifest, store, o, resumed);
  const auto a = LoadVcNetworks(full + "/final.ckpt");
  const auto b = LoadVcNetworks(resumed + "/final.ckpt");
  EXPECT_TRUE(b->generator.params().BitEqual(a->generator.params().Snapshot()));
  EXPECT_TRUE(b->style_encoder.params().BitEqual(a->style_encoder.params().Snapshot()));
}

TEST_F(RunTrainingTest, DemoNeedsAnEmbedderCheckpoint) {
  RunOptions o = Options(1);
  o.weights.demo = 2.0;
  EXPECT_THROW(RunTraining(manifest, store, o, testing::TempDir("run")), ConfigError);

  const std::string dir = testing::TempDir("run");
  SaveEmotionClassifier(EmotionClassifier(testing::TinyNetConfig(), kNumEmotions, 1),
                        dir + "/c_emo.ckpt");
  o.train.emotion_checkpoint = dir + "/c_emo.ckpt";
  EXPECT_NO_THROW(RunTraining(manifest, store, o, dir + "/out"));
}

TEST_F(RunTrainingTest, AbortsAfterAStreakOfNonFiniteSteps) {
  for (const auto& r : manifest.records) {
    UtteranceFeatures f = store.Get(r);
    f.mel.values(0, 0) = std::numeric_limits<double>::infinity();
    f.mel.values.array() *= std::numeric_limits<double>::quiet_NaN();
    store.Put(r.id, std::move(f));
  }
  const std::string dir = testing::TempDir("run");
  EXPECT_THROW(RunTraining(manifest, store, Options(50), dir), std::runtime_error);
  EXPECT_TRUE(fs::exists(dir + "/nonfinite.ckpt"));
  EXPECT_FALSE(fs::exists(dir + "/final.ckpt"));
}

TEST(FeatureStoreTest, CachesComputedFeatures) {
  const std::string dir = testing::TempDir("features");
  Waveform w;
  w.samples.resize(12000);
  for (size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = 0.3 * std::sin(0.05 * i);
  WriteWav16(dir + "/a.wav", w);
  UtteranceRecord r;
  r.id = "a";
  r.audio_path = dir + "/a.wav";

  FeatureStore cold(testing::TinyMelConfig(), dir + "/cache");
  const UtteranceFeatures a = cold.Get(r);
  EXPECT_EQ(a.mel.frames(), NumFrames(12000, 1200, 300));
  EXPECT_EQ(a.mel.n_mels(), 20);
  EXPECT_EQ(a.f0.size(), static_cast<size_t>(a.mel.frames()));
  EXPECT_FALSE(fs::is_empty(dir + "/cache"));

  FeatureStore warm(testing::TinyMelConfig(), dir + "/cache");
  EXPECT_EQ(warm.Get(r).mel.values, a.mel.values);
  EXPECT_EQ(warm.Get(r).f0.hz, a.f0.hz);
}

}  // namespace
}  // namespace emovc
