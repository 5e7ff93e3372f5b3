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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <glog/logging.h>

#include "emovc/diagnostics.h"
#include "emovc/emotion_embedder.h"
#include "emovc/evaluation.h"
#include "emovc/losses.h"
#include "emovc/networks.h"
#include "emovc/trainer.h"
#include "test_util.h"

namespace emovc {
namespace {

using ad::Matrix;
using ad::Var;
using losses::StyleLossMode;
using testing::RandomMatrix;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// Elementwise-loop oracles.
double OracleMeanAbs(const Matrix& a, const Matrix& b) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) sum += std::fabs(a(r, c) - b(r, c));
  }
  return sum / static_cast<double>(a.rows() * a.cols());
}

double OracleNorm(const Matrix& a, const Matrix& b) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    double la = 0.0, lb = 0.0;
    for (Eigen::Index r = 0; r < a.rows(); ++r) la += std::fabs(a(r, c));
    for (Eigen::Index r = 0; r < b.rows(); ++r) lb += std::fabs(b(r, c));
    sum += std::fabs(la - lb);
  }
  return sum / static_cast<double>(a.cols());
}

std::vector<double> OracleNormalize(const std::vector<double>& hz, const std::vector<bool>& v) {
  double sum = 0.0;
  int n = 0;
  for (size_t i = 0; i < hz.size(); ++i) {
    if (v[i]) {
      sum += hz[i];
      ++n;
    }
  }
  std::vector<double> out(hz.size(), 0.0);
  for (size_t i = 0; i < hz.size(); ++i) {
    if (v[i] && n > 0) out[i] = hz[i] / (sum / n);
  }
  return out;
}

double OracleF0(const std::vector<double>& a, const std::vector<double>& b,
                const std::vector<bool>& v) {
  const auto na = OracleNormalize(a, v);
  const auto nb = OracleNormalize(b, v);
  double sum = 0.0;
  for (size_t i = 0; i < na.size(); ++i) sum += std::fabs(na[i] - nb[i]);
  return sum / static_cast<double>(na.size());
}

Outcome LossOracles() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> hz(80.0, 300.0);
  std::bernoulli_distribution voiced(0.7);
  double worst = 0.0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::fabs(got - want)); };
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    const Matrix a = RandomMatrix(rows, cols, rng), b = RandomMatrix(rows, cols, rng);
    const Var va = Var::Constant(a), vb = Var::Constant(b);
    track(losses::InvLoss(va, vb).item(), OracleMeanAbs(a, b));
    track(losses::DiversityLoss(va, vb).item(), OracleMeanAbs(a, b));
    track(losses::CycleLoss(va, vb).item(), OracleMeanAbs(a, b));
    track(losses::AsrLoss(va, vb).item(), OracleMeanAbs(a, b));
    const Matrix c = RandomMatrix(rows + 3, cols, rng);
    track(losses::NormLoss(va, Var::Constant(c)).item(), OracleNorm(a, c));

    const Eigen::VectorXd e1 = RandomMatrix(64, 1, rng), e2 = RandomMatrix(64, 1, rng),
                          e3 = RandomMatrix(64, 1, rng);
    track(losses::DemoLoss(e1, e2), OracleMeanAbs(e1, e2));
    track(losses::StyleReconstructionLoss(e1, e2, e3, StyleLossMode::kVanilla),
          OracleMeanAbs(e1, e2));
    track(losses::StyleReconstructionLoss(e1, e2, e3, StyleLossMode::kAugmented),
          OracleMeanAbs(e1, e2) + OracleMeanAbs(e3, e2) + OracleMeanAbs(e1, e3));

    const int frames = dim(rng) + 1;
    std::vector<double> fa(frames), fb(frames);
    std::vector<bool> mask(frames);
    Matrix ta(1, frames), tb(1, frames);
    for (int t = 0; t < frames; ++t) {
      ta(0, t) = fa[t] = hz(rng);
      tb(0, t) = fb[t] = hz(rng);
      mask[t] = voiced(rng);
    }
    track(losses::F0Loss(Var::Constant(ta), Var::Constant(tb), mask).item(),
          OracleF0(fa, fb, mask));
    F0Contour ca{fa, mask}, cb{fb, mask};
    for (int t = 0; t < frames; ++t) {
      if (!mask[t]) ca.hz[t] = cb.hz[t] = 0.0;
    }
    track(losses::F0Loss(ca, cb), OracleF0(ca.hz, cb.hz, mask));
  }
  const double secs = Seconds(start);
  return {worst <= 1e-9 && secs < 10.0, Fmt("max |err| %.3g over 100 inputs, %.2f s", worst, secs)};
}

Outcome StyleStructure() {
  std::mt19937_64 rng(202);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd ref = RandomMatrix(64, 1, rng), trg = RandomMatrix(64, 1, rng);
    const double vanilla = losses::StyleReconstructionLoss(ref, trg, ref, StyleLossMode::kVanilla);
    const double augmented =
        losses::StyleReconstructionLoss(ref, trg, ref, StyleLossMode::kAugmented);
    ok = ok && augmented == 2.0 * vanilla;
    const Eigen::VectorXd same = Eigen::VectorXd::Constant(64, ref(0));
    ok = ok && losses::StyleReconstructionLoss(same, same, same, StyleLossMode::kAugmented) == 0.0;
  }
  return {ok, ok ? "exact on 100 random embeddings" : "exact relation violated"};
}

Outcome ObjectiveArithmetic() {
  losses::GeneratorLosses parts;
  parts.adv = parts.spk = parts.style = parts.div = parts.asr = parts.norm = parts.cycle =
      parts.f0 = parts.demo = parts.inv = 1.0;
  const losses::LossWeights w;
  const double g = losses::GeneratorObjective(parts, w);
  const double d = losses::DiscriminatorObjective(1.0, 2.0, w);
  return {g == 29.5 && d == -0.8, Fmt("generator %.17g, discriminator %.17g", g, d)};
}

Outcome GradientChecks() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  double worst = 0.0;
  auto check = [&](const std::function<Var()>& f, const Var& p, int coords = 64) {
    const double err = testing::GradCheck(f, p, coords, rng);
    if (std::getenv("EMOVC_GRADCHECK_VERBOSE")) std::fprintf(stderr, "gradcheck %.3g\n", err);
    worst = std::max(worst, err);
  };

  const Var e1 = Var::Parameter(RandomMatrix(64, 1, rng));
  const Var e2 = Var::Parameter(RandomMatrix(64, 1, rng));
  const Var e3 = Var::Parameter(RandomMatrix(64, 1, rng));
  check([&] { return losses::DemoLoss(e1, e2); }, e1);
  check([&] { return losses::DemoLoss(e1, e2); }, e2);
  const Var c1 = Var::Parameter(RandomMatrix(16, 8, rng));
  const Var c2 = Var::Parameter(RandomMatrix(16, 8, rng));
  check([&] { return losses::InvLoss(c1, c2); }, c1);
  for (const Var& p : {e1, e2, e3}) {
    check([&] { return losses::StyleReconstructionLoss(e1, e2, e3, StyleLossMode::kAugmented); },
          p);
  }
  const Var real = Var::Parameter(RandomMatrix(1, 1, rng));
  const Var fake = Var::Parameter(RandomMatrix(1, 1, rng));
  using losses::AdversarialSide;
  check([&] { return losses::AdversarialLoss(real, fake, AdversarialSide::kGenerator); }, fake);
  check([&] { return losses::AdversarialLoss(real, fake, AdversarialSide::kDiscriminator); },
        real);
  check([&] { return losses::AdversarialLoss(real, fake, AdversarialSide::kDiscriminator); },
        fake);
  const Var logits = Var::Parameter(RandomMatrix(5, 1, rng));
  check([&] {
    return losses::SpeakerAdvLoss(logits, 3, losses::SpeakerPhase::kGeneratorTargetsTarget);
  }, logits);

  // demo distance through the frozen classifier and the generator.
  const NetworkConfig cfg = testing::TinyNetConfig();
  Generator gen(cfg, 11);
  EmotionClassifier c_emo(cfg, kNumEmotions, 12);
  const Var x = Var::Constant(RandomMatrix(cfg.n_mels, 24, rng));
  const Var f0 = Var::Constant(Matrix::Ones(1, 24));
  const Var style = Var::Parameter(RandomMatrix(cfg.style_dim, 1, rng));
  auto composed = [&] {
    return losses::DemoLoss(c_emo.Embed(x), c_emo.Embed(gen.Forward(x, f0, style)));
  };
  check(composed, style, 32);
  // Conv biases ahead of instance norm have an identically zero gradient, so
  // only weights that reach the output are checked.
  for (const char* name : {"stem.weight", "encoder.1.conv2.weight", "decoder.1.norm1.fc.weight",
                           "decoder.2.conv1.weight", "to_mel.weight", "to_mel.bias"}) {
    check(composed, gen.params().Get(name), 12);
  }
  const double secs = Seconds(start);
  return {worst <= 1e-3 && secs < 120.0,
          Fmt("max relative error %.3g, %.1f s", worst, secs)};
}

struct TrainerFixture {
  FeatureStore store{testing::TinyMelConfig()};
  Manifest manifest;
  std::unique_ptr<TupleSampler> sampler;
  std::shared_ptr<EmotionClassifier> c_emo;

  TrainerFixture(int speakers, int clips, int frames) {
    manifest = testing::AddSyntheticCorpus(store, speakers, clips, frames, 77);
    sampler = std::make_unique<TupleSampler>(manifest.records, DomainKind::kSpeaker);
    c_emo = std::make_shared<EmotionClassifier>(testing::TinyNetConfig(speakers), kNumEmotions,
                                                 55);
  }

  std::unique_ptr<VcTrainer> Make(uint64_t seed, losses::LossWeights w = {},
                                  StyleLossMode style = StyleLossMode::kAugmented) const {
    TrainConfig tc = testing::TinyTrainConfig(seed);
    tc.style_loss = style;
    auto t = std::make_unique<VcTrainer>(testing::TinyNetConfig(manifest.num_speakers()), tc, w,
                                         store.config());
    t->SetEmotionClassifier(c_emo);
    t->speaker_labels = manifest.speaker_labels;
    return t;
  }
};

bool Changed(const nn::ParamStore& p, const std::vector<Matrix>& before) {
  return !p.BitEqual(before);
}

Outcome Isolation() {
  TrainerFixture fx(2, 6, 40);
  auto trainer = fx.Make(5);
  VcNetworks& n = trainer->nets();
  const TrainBatch batch = testing::MakeBatch(fx.manifest, fx.store, 2, 32,
                                              n.config.latent_dim, 9);
  std::ostringstream why;

  auto g = n.generator.params().Snapshot(), se = n.style_encoder.params().Snapshot(),
       m = n.mapping.params().Snapshot(), c = n.discriminator.params().Snapshot(),
       csp = n.speaker_classifier.params().Snapshot(),
       et = fx.c_emo->trunk_params().Snapshot(), eh = fx.c_emo->head_params().Snapshot();
  trainer->DiscriminatorStep(batch, 0);
  bool ok = n.generator.params().BitEqual(g) && n.style_encoder.params().BitEqual(se) &&
            n.mapping.params().BitEqual(m) && fx.c_emo->trunk_params().BitEqual(et) &&
            fx.c_emo->head_params().BitEqual(eh);
  if (!ok) why << "discriminator step touched G/SE/M/C_emo; ";
  if (!Changed(n.discriminator.params(), c)) {
    ok = false;
    why << "discriminator step did not update C; ";
  }

  g = n.generator.params().Snapshot();
  c = n.discriminator.params().Snapshot();
  csp = n.speaker_classifier.params().Snapshot();
  trainer->GeneratorStep(batch, 1);
  const bool g_ok = n.discriminator.params().BitEqual(c) &&
                    n.speaker_classifier.params().BitEqual(csp) &&
                    fx.c_emo->trunk_params().BitEqual(et) && fx.c_emo->head_params().BitEqual(eh);
  if (!g_ok) why << "generator step touched C/C_sp/C_emo; ";
  if (!Changed(n.generator.params(), g)) {
    ok = false;
    why << "generator step did not update G; ";
  }
  ok = ok && g_ok;

  EmotionClassifier model(testing::TinyNetConfig(), kNumEmotions, 8);
  model.LoadTrunkFrom(n.style_encoder);
  const auto trunk = model.trunk_params().Snapshot();
  const auto head = model.head_params().Snapshot();
  std::vector<MelSpectrogram> mels;
  std::vector<int> labels;
  for (const auto& r : fx.manifest.records) {
    mels.push_back(fx.store.Get(r).mel);
    labels.push_back(r.emotion->index);
  }
  Stage2Config s2;
  s2.steps = 5;
  s2.batch_size = 4;
  TrainEmotionHead(&model, mels, labels, s2);
  const bool s2_ok = model.trunk_params().BitEqual(trunk) && Changed(model.head_params(), head);
  if (!s2_ok) why << "stage-two training moved the trunk or left the head unchanged; ";
  ok = ok && s2_ok;
  return {ok, ok ? "D step, G step and stage-two head training respect frozen groups"
                 : why.str()};
}

Outcome ToyOverfit() {
  const auto start = std::chrono::steady_clock::now();
  TrainerFixture fx(2, 8, 48);
  auto trainer = fx.Make(21);
  const TrainBatch probe = testing::MakeBatch(fx.manifest, fx.store, 4, 32,
                                              trainer->nets().config.latent_dim, 31);
  losses::GeneratorLosses at10, at200;
  for (int step = 1; step <= 200; ++step) {
    trainer->TrainStep(*fx.sampler, fx.store);
    if (step == 10) at10 = trainer->EvaluateGenerator(probe, 0);
    if (step == 200) at200 = trainer->EvaluateGenerator(probe, 0);
  }
  const double secs = Seconds(start);
  const bool ok = at200.total < at10.total && at200.cycle < at10.cycle && secs < 900.0;
  return {ok, Fmt("objective %.4f -> %.4f, ", at10.total, at200.total) +
                  Fmt("cycle %.4f -> %.4f, %.0f s", at10.cycle, at200.cycle, secs)};
}

bool SameDiscriminator(const losses::DiscriminatorLosses& a, const losses::DiscriminatorLosses& b) {
  return a.adv == b.adv && a.aspk == b.aspk && a.total == b.total;
}

Outcome AblationFidelity() {
  TrainerFixture fx(2, 6, 40);
  losses::LossWeights no_demo;
  no_demo.demo = 0.0;
  auto full = fx.Make(13);
  auto ablate_demo = fx.Make(13, no_demo);
  auto ablate_style = fx.Make(13, {}, StyleLossMode::kVanilla);
  const auto r_full = full->TrainStep(*fx.sampler, fx.store);
  const auto r_demo = ablate_demo->TrainStep(*fx.sampler, fx.store);
  const auto r_style = ablate_style->TrainStep(*fx.sampler, fx.store);
  const auto& a = *r_full.generator;
  const auto& d = *r_demo.generator;
  const auto& s = *r_style.generator;

  std::ostringstream why;
  bool ok = SameDiscriminator(*r_full.discriminator, *r_demo.discriminator) &&
            SameDiscriminator(*r_full.discriminator, *r_style.discriminator);
  if (!ok) why << "discriminator terms changed; ";
  const bool demo_ok = a.adv == d.adv && a.spk == d.spk && a.style == d.style &&
                       a.div == d.div && a.asr == d.asr && a.norm == d.norm &&
                       a.cycle == d.cycle && a.f0 == d.f0 && a.inv == d.inv &&
                       a.demo_evaluated && !d.demo_evaluated && d.demo == 0.0 && a.demo != 0.0;
  if (!demo_ok) why << "demo ablation leaked into other terms; ";
  const bool style_ok = a.adv == s.adv && a.spk == s.spk && a.div == s.div &&
                        a.asr == s.asr && a.norm == s.norm && a.cycle == s.cycle &&
                        a.f0 == s.f0 && a.demo == s.demo && a.inv == s.inv &&
                        a.style != s.style;
  if (!style_ok) why << "style ablation leaked into other terms; ";
  ok = ok && demo_ok && style_ok;
  return {ok, ok ? "only demo (resp. style) and the totals differ on step 1" : why.str()};
}

Outcome MetricFixtures() {
  std::ostringstream why;
  const F0Contour a{{1, 2, 3, 4}, {true, true, true, true}};
  const F0Contour b{{2, 4, 5, 9}, {true, true, true, true}};
  const double xs[] = {1, 2, 3, 4}, ys[] = {2, 4, 5, 9};
  double mx = 0, my = 0;
  for (int i = 0; i < 4; ++i) {
    mx += xs[i] / 4;
    my += ys[i] / 4;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double pearson = sxy / std::sqrt(sxx * syy);
  const auto pcc = eval::Pcc(a, b);
  bool ok = pcc && std::fabs(*pcc - pearson) <= 1e-9;
  if (!ok) why << "pcc; ";
  const double cer = eval::Cer("abc", "abd");
  if (std::fabs(cer - 100.0 / 3.0) > 5e-3) {
    ok = false;
    why << "cer " << cer << "; ";
  }
  std::mt19937_64 rng(808);
  for (int i = 0; i < 100; ++i) {
    const EmotionEmbedding e1{RandomMatrix(64, 1, rng)}, e2{RandomMatrix(64, 1, rng)};
    if (eval::MaeEmbed(e1, e2) != losses::DemoLoss(e1.values, e2.values)) {
      ok = false;
      why << "mae_embed != demo_loss; ";
      break;
    }
  }
  const double sss = eval::Sss(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1));
  if (std::fabs(sss - 0.7071) > 1e-4) {
    ok = false;
    why << "sss " << sss << "; ";
  }
  return {ok, ok ? Fmt("pcc %.12f, cer %.2f%%, sss %.5f", *pcc, cer, sss) : why.str()};
}

EmbeddingSet Blobs(bool by_emotion, std::mt19937_64& rng) {
  constexpr int kDim = 16, kSpeakers = 3, kEmotions = 3, kPer = 4;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> centres;
  for (int k = 0; k < std::max(kSpeakers, kEmotions); ++k) {
    Eigen::VectorXd c(kDim);
    for (int d = 0; d < kDim; ++d) c(d) = 4.0 * normal(rng);
    centres.push_back(c);
  }
  EmbeddingSet set;
  for (int s = 0; s < kSpeakers; ++s) {
    for (int e = 0; e < kEmotions; ++e) {
      for (int i = 0; i < kPer; ++i) {
        Eigen::VectorXd v = centres[by_emotion ? e : s];
        for (int d = 0; d < kDim; ++d) v(d) += normal(rng);
        set.ids.push_back(std::to_string(set.ids.size()));
        set.vectors.push_back(v);
        set.speakers.push_back("spk" + std::to_string(s));
        set.emotions.push_back(std::string(EmotionName(e)));
      }
    }
  }
  return set;
}

Outcome LeakageDetection() {
  std::mt19937_64 rng(909);
  int emotion_hits = 0, speaker_hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    emotion_hits += ScoreLeakage(Blobs(true, rng)).leakage_flag ? 1 : 0;
    speaker_hits += ScoreLeakage(Blobs(false, rng)).leakage_flag ? 0 : 1;
  }
  return {emotion_hits == 100 && speaker_hits == 100,
          Fmt("emotion-aligned flagged %.0f/100, speaker-aligned clear %.0f/100", emotion_hits,
              speaker_hits)};
}

Outcome Shapes() {
  const NetworkConfig cfg = testing::TinyNetConfig(3, 80);
  const VcNetworks nets(cfg, 4);
  const EmotionClassifier c_emo(cfg, kNumEmotions, 6);
  std::mt19937_64 rng(1010);
  std::ostringstream why;
  bool ok = true;
  MelSpectrogram mel;
  mel.values = RandomMatrix(64, 80, rng);
  const auto style = StyleEncode(mel, {1, DomainKind::kSpeaker}, nets);
  const auto mapped = MappingForward(SampleNoise(cfg.latent_dim, rng), {2, DomainKind::kSpeaker},
                                     nets);
  const auto emb = ExtractEmbedding(mel, c_emo);
  const auto trunk = StyleTrunkOutput(mel, nets);
  const auto logits = ClassifyEmotion(mel, c_emo);
  if (style.values.size() != 64 || mapped.values.size() != 64 || emb.values.size() != 64) {
    ok = false;
    why << "embedding width; ";
  }
  if (trunk.size() != 512) {
    ok = false;
    why << "trunk width " << trunk.size() << "; ";
  }
  if (logits.size() != 5) {
    ok = false;
    why << "logit width " << logits.size() << "; ";
  }
  for (int frames : {8, 77, 192, 500}) {
    MelSpectrogram x;
    x.values = RandomMatrix(frames, 80, rng);
    const std::vector<double> f0(frames, 1.0);
    const MelSpectrogram y = GeneratorForward(x, f0, style, nets);
    if (y.frames() != frames || y.n_mels() != 80) {
      ok = false;
      why << "generator " << frames << " -> " << y.frames() << "x" << y.n_mels() << "; ";
    }
  }
  return {ok, ok ? "widths 64/512/5, generator keeps {8, 77, 192, 500} frames" : why.str()};
}

bool SameReport(const losses::LossReport& a, const losses::LossReport& b) {
  return losses::ToJson(a).dump() == losses::ToJson(b).dump() &&
         SameDiscriminator(*a.discriminator, *b.discriminator) &&
         a.generator->total == b.generator->total && a.generator->cycle == b.generator->cycle;
}

Outcome DeterminismAndRoundTrip() {
  TrainerFixture fx(2, 6, 40);
  std::ostringstream why;
  bool ok = true;
  auto t1 = fx.Make(17), t2 = fx.Make(17);
  for (int i = 0; i < 3; ++i) {
    if (!SameReport(t1->TrainStep(*fx.sampler, fx.store), t2->TrainStep(*fx.sampler, fx.store))) {
      ok = false;
      why << "reruns diverged at step " << i + 1 << "; ";
      break;
    }
  }

  const std::string dir = testing::TempDir("acceptance");
  const std::string path = dir + "/rt.ckpt";
  t1->Save(path);
  auto restored = fx.Make(999);
  restored->Restore(LoadCheckpoint(path));
  const TrainBatch probe = testing::MakeBatch(fx.manifest, fx.store, 2, 32,
                                              t1->nets().config.latent_dim, 41);
  const MelSpectrogram& src = fx.store.Get(fx.manifest.records[0]).mel;
  const std::vector<double> f0 = NormalizeF0(fx.store.Get(fx.manifest.records[0]).f0);
  const StyleEmbedding s = StyleEncode(src, {1, DomainKind::kSpeaker}, t1->nets());
  const auto before = GeneratorForward(src, f0, s, t1->nets()).values;
  const auto after = GeneratorForward(src, f0, s, restored->nets()).values;
  const auto loaded = LoadVcNetworks(path);
  const auto standalone = GeneratorForward(src, f0, s, *loaded).values;
  if (!(before.array() == after.array()).all() || !(before.array() == standalone.array()).all()) {
    ok = false;
    why << "restored generator forward differs; ";
  }
  const auto e1 = t1->EvaluateGenerator(probe, 0), e2 = restored->EvaluateGenerator(probe, 0);
  if (e1.total != e2.total) {
    ok = false;
    why << "restored probe objective differs; ";
  }
  if (!SameReport(t1->TrainStep(*fx.sampler, fx.store),
                  restored->TrainStep(*fx.sampler, fx.store))) {
    ok = false;
    why << "training after restore diverged; ";
  }
  std::filesystem::remove_all(dir);
  return {ok, ok ? "3-step reruns and checkpoint round trip are bit-identical" : why.str()};
}

}  // namespace
}  // namespace emovc

int main(int, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_minloglevel = 2;
  using Criterion = std::pair<const char*, std::function<emovc::Outcome()>>;
  const Criterion criteria[] = {
      {"loss-oracle equivalence", emovc::LossOracles},
      {"augmented style-loss structure", emovc::StyleStructure},
      {"objective arithmetic", emovc::ObjectiveArithmetic},
      {"gradient checks", emovc::GradientChecks},
      {"isolation contracts", emovc::Isolation},
      {"toy overfit", emovc::ToyOverfit},
      {"ablation fidelity", emovc::AblationFidelity},
      {"metric fixtures", emovc::MetricFixtures},
      {"leakage diagnostic", emovc::LeakageDetection},
      {"shape contracts", emovc::Shapes},
      {"determinism and round trip", emovc::DeterminismAndRoundTrip},
  };
  int failures = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    emovc::Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
