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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <glog/logging.h>

#include "emovc/config.h"
#include "emovc/npy.h"

namespace emovc {

namespace fs = std::filesystem;
using ad::Var;
using losses::LossReport;

std::string_view StylePolicyName(StylePolicy p) {
  switch (p) {
    case StylePolicy::kAlternate: return "alternate";
    case StylePolicy::kEncoder: return "encoder";
    case StylePolicy::kMapping: return "mapping";
  }
  return "alternate";
}

StylePolicy ParseStylePolicy(std::string_view name) {
  if (name == "alternate") return StylePolicy::kAlternate;
  if (name == "encoder") return StylePolicy::kEncoder;
  if (name == "mapping") return StylePolicy::kMapping;
  throw std::invalid_argument("unknown style policy '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Features

std::string CacheDirFromEnv() {
  const char* dir = std::getenv("EMOVC_CACHE");
  return dir ? std::string(dir) : std::string();
}

FeatureStore::FeatureStore(MelConfig cfg, std::string cache_dir)
    : cfg_(cfg), cache_dir_(std::move(cache_dir)) {}

void FeatureStore::Put(const std::string& id, UtteranceFeatures f) {
  memo_[id] = std::move(f);
}

namespace {

bool IsMelFile(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  return ext == ".npy" || ext == ".npz";
}

// A stored mel has no waveform to track pitch on, so every frame is marked
// voiced and the pitch comes from the mel-domain tracker.
UtteranceFeatures FeaturesFromMel(Eigen::MatrixXd values, const MelConfig& cfg) {
  if (values.cols() != cfg.n_mels) {
    throw FormatError("mel file has " + std::to_string(values.cols()) + " bins, expected " +
                      std::to_string(cfg.n_mels));
  }
  UtteranceFeatures f;
  f.mel.values = std::move(values);
  f.mel.hop_length = cfg.hop_length;
  const Var track = MelPitchTracker(cfg).Track(MelToVar(f.mel));
  f.f0.hz.assign(track.value().data(), track.value().data() + track.cols());
  f.f0.voiced.assign(track.cols(), true);
  return f;
}

std::string CacheKey(const std::string& path, const MelConfig& cfg) {
  std::ostringstream key;
  key << fs::absolute(path).string() << '|' << fs::file_size(path) << '|'
      << fs::last_write_time(path).time_since_epoch().count() << '|' << ToJson(cfg).dump();
  std::ostringstream hex;
  hex << std::hex << Fnv1a(key.str());
  return hex.str();
}

}  // namespace

UtteranceFeatures LoadUtteranceFeatures(const std::string& path, const MelConfig& cfg) {
  if (IsMelFile(path)) {
    if (fs::path(path).extension() == ".npy") return FeaturesFromMel(npy::ReadNpy(path), cfg);
    auto arrays = npy::ReadNpz(path);
    if (!arrays.contains("mel")) throw FormatError(path + ": npz has no 'mel' member");
    return FeaturesFromMel(arrays.at("mel"), cfg);
  }
  const Waveform w = LoadAndResample(path);
  UtteranceFeatures f;
  f.mel = ComputeMelSpectrogram(w, cfg);
  f.f0 = ExtractF0(w, cfg);
  return f;
}

const UtteranceFeatures& FeatureStore::Get(const UtteranceRecord& r) {
  if (auto it = memo_.find(r.id); it != memo_.end()) return it->second;

  std::string cache_file;
  if (!cache_dir_.empty() && fs::exists(r.audio_path)) {
    cache_file = (fs::path(cache_dir_) / (CacheKey(r.audio_path, cfg_) + ".npz")).string();
    if (fs::exists(cache_file)) {
      try {
        auto arrays = npy::ReadNpz(cache_file);
        UtteranceFeatures f;
        f.mel.values = arrays.at("mel");
        f.mel.hop_length = cfg_.hop_length;
        const Eigen::MatrixXd& hz = arrays.at("f0");
        const Eigen::MatrixXd& voiced = arrays.at("voiced");
        for (Eigen::Index i = 0; i < hz.size(); ++i) {
          f.f0.hz.push_back(hz(i));
          f.f0.voiced.push_back(voiced(i) != 0.0);
        }
        return memo_[r.id] = std::move(f);
      } catch (const std::exception& e) {
        LOG(WARNING) << "ignoring unreadable cache entry " << cache_file << ": " << e.what();
      }
    }
  }

  UtteranceFeatures f = LoadUtteranceFeatures(r.audio_path, cfg_);
  if (!cache_file.empty()) {
    const Eigen::Index n = static_cast<Eigen::Index>(f.f0.size());
    Eigen::MatrixXd hz(1, n), voiced(1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      hz(0, i) = f.f0.hz[i];
      voiced(0, i) = f.f0.voiced[i] ? 1.0 : 0.0;
    }
    fs::create_directories(cache_dir_);
    npy::WriteNpz(cache_file, {{"mel", f.mel.values}, {"f0", hz}, {"voiced", voiced}});
  }
  return memo_[r.id] = std::move(f);
}

ad::Matrix CropMel(const MelSpectrogram& mel, int offset, int frames, double pad_value) {
  ad::Matrix out = ad::Matrix::Constant(mel.n_mels(), frames, pad_value);
  const int n = std::max(0, std::min(frames, mel.frames() - offset));
  if (n > 0) out.leftCols(n) = mel.values.middleRows(offset, n).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Trainer

struct VcTrainer::GeneratorGraph {
  Var total;
  losses::GeneratorLosses parts;
};

struct VcTrainer::DiscriminatorGraph {
  Var total;
  losses::DiscriminatorLosses parts;
};

VcTrainer::VcTrainer(const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
                     const losses::LossWeights& weights, const MelConfig& mel_cfg)
    : net_cfg_(net_cfg),
      train_cfg_(train_cfg),
      weights_(weights),
      mel_cfg_(mel_cfg),
      nets_(net_cfg, train_cfg.seed),
      asr_(std::make_shared<losses::IdentityContentExtractor>()),
      pitch_(mel_cfg),
      rng_(train_cfg.seed) {
  if (net_cfg.n_mels != mel_cfg.n_mels) {
    throw ConfigError("network n_mels does not match the mel configuration");
  }
  AdamWOptions opt;
  opt.learning_rate = train_cfg.learning_rate;
  opt.weight_decay = train_cfg.weight_decay;
  opt.beta1 = train_cfg.beta1;
  opt.beta2 = train_cfg.beta2;
  for (auto& [name, store] : nets_.Groups()) optimizers_.emplace(name, AdamW(store, opt));
}

void VcTrainer::SetEmotionClassifier(std::shared_ptr<EmotionClassifier> c_emo) {
  if (c_emo && c_emo->trunk_config().n_mels != net_cfg_.n_mels) {
    throw ConfigError("emotion classifier expects a different number of mel bins");
  }
  c_emo_ = std::move(c_emo);
}

void VcTrainer::SetContentExtractor(std::shared_ptr<const losses::ContentExtractor> asr) {
  asr_ = std::move(asr);
}

bool VcTrainer::UsesMapping(long step_index) const {
  switch (train_cfg_.style_policy) {
    case StylePolicy::kAlternate: return step_index % 2 == 1;
    case StylePolicy::kEncoder: return false;
    case StylePolicy::kMapping: return true;
  }
  return false;
}

void VcTrainer::ZeroAllGrads() {
  for (auto& [name, store] : nets_.Groups()) store->ZeroGrad();
  if (c_emo_) {
    c_emo_->trunk_params().ZeroGrad();
    c_emo_->head_params().ZeroGrad();
  }
}

VcTrainer::GeneratorGraph VcTrainer::BuildGeneratorGraph(const TrainBatch& batch,
                                                         long step_index) const {
  if (batch.samples.empty()) throw std::invalid_argument("empty batch");
  if (weights_.demo > 0 && !c_emo_) {
    throw ConfigError("demo term enabled but no emotion classifier checkpoint was given");
  }
  const bool mapping = UsesMapping(step_index);
  const auto& w = weights_;
  const auto& G = nets_.generator;
  const auto& SE = nets_.style_encoder;
  const double inv_b = 1.0 / static_cast<double>(batch.samples.size());

  GeneratorGraph out;
  losses::GeneratorLosses& p = out.parts;
  p.demo_evaluated = w.demo > 0;
  for (const TrainingSample& s : batch.samples) {
    const Var x_src = Var::Constant(s.mel_src);
    const Var f0 = Var::Constant(s.f0_src);
    const Var x_ref = Var::Constant(s.mel_ref);
    const Var x_ref2 = Var::Constant(s.mel_ref2);
    const Eigen::Index frames = x_src.cols();

    const Var se_ref = SE.Encode(x_ref, s.trg_domain);
    const Var se_ref2 = SE.Encode(x_ref2, s.trg_domain);
    Var s_trg = se_ref, s_trg2 = se_ref2;
    if (mapping) {
      s_trg = nets_.mapping.Forward(Var::Constant(s.z1), s.trg_domain);
      s_trg2 = nets_.mapping.Forward(Var::Constant(s.z2), s.trg_domain);
    }

    const Var code_src = G.Encode(x_src);
    const Var x_fake = G.Decode(code_src, f0, s_trg, frames);
    const Var x_fake2 = G.Decode(code_src, f0, s_trg2, frames).Detach();

    const Var adv = losses::AdversarialLoss(
        Var(), nets_.discriminator.Logit(x_fake, s.trg_domain),
        losses::AdversarialSide::kGenerator);
    const Var spk = losses::SpeakerAdvLoss(nets_.speaker_classifier.Logits(x_fake),
                                           s.trg_domain.index,
                                           losses::SpeakerPhase::kGeneratorTargetsTarget);
    const Var style = losses::StyleReconstructionLoss(
        se_ref, SE.Encode(x_fake, s.trg_domain), se_ref2, train_cfg_.style_loss);
    const Var div = losses::DiversityLoss(x_fake, x_fake2);
    const Var asr = losses::AsrLoss(asr_->Features(x_src), asr_->Features(x_fake));
    const Var norm = losses::NormLoss(x_src, x_fake);
    const Var s_src = SE.Encode(x_src, s.src_domain);
    const Var cycle = losses::CycleLoss(x_src, G.Forward(x_fake, f0, s_src));
    const Var f0_term =
        losses::F0Loss(pitch_.Track(x_src), pitch_.Track(x_fake), s.voiced_src);
    Var demo = Var::Scalar(0.0);
    if (w.demo > 0) {
      emotion_calls_ += 2;
      demo = losses::DemoLoss(c_emo_->Embed(x_src), c_emo_->Embed(x_fake));
    }
    const Var inv = losses::InvLoss(code_src, G.Encode(x_fake));

    Var total = adv;
    total = ad::Add(total, ad::Scale(spk, w.spk));
    total = ad::Add(total, ad::Scale(style, w.style));
    total = ad::Sub(total, ad::Scale(div, w.div));
    total = ad::Add(total, ad::Scale(asr, w.asr));
    total = ad::Add(total, ad::Scale(norm, w.norm));
    total = ad::Add(total, ad::Scale(cycle, w.cycle));
    total = ad::Add(total, ad::Scale(f0_term, w.f0));
    if (w.demo > 0) total = ad::Add(total, ad::Scale(demo, w.demo));
    total = ad::Add(total, ad::Scale(inv, w.inv));
    total = ad::Scale(total, inv_b);
    out.total = out.total.defined() ? ad::Add(out.total, total) : total;

    p.adv += adv.item() * inv_b;
    p.spk += spk.item() * inv_b;
    p.style += style.item() * inv_b;
    p.div += div.item() * inv_b;
    p.asr += asr.item() * inv_b;
    p.norm += norm.item() * inv_b;
    p.cycle += cycle.item() * inv_b;
    p.f0 += f0_term.item() * inv_b;
    p.demo += demo.item() * inv_b;
    p.inv += inv.item() * inv_b;
  }
  p.total = out.total.item();
  return out;
}

VcTrainer::DiscriminatorGraph VcTrainer::BuildDiscriminatorGraph(const TrainBatch& batch,
                                                                 long step_index) const {
  if (batch.samples.empty()) throw std::invalid_argument("empty batch");
  const bool mapping = UsesMapping(step_index);
  const double inv_b = 1.0 / static_cast<double>(batch.samples.size());

  DiscriminatorGraph out;
  for (const TrainingSample& s : batch.samples) {
    const Var x_src = Var::Constant(s.mel_src);
    const Var style =
        (mapping ? nets_.mapping.Forward(Var::Constant(s.z1), s.trg_domain)
                 : nets_.style_encoder.Encode(Var::Constant(s.mel_ref), s.trg_domain))
            .Detach();
    const Var x_fake =
        nets_.generator.Forward(x_src, Var::Constant(s.f0_src), style).Detach();

    const Var adv = losses::AdversarialLoss(nets_.discriminator.Logit(x_src, s.src_domain),
                                            nets_.discriminator.Logit(x_fake, s.trg_domain),
                                            losses::AdversarialSide::kDiscriminator);
    const Var aspk = losses::SpeakerAdvLoss(
        nets_.speaker_classifier.Logits(x_fake), s.src_domain.index,
        losses::SpeakerPhase::kDiscriminatorClassifiesSource);
    const Var total = ad::Scale(ad::Add(adv, ad::Scale(aspk, weights_.aspk)), inv_b);
    out.total = out.total.defined() ? ad::Add(out.total, total) : total;
    out.parts.adv -= adv.item() * inv_b;
    out.parts.aspk += aspk.item() * inv_b;
  }
  out.parts.total = out.total.item();
  return out;
}

losses::GeneratorLosses VcTrainer::EvaluateGenerator(const TrainBatch& batch,
                                                     long step_index) const {
  return BuildGeneratorGraph(batch, step_index).parts;
}

losses::DiscriminatorLosses VcTrainer::EvaluateDiscriminator(const TrainBatch& batch,
                                                             long step_index) const {
  return BuildDiscriminatorGraph(batch, step_index).parts;
}

LossReport VcTrainer::DiscriminatorStep(const TrainBatch& batch, long step_index) {
  ZeroAllGrads();
  DiscriminatorGraph g = BuildDiscriminatorGraph(batch, step_index);
  LossReport report;
  report.step = step_index;
  report.discriminator = g.parts;
  if (!std::isfinite(g.parts.total)) {
    throw NonFiniteLoss("non-finite discriminator objective at step " +
                            std::to_string(step_index),
                        report);
  }
  g.total.Backward();
  optimizers_.at("discriminator").Step();
  optimizers_.at("speaker_classifier").Step();
  ZeroAllGrads();
  return report;
}

LossReport VcTrainer::GeneratorStep(const TrainBatch& batch, long step_index) {
  ZeroAllGrads();
  GeneratorGraph g = BuildGeneratorGraph(batch, step_index);
  LossReport report;
  report.step = step_index;
  report.generator = g.parts;
  if (!std::isfinite(g.parts.total)) {
    throw NonFiniteLoss("non-finite generator objective at step " +
                            std::to_string(step_index),
                        report);
  }
  g.total.Backward();
  optimizers_.at("generator").Step();
  optimizers_.at("style_encoder").Step();
  optimizers_.at("mapping").Step();
  ZeroAllGrads();
  return report;
}

TrainBatch VcTrainer::SampleBatch(const TupleSampler& sampler, FeatureStore& features) {
  const int crop = train_cfg_.crop_frames;
  const double pad = std::log(mel_cfg_.log_floor);
  auto offset_for = [&](int frames) {
    if (frames <= crop) return 0;
    return std::uniform_int_distribution<int>(0, frames - crop)(rng_);
  };

  TrainBatch batch;
  for (int b = 0; b < train_cfg_.batch_size; ++b) {
    const TrainingTuple t = sampler.Sample(rng_);
    TrainingSample s;
    const auto src_domain = RecordDomain(t.source, train_cfg_.domain_kind);
    if (!src_domain) throw FormatError("record " + t.source.id + " has no domain label");
    s.src_domain = *src_domain;
    s.trg_domain = t.target;

    const UtteranceFeatures& src = features.Get(t.source);
    const int off = offset_for(src.mel.frames());
    s.mel_src = CropMel(src.mel, off, crop, pad);
    const std::vector<double> norm_f0 = NormalizeF0(src.f0);
    s.f0_src = ad::Matrix::Zero(1, crop);
    s.voiced_src.assign(crop, false);
    for (int i = 0; i < crop && off + i < static_cast<int>(norm_f0.size()); ++i) {
      s.f0_src(0, i) = norm_f0[off + i];
      s.voiced_src[i] = src.f0.voiced[off + i];
    }

    const UtteranceFeatures& ref = features.Get(t.reference);
    s.mel_ref = CropMel(ref.mel, offset_for(ref.mel.frames()), crop, pad);
    const UtteranceFeatures& ref2 = features.Get(t.reference2);
    s.mel_ref2 = CropMel(ref2.mel, offset_for(ref2.mel.frames()), crop, pad);

    s.z1 = SampleNoise(net_cfg_.latent_dim, rng_).values;
    s.z2 = SampleNoise(net_cfg_.latent_dim, rng_).values;
    batch.samples.push_back(std::move(s));
  }
  return batch;
}

LossReport VcTrainer::TrainStep(const TupleSampler& sampler, FeatureStore& features) {
  const long index = step_;
  ++step_;
  const TrainBatch batch = SampleBatch(sampler, features);
  LossReport report = DiscriminatorStep(batch, index);
  report.generator = GeneratorStep(batch, index).generator;
  return report;
}

Checkpoint VcTrainer::ToCheckpoint() const {
  Checkpoint ckpt;
  std::ostringstream rng_state;
  rng_state << rng_;
  nlohmann::json adam_steps = nlohmann::json::object();
  for (const auto& [name, store] : nets_.Groups()) {
    ckpt.PutParams(name, *store);
    const AdamW& opt = optimizers_.at(name);
    adam_steps[name] = opt.steps();
    NamedTensors m, v;
    for (size_t i = 0; i < store->entries().size(); ++i) {
      m.emplace_back(store->entries()[i].first, opt.first_moments()[i]);
      v.emplace_back(store->entries()[i].first, opt.second_moments()[i]);
    }
    ckpt.PutGroup("adam_m." + name, std::move(m));
    ckpt.PutGroup("adam_v." + name, std::move(v));
  }
  ckpt.meta = {{"kind", "vc"},
               {"network", ToJson(net_cfg_)},
               {"mel", ToJson(mel_cfg_)},
               {"loss_weights", losses::ToJson(weights_)},
               {"train", ToJson(train_cfg_)},
               {"step", step_},
               {"rng", rng_state.str()},
               {"adam_steps", adam_steps},
               {"speaker_labels", speaker_labels}};
  return ckpt;
}

void VcTrainer::Save(const std::string& path) const { SaveCheckpoint(ToCheckpoint(), path); }

void VcTrainer::Restore(const Checkpoint& ckpt) {
  if (ckpt.meta.value("kind", "") != "vc") throw CheckpointError("not a conversion checkpoint");
  const NetworkConfig stored = NetworkConfigFromJson(ckpt.meta.at("network"));
  if (!(stored == net_cfg_)) {
    throw CheckpointError("checkpoint architecture " + ckpt.meta.at("network").dump() +
                          " does not match " + ToJson(net_cfg_).dump());
  }
  for (auto& [name, store] : nets_.Groups()) {
    ckpt.RestoreParams(name, store);
    std::vector<nn::Matrix> m, v;
    for (const auto& t : ckpt.Group("adam_m." + name)) m.push_back(t.second);
    for (const auto& t : ckpt.Group("adam_v." + name)) v.push_back(t.second);
    optimizers_.at(name).SetState(ckpt.meta.at("adam_steps").at(name).get<long>(),
                                  std::move(m), std::move(v));
  }
  step_ = ckpt.meta.at("step").get<long>();
  std::istringstream rng_state(ckpt.meta.at("rng").get<std::string>());
  rng_state >> rng_;
  speaker_labels = ckpt.meta.value("speaker_labels", std::vector<std::string>{});
}

// ---------------------------------------------------------------------------
// Runs

namespace {

constexpr int kMaxNonFiniteStreak = 10;

}  // namespace

CheckpointSet RunTraining(const Manifest& manifest, FeatureStore& features,
                          const RunOptions& opts, const std::string& out_dir) {
  const DomainKind kind = opts.train.domain_kind;
  NetworkConfig net = opts.net;
  net.n_mels = opts.mel.n_mels;
  net.domain_kind = kind;
  net.num_domains = kind == DomainKind::kSpeaker ? manifest.num_speakers() : kNumEmotions;
  if (net.num_domains < 1) throw ConfigError("manifest has no speakers");

  TupleSampler sampler(manifest.records, kind);
  VcTrainer trainer(net, opts.train, opts.weights, opts.mel);
  trainer.speaker_labels = manifest.speaker_labels;
  if (opts.weights.demo > 0) {
    if (opts.train.emotion_checkpoint.empty()) {
      throw ConfigError("loss_weights.demo > 0 requires train.emotion_checkpoint");
    }
    trainer.SetEmotionClassifier(LoadEmotionClassifier(opts.train.emotion_checkpoint));
  }
  if (!opts.resume_from.empty()) {
    trainer.Restore(LoadCheckpoint(opts.resume_from));
    LOG(INFO) << "resumed from " << opts.resume_from << " at step " << trainer.step();
  }

  const long pool = static_cast<long>(sampler.pool().size());
  const long per_epoch = (pool + opts.train.batch_size - 1) / opts.train.batch_size;
  const long total_steps =
      opts.train.max_steps > 0 ? opts.train.max_steps : opts.train.epochs * per_epoch;

  fs::create_directories(out_dir);
  CheckpointSet set;
  set.log_path = (fs::path(out_dir) / "log.jsonl").string();
  std::ofstream log(set.log_path, opts.resume_from.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw std::runtime_error("cannot write " + set.log_path);

  int streak = 0;
  while (trainer.step() < total_steps) {
    LossReport report;
    try {
      report = trainer.TrainStep(sampler, features);
      streak = 0;
    } catch (const NonFiniteLoss& e) {
      LOG(ERROR) << e.what() << "; losses: " << losses::ToJson(e.report()).dump();
      if (++streak > kMaxNonFiniteStreak) {
        const std::string dump = (fs::path(out_dir) / "nonfinite.ckpt").string();
        trainer.Save(dump);
        throw std::runtime_error("aborting after " + std::to_string(streak) +
                                 " consecutive non-finite steps; state dumped to " + dump);
      }
      continue;
    }
    const long done = trainer.step();
    if (done % opts.train.log_interval == 0 || done == total_steps) {
      log << losses::ToJson(report).dump() << '\n';
      log.flush();
    }
    if (opts.train.checkpoint_interval > 0 && done % opts.train.checkpoint_interval == 0 &&
        done != total_steps) {
      const std::string path =
          (fs::path(out_dir) / ("step_" + std::to_string(done) + ".ckpt")).string();
      trainer.Save(path);
      set.periodic.push_back(path);
    }
  }
  set.final_checkpoint = (fs::path(out_dir) / "final.ckpt").string();
  trainer.Save(set.final_checkpoint);
  return set;
}

CheckpointSet RunTraining(const std::string& manifest_path, const RunOptions& opts,
                          const std::string& out_dir) {
  Manifest manifest = ParseManifest(manifest_path);
  const std::string splits = SplitsPath(manifest_path);
  if (fs::exists(splits)) ApplySplits(splits, &manifest.records);
  FeatureStore features(opts.mel, CacheDirFromEnv());
  return RunTraining(manifest, features, opts, out_dir);
}

std::unique_ptr<VcNetworks> LoadVcNetworks(const std::string& path,
                                           std::vector<std::string>* speaker_labels) {
  const Checkpoint ckpt = LoadCheckpoint(path);
  if (ckpt.meta.value("kind", "") != "vc") {
    throw CheckpointError(path + " is not a conversion checkpoint");
  }
  auto nets = std::make_unique<VcNetworks>(NetworkConfigFromJson(ckpt.meta.at("network")), 0);
  for (auto& [name, store] : nets->Groups()) ckpt.RestoreParams(name, store);
  if (speaker_labels) {
    *speaker_labels = ckpt.meta.value("speaker_labels", std::vector<std::string>{});
  }
  return nets;
}

void SaveEmotionClassifier(const EmotionClassifier& c, const std::string& path) {
  Checkpoint ckpt;
  ckpt.meta = {{"kind", "emotion_classifier"},
               {"network", ToJson(c.trunk_config())},
               {"num_classes", c.num_classes()}};
  ckpt.PutParams("emotion_trunk", c.trunk_params());
  ckpt.PutParams("emotion_head", c.head_params());
  SaveCheckpoint(ckpt, path);
}

std::shared_ptr<EmotionClassifier> LoadEmotionClassifier(const std::string& path) {
  const Checkpoint ckpt = LoadCheckpoint(path);
  if (ckpt.meta.value("kind", "") != "emotion_classifier") {
    throw CheckpointError(path + " is not an emotion classifier checkpoint");
  }
  auto c = std::make_shared<EmotionClassifier>(NetworkConfigFromJson(ckpt.meta.at("network")),
                                               ckpt.meta.at("num_classes").get<int>(), 0);
  ckpt.RestoreParams("emotion_trunk", &c->trunk_params());
  ckpt.RestoreParams("emotion_head", &c->head_params());
  return c;
}

}  // namespace emovc
