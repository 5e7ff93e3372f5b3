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

#ifndef EMOVC_TRAINER_H_
#define EMOVC_TRAINER_H_

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "emovc/audio.h"
#include "emovc/checkpoint.h"
#include "emovc/data_ingest.h"
#include "emovc/losses.h"
#include "emovc/networks.h"
#include "emovc/optimizer.h"

namespace emovc {

enum class StylePolicy {
  kAlternate,  // style encoder on even steps, mapping network on odd steps
  kEncoder,
  kMapping,
};

std::string_view StylePolicyName(StylePolicy p);
StylePolicy ParseStylePolicy(std::string_view name);

struct TrainConfig {
  int epochs = 60;
  int batch_size = 16;
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  StylePolicy style_policy = StylePolicy::kAlternate;
  losses::StyleLossMode style_loss = losses::StyleLossMode::kAugmented;
  uint64_t seed = 0;
  int crop_frames = 192;
  long max_steps = 0;          // > 0 overrides epochs
  int log_interval = 10;
  int checkpoint_interval = 1000;
  DomainKind domain_kind = DomainKind::kSpeaker;
  std::string emotion_checkpoint;  // C_emo artifact; required when demo > 0

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Log-mel plus YIN pitch of one utterance.
struct UtteranceFeatures {
  MelSpectrogram mel;
  F0Contour f0;
};

// Features of one audio file (WAV/FLAC) or stored mel (.npy, or .npz with a
// "mel" member). Stored mels get a mel-domain pitch track, voiced throughout.
UtteranceFeatures LoadUtteranceFeatures(const std::string& path, const MelConfig& cfg);

// Loads and memoises utterance features. When `cache_dir` is non-empty the
// features are also persisted there as .npz, keyed by a hash of the audio
// path, its size and mtime, and the mel configuration.
class FeatureStore {
 public:
  explicit FeatureStore(MelConfig cfg, std::string cache_dir = "");

  const UtteranceFeatures& Get(const UtteranceRecord& r);
  // Registers in-memory features under an id (tests, synthetic data).
  void Put(const std::string& id, UtteranceFeatures f);

  const MelConfig& config() const { return cfg_; }

 private:
  MelConfig cfg_;
  std::string cache_dir_;
  std::map<std::string, UtteranceFeatures> memo_;
};

// Reads EMOVC_CACHE; empty when unset.
std::string CacheDirFromEnv();

// Fixed-length views of a sampled tuple, in network layout [n_mels x T].
struct TrainingSample {
  ad::Matrix mel_src;
  ad::Matrix f0_src;             // [1 x T], normalised Hz
  std::vector<bool> voiced_src;
  ad::Matrix mel_ref;
  ad::Matrix mel_ref2;
  DomainCode src_domain;
  DomainCode trg_domain;
  Eigen::VectorXd z1, z2;        // latent noise for the mapping network
};

struct TrainBatch {
  std::vector<TrainingSample> samples;
};

// Crops (or pads with silence) to `frames` starting at `offset`.
ad::Matrix CropMel(const MelSpectrogram& mel, int offset, int frames,
                   double pad_value);

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& what, losses::LossReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const losses::LossReport& report() const { return report_; }

 private:
  losses::LossReport report_;
};

// Owns the conversion networks, their optimisers and the sampling RNG.
class VcTrainer {
 public:
  VcTrainer(const NetworkConfig& net_cfg, const TrainConfig& train_cfg,
            const losses::LossWeights& weights, const MelConfig& mel_cfg);
  // Optimisers point into the owned networks.
  VcTrainer(const VcTrainer&) = delete;
  VcTrainer& operator=(const VcTrainer&) = delete;

  // Frozen emotion embedder used by the demo term.
  void SetEmotionClassifier(std::shared_ptr<EmotionClassifier> c_emo);
  void SetContentExtractor(std::shared_ptr<const losses::ContentExtractor> asr);

  // Updates C and C_sp only. Fake samples use the style source of
  // `step_index`. Throws NonFiniteLoss without updating.
  losses::LossReport DiscriminatorStep(const TrainBatch& batch, long step_index);
  // Updates G, SE and M only. Style source follows the policy for
  // `step_index`. Throws NonFiniteLoss without updating.
  losses::LossReport GeneratorStep(const TrainBatch& batch, long step_index);

  // Loss values for the current parameters, no update.
  losses::GeneratorLosses EvaluateGenerator(const TrainBatch& batch,
                                            long step_index) const;
  losses::DiscriminatorLosses EvaluateDiscriminator(const TrainBatch& batch,
                                                    long step_index) const;

  bool UsesMapping(long step_index) const;

  // Draws a batch from the sampler using the trainer RNG.
  TrainBatch SampleBatch(const TupleSampler& sampler, FeatureStore& features);
  // One discriminator step then one generator step; advances step().
  losses::LossReport TrainStep(const TupleSampler& sampler, FeatureStore& features);

  Checkpoint ToCheckpoint() const;
  void Save(const std::string& path) const;
  // Restores networks, optimiser moments, step counter and RNG. Throws
  // CheckpointError when the architecture differs.
  void Restore(const Checkpoint& ckpt);

  VcNetworks& nets() { return nets_; }
  const VcNetworks& nets() const { return nets_; }
  const TrainConfig& train_config() const { return train_cfg_; }
  const losses::LossWeights& weights() const { return weights_; }
  const MelConfig& mel_config() const { return mel_cfg_; }
  long step() const { return step_; }
  std::mt19937_64& rng() { return rng_; }
  // Number of forward passes through C_emo so far.
  long emotion_calls() const { return emotion_calls_; }

  std::vector<std::string> speaker_labels;

 private:
  struct GeneratorGraph;
  GeneratorGraph BuildGeneratorGraph(const TrainBatch& batch, long step_index) const;
  struct DiscriminatorGraph;
  DiscriminatorGraph BuildDiscriminatorGraph(const TrainBatch& batch,
                                             long step_index) const;
  void ZeroAllGrads();

  NetworkConfig net_cfg_;
  TrainConfig train_cfg_;
  losses::LossWeights weights_;
  MelConfig mel_cfg_;
  VcNetworks nets_;
  std::map<std::string, AdamW> optimizers_;
  std::shared_ptr<EmotionClassifier> c_emo_;
  std::shared_ptr<const losses::ContentExtractor> asr_;
  MelPitchTracker pitch_;
  std::mt19937_64 rng_;
  long step_ = 0;
  mutable long emotion_calls_ = 0;
};

struct CheckpointSet {
  std::vector<std::string> periodic;
  std::string final_checkpoint;
  std::string log_path;
};

struct RunOptions {
  NetworkConfig net;
  TrainConfig train;
  losses::LossWeights weights;
  MelConfig mel;
  std::string resume_from;
};

// Full training run over the manifest's training split. Writes
// `<out_dir>/step_<n>.ckpt` periodically, `<out_dir>/final.ckpt` and
// `<out_dir>/log.jsonl`. More than 10 consecutive non-finite steps abort.
CheckpointSet RunTraining(const std::string& manifest_path, const RunOptions& opts,
                          const std::string& out_dir);
// Same, for an already-loaded manifest and feature store.
CheckpointSet RunTraining(const Manifest& manifest, FeatureStore& features,
                          const RunOptions& opts, const std::string& out_dir);

// Rebuilds networks (architecture from the checkpoint metadata) and loads
// the generator, style encoder and mapping weights.
std::unique_ptr<VcNetworks> LoadVcNetworks(const std::string& path,
                                           std::vector<std::string>* speaker_labels = nullptr);

// Loads C_emo from a stage-two checkpoint.
std::shared_ptr<EmotionClassifier> LoadEmotionClassifier(const std::string& path);
void SaveEmotionClassifier(const EmotionClassifier& c, const std::string& path);

}  // namespace emovc

#endif  // EMOVC_TRAINER_H_
