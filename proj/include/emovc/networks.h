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

#ifndef EMOVC_NETWORKS_H_
#define EMOVC_NETWORKS_H_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "emovc/audio.h"
#include "emovc/layers.h"
#include "emovc/types.h"

namespace emovc {

/// Architecture descriptor shared by every network of a conversion model.
struct NetworkConfig {
  int n_mels = 80;
  int num_domains = 2;
  DomainKind domain_kind = DomainKind::kSpeaker;
  int gen_channels = 128;
  int num_downsample = 2;
  int style_channels = 128;
  int trunk_dim = 512;
  int style_dim = 64;
  int latent_dim = 16;
  int mapping_hidden = 256;
  int disc_channels = 128;
  double slope = 0.2;

  int downsample_factor() const { return 1 << num_downsample; }
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Encoder output, [channels x ceil(frames / downsample_factor)].
struct LatentCode {
  Eigen::MatrixXd values;
};

struct StyleEmbedding {
  Eigen::VectorXd values;
  DomainCode domain;
};

struct LatentNoise {
  Eigen::VectorXd values;
};

LatentNoise SampleNoise(int latent_dim, std::mt19937_64& rng);

// [frames x n_mels] <-> [n_mels x frames] network layout.
ad::Var MelToVar(const MelSpectrogram& mel);
MelSpectrogram VarToMel(const ad::Var& v, int hop_length = 300);

// Generator G: encoder EN plus a style-conditioned decoder. The normalised
// F0 contour enters the decoder as an extra channel at latent resolution.
class Generator {
 public:
  Generator(const NetworkConfig& cfg, uint64_t seed);

  ad::Var Encode(const ad::Var& mel) const;
  // f0: [1 x frames]; style: [style_dim x 1]; frames = target length.
  ad::Var Decode(const ad::Var& code, const ad::Var& f0, const ad::Var& style,
                 Eigen::Index frames) const;
  ad::Var Forward(const ad::Var& mel, const ad::Var& f0,
                  const ad::Var& style) const;

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  NetworkConfig cfg_;
  nn::ParamStore params_;
  nn::Conv1dLayer stem_;
  std::vector<nn::ResBlock> encoder_;
  std::vector<nn::AdaInResBlock> decoder_;
  nn::Conv1dLayer to_mel_;
};

// Shared convolutional trunk of the style encoder: mel -> [trunk_dim x 1].
class StyleTrunk {
 public:
  StyleTrunk(const NetworkConfig& cfg, nn::ParamStore& store,
             const std::string& prefix, std::mt19937_64& rng);
  ad::Var Forward(const ad::Var& mel) const;

 private:
  double slope_;
  nn::Conv1dLayer stem_;
  std::vector<nn::ResBlock> blocks_;
  nn::Linear project_;
};

// SE: shared trunk plus one linear head per domain.
class StyleEncoder {
 public:
  StyleEncoder(const NetworkConfig& cfg, uint64_t seed);

  ad::Var Trunk(const ad::Var& mel) const { return trunk_.Forward(mel); }
  ad::Var Encode(const ad::Var& mel, const DomainCode& y) const;

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }
  // The trunk's parameters are those named with this prefix.
  static constexpr const char* kTrunkPrefix = "trunk.";

 private:
  NetworkConfig cfg_;
  nn::ParamStore params_;
  StyleTrunk trunk_;
  std::vector<nn::Linear> heads_;
};

// M: Gaussian noise plus domain code -> style embedding.
class MappingNetwork {
 public:
  MappingNetwork(const NetworkConfig& cfg, uint64_t seed);
  ad::Var Forward(const ad::Var& z, const DomainCode& y) const;

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  NetworkConfig cfg_;
  nn::ParamStore params_;
  std::vector<nn::Linear> shared_;
  std::vector<std::pair<nn::Linear, nn::Linear>> heads_;
};

// Convolutional classifier with one logit per domain. Used both as the
// domain-conditioned real/fake classifier C (one selected logit) and as the
// speaker classifier C_sp (all logits).
class DomainClassifier {
 public:
  DomainClassifier(const NetworkConfig& cfg, int num_outputs, uint64_t seed);

  ad::Var Logits(const ad::Var& mel) const;  // [num_outputs x 1]
  ad::Var Logit(const ad::Var& mel, const DomainCode& y) const;  // 1x1

  int num_outputs() const { return num_outputs_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

 private:
  NetworkConfig cfg_;
  int num_outputs_;
  nn::ParamStore params_;
  nn::Conv1dLayer stem_;
  std::vector<nn::ResBlock> blocks_;
  nn::Linear out_;
};

/// Every trainable network of the conversion model.
struct VcNetworks {
  VcNetworks(const NetworkConfig& cfg, uint64_t seed);
  // Copies would alias the same parameter nodes.
  VcNetworks(const VcNetworks&) = delete;
  VcNetworks& operator=(const VcNetworks&) = delete;
  VcNetworks(VcNetworks&&) = default;

  NetworkConfig config;
  Generator generator;
  StyleEncoder style_encoder;
  MappingNetwork mapping;
  DomainClassifier discriminator;
  DomainClassifier speaker_classifier;

  // Named groups in checkpoint order.
  std::vector<std::pair<std::string, nn::ParamStore*>> Groups();
  std::vector<std::pair<std::string, const nn::ParamStore*>> Groups() const;
};

// Emotion classifier C_emo: a style-encoder trunk followed by a head of
// three fully-connected layers (trunk_dim -> 128 -> 64 -> classes). The
// embedding is the activated output of the 64-wide layer.
class EmotionClassifier {
 public:
  static constexpr int kHiddenWidth = 128;
  static constexpr int kEmbeddingWidth = 64;

  EmotionClassifier(const NetworkConfig& trunk_cfg, int num_classes, uint64_t seed);
  EmotionClassifier(const EmotionClassifier&) = delete;
  EmotionClassifier& operator=(const EmotionClassifier&) = delete;

  struct Outputs {
    ad::Var embedding;  // [64 x 1]
    ad::Var logits;     // [num_classes x 1]
  };

  ad::Var Trunk(const ad::Var& mel) const { return trunk_.Forward(mel); }
  // Head applied to a precomputed trunk activation.
  Outputs Head(const ad::Var& trunk_out) const;
  Outputs Forward(const ad::Var& mel) const { return Head(Trunk(mel)); }
  ad::Var Embed(const ad::Var& mel) const { return Forward(mel).embedding; }

  int num_classes() const { return num_classes_; }
  const NetworkConfig& trunk_config() const { return cfg_; }
  nn::ParamStore& trunk_params() { return trunk_params_; }
  const nn::ParamStore& trunk_params() const { return trunk_params_; }
  nn::ParamStore& head_params() { return head_params_; }
  const nn::ParamStore& head_params() const { return head_params_; }

  // Copies trunk weights from a style encoder of matching architecture.
  void LoadTrunkFrom(const StyleEncoder& se);

 private:
  NetworkConfig cfg_;
  int num_classes_;
  nn::ParamStore trunk_params_;
  nn::ParamStore head_params_;
  StyleTrunk trunk_;
  nn::Linear fc1_, fc2_, fc3_;
};

// Value-level operations on a model.
LatentCode EncoderForward(const MelSpectrogram& x, const VcNetworks& nets);
MelSpectrogram GeneratorForward(const MelSpectrogram& x,
                                std::span<const double> f0,
                                const StyleEmbedding& s,
                                const VcNetworks& nets);
StyleEmbedding StyleEncode(const MelSpectrogram& x_ref, const DomainCode& y,
                           const VcNetworks& nets);
Eigen::VectorXd StyleTrunkOutput(const MelSpectrogram& x, const VcNetworks& nets);
StyleEmbedding MappingForward(const LatentNoise& z, const DomainCode& y,
                              const VcNetworks& nets);
double Discriminate(const MelSpectrogram& x, const DomainCode& y,
                    const VcNetworks& nets);
Eigen::VectorXd ClassifySpeaker(const MelSpectrogram& x, const VcNetworks& nets);

// Throws std::out_of_range for an index outside [0, num_domains) and
// std::invalid_argument for a domain of the wrong kind.
void CheckDomain(const NetworkConfig& cfg, const DomainCode& y);

}  // namespace emovc

#endif  // EMOVC_NETWORKS_H_
