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

#include <stdexcept>
#include <string>

namespace emovc {

using ad::Var;

namespace {

void CheckMelInput(const NetworkConfig& cfg, const Var& mel) {
  if (mel.rows() != cfg.n_mels) {
    throw std::invalid_argument("expected " + std::to_string(cfg.n_mels) +
                                " mel bins, got " + std::to_string(mel.rows()));
  }
  if (mel.cols() < 1) throw std::invalid_argument("mel has no frames");
}

}  // namespace

void CheckDomain(const NetworkConfig& cfg, const DomainCode& y) {
  if (y.kind != cfg.domain_kind) {
    throw std::invalid_argument(std::string("domain kind mismatch: model uses ") +
                                std::string(DomainKindName(cfg.domain_kind)) +
                                " codes");
  }
  if (y.index < 0 || y.index >= cfg.num_domains) {
    throw std::out_of_range("unknown domain code " + std::to_string(y.index));
  }
}

LatentNoise SampleNoise(int latent_dim, std::mt19937_64& rng) {
  LatentNoise z;
  z.values.resize(latent_dim);
  for (int i = 0; i < latent_dim; ++i) {
    z.values[i] = std::normal_distribution<double>(0.0, 1.0)(rng);
  }
  return z;
}

Var MelToVar(const MelSpectrogram& mel) {
  return Var::Constant(mel.values.transpose());
}

MelSpectrogram VarToMel(const Var& v, int hop_length) {
  MelSpectrogram m;
  m.values = v.value().transpose();
  m.hop_length = hop_length;
  return m;
}

Generator::Generator(const NetworkConfig& cfg, uint64_t seed) : cfg_(cfg) {
  std::mt19937_64 rng(seed);
  const int c = cfg.gen_channels;
  stem_ = nn::Conv1dLayer(params_, "stem", cfg.n_mels, c, 3, rng);
  for (int i = 0; i <= cfg.num_downsample; ++i) {
    encoder_.emplace_back(params_, "encoder." + std::to_string(i), c, c,
                          /*normalize=*/true,
                          /*downsample=*/i < cfg.num_downsample, cfg.slope, rng);
  }
  decoder_.emplace_back(params_, "decoder.0", c + 1, c, cfg.style_dim,
                        /*upsample=*/false, cfg.slope, rng);
  for (int i = 0; i < cfg.num_downsample; ++i) {
    decoder_.emplace_back(params_, "decoder." + std::to_string(i + 1), c, c,
                          cfg.style_dim, /*upsample=*/true, cfg.slope, rng);
  }
  to_mel_ = nn::Conv1dLayer(params_, "to_mel", c, cfg.n_mels, 1, rng);
}

Var Generator::Encode(const Var& mel) const {
  CheckMelInput(cfg_, mel);
  Var h = stem_.Forward(mel);
  for (const auto& block : encoder_) h = block.Forward(h);
  return h;
}

Var Generator::Decode(const Var& code, const Var& f0, const Var& style,
                      Eigen::Index frames) const {
  std::vector<Eigen::Index> lengths = {frames};
  for (int i = 0; i < cfg_.num_downsample; ++i) {
    lengths.push_back((lengths.back() + 1) / 2);
  }
  if (code.cols() != lengths.back() || code.rows() != cfg_.gen_channels) {
    throw std::invalid_argument("Decode: latent code shape does not match frames");
  }
  if (f0.rows() != 1 || f0.cols() != frames) {
    throw std::invalid_argument("Decode: f0 frame count " + std::to_string(f0.cols()) +
                                " does not match " + std::to_string(frames));
  }
  if (style.rows() != cfg_.style_dim || style.cols() != 1) {
    throw std::invalid_argument("Decode: style width mismatch");
  }
  Var f0_down = f0;
  for (int i = 0; i < cfg_.num_downsample; ++i) f0_down = ad::AvgPool2(f0_down);
  Var h = decoder_[0].Forward(ad::ConcatRows(code, f0_down), style, code.cols());
  for (int i = 0; i < cfg_.num_downsample; ++i) {
    h = decoder_[i + 1].Forward(h, style, lengths[cfg_.num_downsample - 1 - i]);
  }
  h = ad::LeakyRelu(ad::InstanceNorm(h), cfg_.slope);
  return to_mel_.Forward(h);
}

Var Generator::Forward(const Var& mel, const Var& f0, const Var& style) const {
  return Decode(Encode(mel), f0, style, mel.cols());
}

StyleTrunk::StyleTrunk(const NetworkConfig& cfg, nn::ParamStore& store,
                       const std::string& prefix, std::mt19937_64& rng)
    : slope_(cfg.slope) {
  const int c = cfg.style_channels;
  stem_ = nn::Conv1dLayer(store, prefix + "stem", cfg.n_mels, c, 3, rng);
  for (int i = 0; i < 2; ++i) {
    blocks_.emplace_back(store, prefix + "block." + std::to_string(i), c, c,
                         /*normalize=*/false, /*downsample=*/true, cfg.slope, rng);
  }
  project_ = nn::Linear(store, prefix + "project", c, cfg.trunk_dim, rng);
}

Var StyleTrunk::Forward(const Var& mel) const {
  Var h = stem_.Forward(mel);
  for (const auto& b : blocks_) h = b.Forward(h);
  h = ad::MeanCols(ad::LeakyRelu(h, slope_));
  return ad::LeakyRelu(project_.Forward(h), slope_);
}

StyleEncoder::StyleEncoder(const NetworkConfig& cfg, uint64_t seed)
    : cfg_(cfg),
      trunk_([&]() {
        std::mt19937_64 rng(seed);
        return StyleTrunk(cfg, params_, kTrunkPrefix, rng);
      }()) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int d = 0; d < cfg.num_domains; ++d) {
    heads_.emplace_back(params_, "head." + std::to_string(d), cfg.trunk_dim,
                        cfg.style_dim, rng);
  }
}

Var StyleEncoder::Encode(const Var& mel, const DomainCode& y) const {
  CheckMelInput(cfg_, mel);
  CheckDomain(cfg_, y);
  return heads_[y.index].Forward(trunk_.Forward(mel));
}

MappingNetwork::MappingNetwork(const NetworkConfig& cfg, uint64_t seed)
    : cfg_(cfg) {
  std::mt19937_64 rng(seed);
  const int h = cfg.mapping_hidden;
  shared_.emplace_back(params_, "shared.0", cfg.latent_dim, h, rng);
  shared_.emplace_back(params_, "shared.1", h, h, rng);
  for (int d = 0; d < cfg.num_domains; ++d) {
    const std::string p = "head." + std::to_string(d);
    heads_.emplace_back(nn::Linear(params_, p + ".0", h, h, rng),
                        nn::Linear(params_, p + ".1", h, cfg.style_dim, rng));
  }
}

Var MappingNetwork::Forward(const Var& z, const DomainCode& y) const {
  if (z.rows() != cfg_.latent_dim || z.cols() != 1) {
    throw std::invalid_argument("mapping: latent width must be " +
                                std::to_string(cfg_.latent_dim));
  }
  CheckDomain(cfg_, y);
  Var h = z;
  for (const auto& l : shared_) h = ad::Relu(l.Forward(h));
  const auto& [a, b] = heads_[y.index];
  return b.Forward(ad::Relu(a.Forward(h)));
}

DomainClassifier::DomainClassifier(const NetworkConfig& cfg, int num_outputs,
                                   uint64_t seed)
    : cfg_(cfg), num_outputs_(num_outputs) {
  std::mt19937_64 rng(seed);
  const int c = cfg.disc_channels;
  stem_ = nn::Conv1dLayer(params_, "stem", cfg.n_mels, c, 3, rng);
  for (int i = 0; i < 2; ++i) {
    blocks_.emplace_back(params_, "block." + std::to_string(i), c, c,
                         /*normalize=*/false, /*downsample=*/true, cfg.slope, rng);
  }
  out_ = nn::Linear(params_, "out", c, num_outputs, rng);
}

Var DomainClassifier::Logits(const Var& mel) const {
  CheckMelInput(cfg_, mel);
  Var h = stem_.Forward(mel);
  for (const auto& b : blocks_) h = b.Forward(h);
  h = ad::LeakyRelu(ad::MeanCols(ad::LeakyRelu(h, cfg_.slope)), cfg_.slope);
  return out_.Forward(h);
}

Var DomainClassifier::Logit(const Var& mel, const DomainCode& y) const {
  CheckDomain(cfg_, y);
  return ad::Element(Logits(mel), y.index, 0);
}

VcNetworks::VcNetworks(const NetworkConfig& cfg, uint64_t seed)
    : config(cfg),
      generator(cfg, seed + 1),
      style_encoder(cfg, seed + 2),
      mapping(cfg, seed + 3),
      discriminator(cfg, cfg.num_domains, seed + 4),
      speaker_classifier(cfg, cfg.num_domains, seed + 5) {}

std::vector<std::pair<std::string, nn::ParamStore*>> VcNetworks::Groups() {
  return {{"generator", &generator.params()},
          {"style_encoder", &style_encoder.params()},
          {"mapping", &mapping.params()},
          {"discriminator", &discriminator.params()},
          {"speaker_classifier", &speaker_classifier.params()}};
}

std::vector<std::pair<std::string, const nn::ParamStore*>> VcNetworks::Groups() const {
  return {{"generator", &generator.params()},
          {"style_encoder", &style_encoder.params()},
          {"mapping", &mapping.params()},
          {"discriminator", &discriminator.params()},
          {"speaker_classifier", &speaker_classifier.params()}};
}

EmotionClassifier::EmotionClassifier(const NetworkConfig& trunk_cfg,
                                     int num_classes, uint64_t seed)
    : cfg_(trunk_cfg),
      num_classes_(num_classes),
      trunk_([&]() {
        std::mt19937_64 rng(seed);
        return StyleTrunk(trunk_cfg, trunk_params_, StyleEncoder::kTrunkPrefix, rng);
      }()) {
  if (num_classes < 2) throw std::invalid_argument("EmotionClassifier: need >= 2 classes");
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  fc1_ = nn::Linear(head_params_, "head.0", trunk_cfg.trunk_dim, kHiddenWidth, rng);
  fc2_ = nn::Linear(head_params_, "head.1", kHiddenWidth, kEmbeddingWidth, rng);
  fc3_ = nn::Linear(head_params_, "head.2", kEmbeddingWidth, num_classes, rng);
}

EmotionClassifier::Outputs EmotionClassifier::Head(const Var& trunk_out) const {
  Var h = ad::LeakyRelu(fc1_.Forward(trunk_out), cfg_.slope);
  Var emb = ad::LeakyRelu(fc2_.Forward(h), cfg_.slope);
  return {emb, fc3_.Forward(emb)};
}

void EmotionClassifier::LoadTrunkFrom(const StyleEncoder& se) {
  for (const auto& [name, dst] : trunk_params_.entries()) {
    Var src = se.params().Get(name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
      throw std::invalid_argument("LoadTrunkFrom: shape mismatch at " + name);
    }
    Var d = dst;
    d.mutable_value() = src.value();
  }
}

LatentCode EncoderForward(const MelSpectrogram& x, const VcNetworks& nets) {
  return {nets.generator.Encode(MelToVar(x)).value()};
}

MelSpectrogram GeneratorForward(const MelSpectrogram& x,
                                std::span<const double> f0,
                                const StyleEmbedding& s,
                                const VcNetworks& nets) {
  if (static_cast<int>(f0.size()) != x.frames()) {
    throw std::invalid_argument("GeneratorForward: f0 has " + std::to_string(f0.size()) +
                                " frames, mel has " + std::to_string(x.frames()));
  }
  if (!nets.generator.params().AllFinite()) {
    throw std::domain_error("GeneratorForward: non-finite generator parameters");
  }
  ad::Matrix f0m(1, f0.size());
  for (size_t i = 0; i < f0.size(); ++i) f0m(0, i) = f0[i];
  Var out = nets.generator.Forward(MelToVar(x), Var::Constant(f0m),
                                   Var::Constant(s.values));
  if (!out.value().allFinite()) {
    throw std::domain_error("GeneratorForward: non-finite output");
  }
  return VarToMel(out, x.hop_length);
}

StyleEmbedding StyleEncode(const MelSpectrogram& x_ref, const DomainCode& y,
                           const VcNetworks& nets) {
  Var s = nets.style_encoder.Encode(MelToVar(x_ref), y);
  return {s.value().col(0), y};
}

Eigen::VectorXd StyleTrunkOutput(const MelSpectrogram& x, const VcNetworks& nets) {
  return nets.style_encoder.Trunk(MelToVar(x)).value().col(0);
}

StyleEmbedding MappingForward(const LatentNoise& z, const DomainCode& y,
                              const VcNetworks& nets) {
  Var s = nets.mapping.Forward(Var::Constant(z.values), y);
  return {s.value().col(0), y};
}

double Discriminate(const MelSpectrogram& x, const DomainCode& y,
                    const VcNetworks& nets) {
  return nets.discriminator.Logit(MelToVar(x), y).item();
}

Eigen::VectorXd ClassifySpeaker(const MelSpectrogram& x, const VcNetworks& nets) {
  return nets.speaker_classifier.Logits(MelToVar(x)).value().col(0);
}

}  // namespace emovc
