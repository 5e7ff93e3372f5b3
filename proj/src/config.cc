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

#include "emovc/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace emovc {

using nlohmann::json;

namespace {

// Pulls typed fields out of one JSON object and rejects leftovers.
class FieldReader {
 public:
  FieldReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError(section_ + ": expected a mapping");
  }

  template <typename T>
  void Read(const char* key, T* dst) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      *dst = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(section_ + "." + key + ": invalid value " + v.dump());
    }
  }

  void Finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(section_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

json YamlToJson(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(YamlToJson(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = YamlToJson(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      if (node.Tag() == "!") return s;  // explicitly quoted
      if (s == "true" || s == "True") return true;
      if (s == "false" || s == "False") return false;
      if (s == "null" || s == "~") return nullptr;
      try {
        size_t used = 0;
        const long long i = std::stoll(s, &used);
        if (used == s.size()) return i;
      } catch (const std::exception&) {
      }
      try {
        size_t used = 0;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
      } catch (const std::exception&) {
      }
      return s;
    }
  }
  return nullptr;
}

}  // namespace

json ToJson(const MelConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"n_mels", c.n_mels},
          {"win_length", c.win_length},   {"hop_length", c.hop_length},
          {"n_fft", c.n_fft},             {"f_min", c.f_min},
          {"f_max", c.f_max},             {"log_floor", c.log_floor}};
}

MelConfig MelConfigFromJson(const json& j) {
  MelConfig c;
  FieldReader r(j, "mel");
  r.Read("sample_rate", &c.sample_rate);
  r.Read("n_mels", &c.n_mels);
  r.Read("win_length", &c.win_length);
  r.Read("hop_length", &c.hop_length);
  r.Read("n_fft", &c.n_fft);
  r.Read("f_min", &c.f_min);
  r.Read("f_max", &c.f_max);
  r.Read("log_floor", &c.log_floor);
  r.Finish();
  if (c.sample_rate != kSampleRate) {
    throw ConfigError("mel.sample_rate: only " + std::to_string(kSampleRate) +
                      " Hz is supported");
  }
  if (c.n_mels < 1 || c.win_length < 1 || c.hop_length < 1 || c.n_fft < c.win_length) {
    throw ConfigError("mel: inconsistent frame geometry");
  }
  return c;
}

json ToJson(const NetworkConfig& c) {
  return {{"n_mels", c.n_mels},
          {"num_domains", c.num_domains},
          {"domain_kind", std::string(DomainKindName(c.domain_kind))},
          {"gen_channels", c.gen_channels},
          {"num_downsample", c.num_downsample},
          {"style_channels", c.style_channels},
          {"trunk_dim", c.trunk_dim},
          {"style_dim", c.style_dim},
          {"latent_dim", c.latent_dim},
          {"mapping_hidden", c.mapping_hidden},
          {"disc_channels", c.disc_channels},
          {"slope", c.slope}};
}

NetworkConfig NetworkConfigFromJson(const json& j) {
  NetworkConfig c;
  FieldReader r(j, "network");
  std::string kind(DomainKindName(c.domain_kind));
  r.Read("n_mels", &c.n_mels);
  r.Read("num_domains", &c.num_domains);
  r.Read("domain_kind", &kind);
  r.Read("gen_channels", &c.gen_channels);
  r.Read("num_downsample", &c.num_downsample);
  r.Read("style_channels", &c.style_channels);
  r.Read("trunk_dim", &c.trunk_dim);
  r.Read("style_dim", &c.style_dim);
  r.Read("latent_dim", &c.latent_dim);
  r.Read("mapping_hidden", &c.mapping_hidden);
  r.Read("disc_channels", &c.disc_channels);
  r.Read("slope", &c.slope);
  r.Finish();
  const auto parsed = ParseDomainKind(kind);
  if (!parsed) throw ConfigError("network.domain_kind: unknown kind '" + kind + "'");
  c.domain_kind = *parsed;
  if (c.gen_channels < 1 || c.style_channels < 1 || c.disc_channels < 1 ||
      c.num_downsample < 0 || c.style_dim < 1 || c.latent_dim < 1 ||
      c.trunk_dim < 1 || c.mapping_hidden < 1) {
    throw ConfigError("network: widths must be positive");
  }
  return c;
}

json ToJson(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"style_policy", std::string(StylePolicyName(c.style_policy))},
          {"style_loss", c.style_loss == losses::StyleLossMode::kAugmented ? "augmented"
                                                                            : "vanilla"},
          {"seed", c.seed},
          {"crop_frames", c.crop_frames},
          {"max_steps", c.max_steps},
          {"log_interval", c.log_interval},
          {"checkpoint_interval", c.checkpoint_interval},
          {"domain_kind", std::string(DomainKindName(c.domain_kind))},
          {"emotion_checkpoint", c.emotion_checkpoint}};
}

TrainConfig TrainConfigFromJson(const json& j) {
  TrainConfig c;
  FieldReader r(j, "train");
  std::string policy(StylePolicyName(c.style_policy));
  std::string style = "augmented";
  std::string kind(DomainKindName(c.domain_kind));
  r.Read("epochs", &c.epochs);
  r.Read("batch_size", &c.batch_size);
  r.Read("learning_rate", &c.learning_rate);
  r.Read("weight_decay", &c.weight_decay);
  r.Read("beta1", &c.beta1);
  r.Read("beta2", &c.beta2);
  r.Read("style_policy", &policy);
  r.Read("style_loss", &style);
  r.Read("seed", &c.seed);
  r.Read("crop_frames", &c.crop_frames);
  r.Read("max_steps", &c.max_steps);
  r.Read("log_interval", &c.log_interval);
  r.Read("checkpoint_interval", &c.checkpoint_interval);
  r.Read("domain_kind", &kind);
  r.Read("emotion_checkpoint", &c.emotion_checkpoint);
  r.Finish();
  try {
    c.style_policy = ParseStylePolicy(policy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train.style_policy: ") + e.what());
  }
  if (style == "augmented") {
    c.style_loss = losses::StyleLossMode::kAugmented;
  } else if (style == "vanilla") {
    c.style_loss = losses::StyleLossMode::kVanilla;
  } else {
    throw ConfigError("train.style_loss: expected augmented or vanilla, got '" + style + "'");
  }
  const auto parsed = ParseDomainKind(kind);
  if (!parsed) throw ConfigError("train.domain_kind: unknown kind '" + kind + "'");
  c.domain_kind = *parsed;
  if (c.epochs < 0 || c.batch_size < 1 || c.crop_frames < 1 || c.learning_rate <= 0 ||
      c.log_interval < 1 || c.checkpoint_interval < 0) {
    throw ConfigError("train: out-of-range value");
  }
  return c;
}

json ToJson(const Stage2Config& c) {
  return {{"steps", c.steps},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed}};
}

Stage2Config Stage2ConfigFromJson(const json& j) {
  Stage2Config c;
  FieldReader r(j, "stage2");
  r.Read("steps", &c.steps);
  r.Read("batch_size", &c.batch_size);
  r.Read("learning_rate", &c.learning_rate);
  r.Read("weight_decay", &c.weight_decay);
  r.Read("seed", &c.seed);
  r.Finish();
  if (c.steps < 0 || c.batch_size < 1 || c.learning_rate <= 0) {
    throw ConfigError("stage2: out-of-range value");
  }
  return c;
}

json ToJson(const TsneConfig& c) {
  return {{"perplexity", c.perplexity},
          {"iterations", c.iterations},
          {"learning_rate", c.learning_rate},
          {"early_exaggeration", c.early_exaggeration},
          {"exaggeration_iterations", c.exaggeration_iterations},
          {"seed", c.seed}};
}

TsneConfig TsneConfigFromJson(const json& j) {
  TsneConfig c;
  FieldReader r(j, "tsne");
  r.Read("perplexity", &c.perplexity);
  r.Read("iterations", &c.iterations);
  r.Read("learning_rate", &c.learning_rate);
  r.Read("early_exaggeration", &c.early_exaggeration);
  r.Read("exaggeration_iterations", &c.exaggeration_iterations);
  r.Read("seed", &c.seed);
  r.Finish();
  if (c.perplexity <= 0 || c.iterations < 1) throw ConfigError("tsne: out-of-range value");
  return c;
}

losses::LossWeights StrictLossWeightsFromJson(const json& j) {
  losses::LossWeights w;
  FieldReader r(j, "loss_weights");
  r.Read("spk", &w.spk);
  r.Read("aspk", &w.aspk);
  r.Read("style", &w.style);
  r.Read("div", &w.div);
  r.Read("asr", &w.asr);
  r.Read("norm", &w.norm);
  r.Read("cycle", &w.cycle);
  r.Read("f0", &w.f0);
  r.Read("demo", &w.demo);
  r.Read("inv", &w.inv);
  r.Finish();
  for (double v : {w.spk, w.aspk, w.style, w.div, w.asr, w.norm, w.cycle, w.f0, w.demo, w.inv}) {
    if (v < 0 || !std::isfinite(v)) throw ConfigError("loss_weights: weights must be >= 0");
  }
  return w;
}

ConfigFile ParseConfigText(const std::string& text) {
  json root;
  try {
    root = YamlToJson(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ConfigFile cfg;
  if (root.is_null()) return cfg;
  if (!root.is_object()) throw ConfigError("config: top level must be a mapping");
  cfg.raw = root;
  FieldReader top(root, "config");
  uint64_t seed = 0;
  top.Read("seed", &seed);
  if (root.contains("seed")) cfg.seed = seed;
  json section;
  auto sub = [&](const char* key) -> const json* {
    top.Read(key, &section);
    return root.contains(key) ? &root.at(key) : nullptr;
  };
  if (const json* s = sub("mel")) cfg.mel = MelConfigFromJson(*s);
  if (const json* s = sub("network")) cfg.network = NetworkConfigFromJson(*s);
  if (const json* s = sub("train")) cfg.train = TrainConfigFromJson(*s);
  if (const json* s = sub("loss_weights")) cfg.weights = StrictLossWeightsFromJson(*s);
  if (const json* s = sub("stage2")) cfg.stage2 = Stage2ConfigFromJson(*s);
  if (const json* s = sub("tsne")) cfg.tsne = TsneConfigFromJson(*s);
  top.Finish();
  cfg.network.n_mels = cfg.mel.n_mels;
  return cfg;
}

ConfigFile LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str());
}

}  // namespace emovc
