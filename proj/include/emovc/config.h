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

#ifndef EMOVC_CONFIG_H_
#define EMOVC_CONFIG_H_

#include <optional>
#include <string>

#include "emovc/audio.h"
#include "emovc/diagnostics.h"
#include "emovc/emotion_embedder.h"
#include "emovc/losses.h"
#include "emovc/networks.h"
#include "emovc/trainer.h"
#include "json.hpp"

namespace emovc {

// JSON forms used in checkpoint metadata and run records. The readers are
// strict: unknown keys and wrongly typed values raise ConfigError; missing
// keys keep their defaults.
nlohmann::json ToJson(const MelConfig& c);
nlohmann::json ToJson(const NetworkConfig& c);
nlohmann::json ToJson(const TrainConfig& c);
nlohmann::json ToJson(const Stage2Config& c);
nlohmann::json ToJson(const TsneConfig& c);
MelConfig MelConfigFromJson(const nlohmann::json& j);
NetworkConfig NetworkConfigFromJson(const nlohmann::json& j);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);
Stage2Config Stage2ConfigFromJson(const nlohmann::json& j);
TsneConfig TsneConfigFromJson(const nlohmann::json& j);
losses::LossWeights StrictLossWeightsFromJson(const nlohmann::json& j);

// Everything a config file can set. Top-level sections: seed, mel,
// network, train, loss_weights, stage2, tsne.
struct ConfigFile {
  std::optional<uint64_t> seed;
  MelConfig mel;
  NetworkConfig network;
  TrainConfig train;
  losses::LossWeights weights;
  Stage2Config stage2;
  TsneConfig tsne;
  nlohmann::json raw = nlohmann::json::object();
};

// YAML (a JSON document is also valid YAML). Throws ConfigError.
ConfigFile ParseConfigText(const std::string& text);
ConfigFile LoadConfigFile(const std::string& path);

}  // namespace emovc

#endif  // EMOVC_CONFIG_H_
