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

#ifndef EMOVC_EMOTION_EMBEDDER_H_
#define EMOVC_EMOTION_EMBEDDER_H_

#include <memory>
#include <string>
#include <vector>

#include "emovc/audio.h"
#include "emovc/networks.h"
#include "emovc/trainer.h"

// Two-stage construction of the emotion embedder C_emo. Stage one trains a
// conversion model whose domains are emotion classes; stage two freezes
// that model's style-encoder trunk and fits a classification head on top.
namespace emovc {

struct EmotionEmbedding {
  Eigen::VectorXd values;  // width 64
};

struct Stage2Config {
  int steps = 500;
  int batch_size = 16;
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  uint64_t seed = 0;

  friend bool operator==(const Stage2Config&, const Stage2Config&) = default;
};

// Stage one: the conversion trainer with emotion-kind domains, the demo
// term disabled and the vanilla style loss. Throws ConfigError when a
// training record has no emotion label.
CheckpointSet TrainStage1(const std::string& manifest_path, RunOptions opts,
                          const std::string& out_dir);
CheckpointSet TrainStage1(const Manifest& manifest, FeatureStore& features,
                          RunOptions opts, const std::string& out_dir);

struct Stage2History {
  std::vector<double> loss;       // mean cross-entropy per step
  double final_accuracy = 0.0;    // training accuracy, percent
};

// Builds C_emo from a stage-one style encoder: copies its trunk, discards
// the per-domain heads, and trains only the classification head on the
// labelled mels. The trunk stays bit-identical.
Stage2History TrainEmotionHead(EmotionClassifier* model,
                               const std::vector<MelSpectrogram>& mels,
                               const std::vector<int>& labels,
                               const Stage2Config& cfg);

// File-level stage two. Loads the stage-one checkpoint, trains the head on
// the manifest's emotion-labelled training records, and writes `out_path`.
std::shared_ptr<EmotionClassifier> TrainStage2(const std::string& stage1_ckpt,
                                               const Manifest& manifest,
                                               FeatureStore& features,
                                               const Stage2Config& cfg,
                                               const std::string& out_path,
                                               Stage2History* history = nullptr);

// The activated 64-wide head layer; needs no emotion label.
EmotionEmbedding ExtractEmbedding(const MelSpectrogram& x, const EmotionClassifier& c);
// Logits over the emotion classes.
Eigen::VectorXd ClassifyEmotion(const MelSpectrogram& x, const EmotionClassifier& c);

}  // namespace emovc

#endif  // EMOVC_EMOTION_EMBEDDER_H_
