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

#include "emovc/emotion_embedder.h"

#include <algorithm>
#include <filesystem>
#include <numeric>

#include <glog/logging.h>

#include "emovc/config.h"
#include "emovc/optimizer.h"

namespace emovc {

using ad::Var;

namespace {

bool InTrainingSplit(const UtteranceRecord& r) {
  return !r.split || *r.split == Split::kTrain;
}

}  // namespace

CheckpointSet TrainStage1(const Manifest& manifest, FeatureStore& features,
                          RunOptions opts, const std::string& out_dir) {
  for (const auto& r : manifest.records) {
    if (InTrainingSplit(r) && !r.emotion) {
      throw ConfigError("stage one needs emotion labels; record '" + r.id + "' has none");
    }
  }
  opts.train.domain_kind = DomainKind::kEmotion;
  opts.train.style_loss = losses::StyleLossMode::kVanilla;
  opts.weights.demo = 0.0;
  return RunTraining(manifest, features, opts, out_dir);
}

CheckpointSet TrainStage1(const std::string& manifest_path, RunOptions opts,
                          const std::string& out_dir) {
  Manifest manifest = ParseManifest(manifest_path);
  const std::string splits = SplitsPath(manifest_path);
  if (std::filesystem::exists(splits)) ApplySplits(splits, &manifest.records);
  FeatureStore features(opts.mel, CacheDirFromEnv());
  return TrainStage1(manifest, features, std::move(opts), out_dir);
}

Stage2History TrainEmotionHead(EmotionClassifier* model,
                               const std::vector<MelSpectrogram>& mels,
                               const std::vector<int>& labels,
                               const Stage2Config& cfg) {
  if (mels.size() != labels.size() || mels.empty()) {
    throw std::invalid_argument("TrainEmotionHead: need equally many mels and labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= model->num_classes()) {
      throw std::out_of_range("TrainEmotionHead: label " + std::to_string(y) + " out of range");
    }
  }

  // The trunk is frozen, so its activations are computed once.
  std::vector<Var> trunk_out;
  trunk_out.reserve(mels.size());
  for (const auto& m : mels) {
    if (m.n_mels() != model->trunk_config().n_mels) {
      throw std::invalid_argument("TrainEmotionHead: mel bin count mismatch");
    }
    trunk_out.push_back(model->Trunk(MelToVar(m)).Detach());
  }
  model->trunk_params().ZeroGrad();

  AdamWOptions opt;
  opt.learning_rate = cfg.learning_rate;
  opt.weight_decay = cfg.weight_decay;
  AdamW adam(&model->head_params(), opt);
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(mels.size());
  std::iota(order.begin(), order.end(), 0);
  size_t cursor = order.size();
  const size_t batch = std::min<size_t>(cfg.batch_size, mels.size());

  Stage2History history;
  for (int step = 0; step < cfg.steps; ++step) {
    Var loss;
    for (size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      const size_t i = order[cursor++];
      const Var logits = model->Head(trunk_out[i]).logits;
      const Var ce = ad::Scale(ad::Element(ad::LogSoftmaxCols(logits), labels[i], 0),
                               -1.0 / static_cast<double>(batch));
      loss = loss.defined() ? ad::Add(loss, ce) : ce;
    }
    history.loss.push_back(loss.item());
    model->head_params().ZeroGrad();
    loss.Backward();
    adam.Step();
  }
  model->head_params().ZeroGrad();

  int correct = 0;
  for (size_t i = 0; i < mels.size(); ++i) {
    const Eigen::VectorXd logits = model->Head(trunk_out[i]).logits.value().col(0);
    Eigen::Index arg = 0;
    logits.maxCoeff(&arg);
    correct += static_cast<int>(arg) == labels[i] ? 1 : 0;
  }
  history.final_accuracy = 100.0 * correct / static_cast<double>(mels.size());
  return history;
}

std::shared_ptr<EmotionClassifier> TrainStage2(const std::string& stage1_ckpt,
                                               const Manifest& manifest,
                                               FeatureStore& features,
                                               const Stage2Config& cfg,
                                               const std::string& out_path,
                                               Stage2History* history) {
  const Checkpoint ckpt = LoadCheckpoint(stage1_ckpt);
  if (ckpt.meta.value("kind", "") != "vc") {
    throw CheckpointError(stage1_ckpt + " is not a stage-one checkpoint");
  }
  const NetworkConfig net = NetworkConfigFromJson(ckpt.meta.at("network"));
  if (net.domain_kind != DomainKind::kEmotion) {
    LOG(WARNING) << stage1_ckpt << " was trained on speaker domains; using its trunk anyway";
  }
  StyleEncoder se(net, 0);
  ckpt.RestoreParams("style_encoder", &se.params());

  auto model = std::make_shared<EmotionClassifier>(net, kNumEmotions, cfg.seed);
  model->LoadTrunkFrom(se);

  std::vector<MelSpectrogram> mels;
  std::vector<int> labels;
  for (const auto& r : manifest.records) {
    if (!InTrainingSplit(r) || !r.emotion) continue;
    mels.push_back(features.Get(r).mel);
    labels.push_back(r.emotion->index);
  }
  if (mels.empty()) throw ConfigError("stage two: no emotion-labelled training records");

  const Stage2History h = TrainEmotionHead(model.get(), mels, labels, cfg);
  LOG(INFO) << "stage two finished, training accuracy " << h.final_accuracy << "%";
  if (history) *history = h;
  SaveEmotionClassifier(*model, out_path);
  return model;
}

EmotionEmbedding ExtractEmbedding(const MelSpectrogram& x, const EmotionClassifier& c) {
  const Var e = c.Embed(MelToVar(x));
  if (!e.value().allFinite()) throw std::domain_error("ExtractEmbedding: non-finite output");
  return {e.value().col(0)};
}

Eigen::VectorXd ClassifyEmotion(const MelSpectrogram& x, const EmotionClassifier& c) {
  return c.Forward(MelToVar(x)).logits.value().col(0);
}

}  // namespace emovc
