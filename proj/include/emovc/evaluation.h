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

#ifndef EMOVC_EVALUATION_H_
#define EMOVC_EVALUATION_H_

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emovc/audio.h"
#include "emovc/emotion_embedder.h"
#include "emovc/networks.h"
#include "emovc/svm.h"
#include "json.hpp"

namespace emovc::eval {

// Percentage of positions where the prediction equals the ground truth.
// Empty ground-truth labels count as missing and raise invalid_argument.
double AccGt(std::span<const std::string> pred, std::span<const std::string> gt);
// Percentage agreement between two prediction streams.
double AccSvm(std::span<const std::string> pred_src, std::span<const std::string> pred_conv);
// Mean absolute difference of two emotion embeddings (the demo distance).
double MaeEmbed(const EmotionEmbedding& e_src, const EmotionEmbedding& e_conv);
// Pearson correlation over jointly voiced frames after aligning both
// contours to the shorter length; nullopt with fewer than 2 such frames.
std::optional<double> Pcc(const F0Contour& c_src, const F0Contour& c_conv);
// Character-level Levenshtein distance over UTF-8 code points, as a
// percentage of the reference length. Throws on an empty reference.
double Cer(const std::string& ref, const std::string& hyp);
size_t Levenshtein(const std::u32string& a, const std::u32string& b);
// Cosine similarity. Throws on a zero-norm input.
double Sss(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Frames whose log energy lies within 30 dB of the utterance maximum.
std::vector<bool> EnergyVoicing(const MelSpectrogram& mel);
// Pitch contour estimated from a mel spectrogram (mel-domain tracker plus
// energy voicing), for conversions that have no waveform.
F0Contour ContourFromMel(const MelSpectrogram& mel, const MelConfig& cfg);

// Per-utterance statistics (mean, std, min, max) of pitch over voiced
// frames, log frame energy, 13 cepstral coefficients of the log-mel and
// their deltas: 112 values.
Eigen::VectorXd AcousticFeatures(const MelSpectrogram& mel, const MelConfig& cfg);

// Emotion SVM over acoustic features, labelled with emotion names.
class EmotionSvm {
 public:
  static EmotionSvm Train(const std::vector<MelSpectrogram>& mels,
                          const std::vector<std::string>& labels, const MelConfig& cfg,
                          const SvmOptions& options = {});
  std::string Predict(const MelSpectrogram& mel) const;

 private:
  MelConfig cfg_;
  SvmModel model_;
  std::vector<std::string> names_;
};

struct GroupTags {
  std::optional<std::string> source_gender;  // "M" or "F"
  std::optional<std::string> target_gender;
  std::optional<std::string> source_accent;
  std::optional<std::string> target_accent;
};

struct ConversionResult {
  std::string source_id;
  std::string target_speaker;
  MelSpectrogram source_mel;
  MelSpectrogram converted_mel;
  std::optional<Waveform> source_wav;
  std::optional<Waveform> converted_wav;
  std::optional<std::string> source_emotion;
  std::optional<std::string> source_transcript;
  // Precomputed hypothesis transcript of the converted speech.
  std::optional<std::string> converted_transcript;
  GroupTags tags;

  // Throws std::invalid_argument when tags leave their vocabularies or the
  // converted mel is not finite.
  void Validate() const;
};

// Optional external scorers. A metric whose scorer is missing is reported
// as absent.
struct EvaluationAdapters {
  const EmotionClassifier* c_emo = nullptr;
  const EmotionSvm* svm = nullptr;
  const Vocoder* vocoder = nullptr;
  std::function<std::string(const Waveform&)> transcriber;
  std::function<Eigen::VectorXd(const Waveform&)> speaker_verifier;
  std::function<double(const Waveform&)> mos_predictor;
  MelConfig mel;
};

inline const std::vector<std::string> kMetricNames = {"acc_gt", "acc_svm", "mae_embed", "pcc",
                                                      "pmos",   "cer",     "sss"};

struct PairMetrics {
  std::string source_id;
  std::string target_speaker;
  std::vector<std::string> groups;  // every group this pair belongs to
  std::map<std::string, std::optional<double>> values;
};

struct MetricStats {
  int count = 0;  // pairs with a value
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct GroupAggregate {
  std::string group;
  int pairs = 0;
  std::map<std::string, std::optional<MetricStats>> metrics;
};

struct MetricReport {
  std::vector<PairMetrics> pairs;
  std::vector<GroupAggregate> groups;

  nlohmann::json ToJson() const;
  // One row per group; mae_embed, pcc and sss are scaled by 100.
  std::string ToCsv() const;
};

PairMetrics EvaluatePair(const ConversionResult& r, const EvaluationAdapters& adapters);
MetricReport EvaluatePairs(const std::vector<ConversionResult>& results,
                           const EvaluationAdapters& adapters);
// Aggregates already-computed per-pair rows.
MetricReport Aggregate(std::vector<PairMetrics> pairs);

// Reads every *.json sidecar in `dir`, skipping provenance records
// (run.json, *.run.json). Mel paths may be .npy or .npz (member "mel"),
// waveforms any supported audio file; relative paths resolve against `dir`.
std::vector<ConversionResult> LoadConversionResults(const std::string& dir);

}  // namespace emovc::eval

#endif  // EMOVC_EVALUATION_H_
