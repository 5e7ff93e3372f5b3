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

#ifndef EMOVC_DIAGNOSTICS_H_
#define EMOVC_DIAGNOSTICS_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emovc/data_ingest.h"
#include "emovc/networks.h"
#include "emovc/trainer.h"

// Emotion-leakage analysis of style embeddings: collection, a 2-D t-SNE
// layout for presentation, and silhouette-based scoring.
namespace emovc {

struct EmbeddingSet {
  std::vector<std::string> ids;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<std::string> speakers;
  std::vector<std::string> emotions;  // empty string when unlabelled

  size_t size() const { return vectors.size(); }
  // Throws std::invalid_argument on ragged lists or widths.
  void Validate() const;
};

struct TsneConfig {
  double perplexity = 15.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  uint64_t seed = 0;

  friend bool operator==(const TsneConfig&, const TsneConfig&) = default;
};

// One style-encoder embedding per record, conditioned on the record's own
// domain. Speaker indices are named through `speaker_labels` when given.
// `require_emotion` turns unlabelled records into a ConfigError.
EmbeddingSet CollectStyleEmbeddings(const VcNetworks& nets,
                                    const std::vector<UtteranceRecord>& records,
                                    FeatureStore& features,
                                    const std::vector<std::string>& speaker_labels = {},
                                    bool require_emotion = true);

// Exact t-SNE, N x 2. Needs at least 5 points. The perplexity is capped at
// (N - 1) / 3 for small sets.
Eigen::MatrixXd ProjectTsne(const std::vector<Eigen::VectorXd>& points,
                            const TsneConfig& cfg);

// Mean silhouette over all points under `labels` (Euclidean distance).
// Members of singleton clusters score 0. Needs >= 2 distinct labels.
double Silhouette(const std::vector<Eigen::VectorXd>& points,
                  const std::vector<std::string>& labels);

struct LeakageScore {
  double by_emotion = 0.0;
  double by_speaker = 0.0;
  bool leakage_flag = false;  // by_emotion > by_speaker
};

LeakageScore ScoreLeakage(const EmbeddingSet& set);

// Scatter plot of a 2-D layout coloured by `labels`.
std::string RenderScatterSvg(const Eigen::MatrixXd& layout,
                             const std::vector<std::string>& labels,
                             const std::string& title);

// Writes embeddings.json, layout.csv, scatter.svg and leakage.json.
void WriteDiagnostics(const std::string& out_dir, const EmbeddingSet& set,
                      const Eigen::MatrixXd& layout, const LeakageScore& score);

}  // namespace emovc

#endif  // EMOVC_DIAGNOSTICS_H_
