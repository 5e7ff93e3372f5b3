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

#include "emovc/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <glog/logging.h>

#include "json.hpp"

namespace emovc {

namespace fs = std::filesystem;

void EmbeddingSet::Validate() const {
  const size_t n = vectors.size();
  if (ids.size() != n || speakers.size() != n || emotions.size() != n) {
    throw std::invalid_argument("EmbeddingSet: label lists differ in length");
  }
  for (const auto& v : vectors) {
    if (v.size() != vectors.front().size()) {
      throw std::invalid_argument("EmbeddingSet: vectors differ in width");
    }
  }
}

EmbeddingSet CollectStyleEmbeddings(const VcNetworks& nets,
                                    const std::vector<UtteranceRecord>& records,
                                    FeatureStore& features,
                                    const std::vector<std::string>& speaker_labels,
                                    bool require_emotion) {
  EmbeddingSet set;
  for (const auto& r : records) {
    if (require_emotion && !r.emotion) {
      throw ConfigError("leakage scoring needs emotion labels; record '" + r.id + "' has none");
    }
    const std::optional<DomainCode> domain = RecordDomain(r, nets.config.domain_kind);
    if (!domain) throw ConfigError("record '" + r.id + "' has no domain label");
    const StyleEmbedding s = StyleEncode(features.Get(r).mel, *domain, nets);
    set.ids.push_back(r.id);
    set.vectors.push_back(s.values);
    const int spk = r.speaker.index;
    set.speakers.push_back(spk >= 0 && spk < static_cast<int>(speaker_labels.size())
                               ? speaker_labels[spk]
                               : std::to_string(spk));
    set.emotions.push_back(r.emotion ? std::string(EmotionName(r.emotion->index)) : "");
  }
  return set;
}

namespace {

Eigen::MatrixXd SquaredDistances(const std::vector<Eigen::VectorXd>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (pts[i] - pts[j]).squaredNorm();
  }
  return d;
}

// Conditional affinities with per-row precision found by bisection so the
// row entropy matches log(perplexity).
Eigen::MatrixXd Affinities(const Eigen::MatrixXd& d2, double perplexity) {
  const Eigen::Index n = d2.rows();
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    Eigen::VectorXd row(n);
    for (int iter = 0; iter < 200; ++iter) {
      double min_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j != i) min_d = std::min(min_d, d2(i, j));
      }
      double sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - min_d));
        sum += row(j);
      }
      row /= sum;
      double entropy = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (row(j) > 1e-300) entropy -= row(j) * std::log(row(j));
      }
      const double gap = entropy - target;
      if (std::abs(gap) < 1e-6) break;
      if (gap > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
    p.row(i) = row.transpose();
  }
  return p;
}

}  // namespace

Eigen::MatrixXd ProjectTsne(const std::vector<Eigen::VectorXd>& points, const TsneConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n < 5) throw std::invalid_argument("t-SNE needs at least 5 points");
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw std::invalid_argument("t-SNE: ragged points");
  }
  const double perplexity = std::min(cfg.perplexity, static_cast<double>(n - 1) / 3.0);

  Eigen::MatrixXd p = Affinities(SquaredDistances(points), perplexity);
  p = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = normal(rng);
    y(i, 1) = normal(rng);
  }
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd num(n, n), grad(n, 2);

  for (int it = 0; it < cfg.iterations; ++it) {
    const bool early = it < cfg.exaggeration_iterations;
    const double exaggeration = early ? cfg.early_exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;
    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        num(i, j) = num(j, i) = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        z += 2.0 * num(i, j);
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / z, 1e-12);
        grad.row(i) += 4.0 * (exaggeration * p(i, j) - q) * num(i, j) * (y.row(i) - y.row(j));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) {
        const bool same_sign = (grad(i, k) > 0) == (velocity(i, k) > 0);
        gains(i, k) = std::max(same_sign ? gains(i, k) * 0.8 : gains(i, k) + 0.2, 0.01);
      }
    }
    velocity = momentum * velocity - cfg.learning_rate * gains.cwiseProduct(grad);
    y += velocity;
    y.rowwise() -= y.colwise().mean();
  }
  return y;
}

double Silhouette(const std::vector<Eigen::VectorXd>& points,
                  const std::vector<std::string>& labels) {
  if (points.size() != labels.size()) {
    throw std::invalid_argument("Silhouette: points and labels differ in length");
  }
  std::map<std::string, std::vector<size_t>> clusters;
  for (size_t i = 0; i < labels.size(); ++i) clusters[labels[i]].push_back(i);
  if (clusters.size() < 2) throw std::invalid_argument("Silhouette: needs two distinct labels");

  std::vector<double> scores;
  scores.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& own = clusters.at(labels[i]);
    if (own.size() == 1) {
      scores.push_back(0.0);
      continue;
    }
    double a = 0.0;
    for (size_t j : own) a += (points[i] - points[j]).norm();
    a /= static_cast<double>(own.size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [label, members] : clusters) {
      if (label == labels[i]) continue;
      double sum = 0.0;
      for (size_t j : members) sum += (points[i] - points[j]).norm();
      b = std::min(b, sum / static_cast<double>(members.size()));
    }
    const double denom = std::max(a, b);
    scores.push_back(denom > 0.0 ? (b - a) / denom : 0.0);
  }
  // Summing in sorted order keeps the mean independent of input order.
  std::sort(scores.begin(), scores.end());
  double total = 0.0;
  for (double s : scores) total += s;
  return total / static_cast<double>(scores.size());
}

LeakageScore ScoreLeakage(const EmbeddingSet& set) {
  set.Validate();
  for (const auto& e : set.emotions) {
    if (e.empty()) throw ConfigError("leakage scoring needs an emotion label on every embedding");
  }
  if (std::set<std::string>(set.emotions.begin(), set.emotions.end()).size() < 2 ||
      std::set<std::string>(set.speakers.begin(), set.speakers.end()).size() < 2) {
    throw std::invalid_argument("leakage scoring needs two emotions and two speakers");
  }
  LeakageScore s;
  s.by_emotion = Silhouette(set.vectors, set.emotions);
  s.by_speaker = Silhouette(set.vectors, set.speakers);
  s.leakage_flag = s.by_emotion > s.by_speaker;
  return s;
}

std::string RenderScatterSvg(const Eigen::MatrixXd& layout,
                             const std::vector<std::string>& labels,
                             const std::string& title) {
  if (layout.cols() != 2 || layout.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("RenderScatterSvg: layout must be N x 2 with N labels");
  }
  static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                             "#bcbd22", "#17becf"};
  constexpr double kSize = 600.0, kMargin = 40.0, kLegend = 140.0;
  std::map<std::string, int> colour;
  for (const auto& l : labels) colour.emplace(l, 0);
  int next = 0;
  for (auto& [label, idx] : colour) idx = next++ % 10;

  Eigen::Vector2d lo(0, 0), hi(1, 1);
  if (layout.rows() > 0) {
    lo = layout.colwise().minCoeff().transpose();
    hi = layout.colwise().maxCoeff().transpose();
  }
  const Eigen::Vector2d span = (hi - lo).cwiseMax(1e-12);
  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize + kLegend
      << "\" height=\"" << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << escape(title) << "</text>\n";
  for (Eigen::Index i = 0; i < layout.rows(); ++i) {
    const double x = kMargin + (layout(i, 0) - lo(0)) / span(0) * (kSize - 2 * kMargin);
    const double y = kSize - kMargin - (layout(i, 1) - lo(1)) / span(1) * (kSize - 2 * kMargin);
    svg << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"4\" fill=\""
        << kPalette[colour.at(labels[i])] << "\" fill-opacity=\"0.8\"/>\n";
  }
  double ly = kMargin;
  for (const auto& [label, idx] : colour) {
    svg << "<circle cx=\"" << kSize + 10 << "\" cy=\"" << ly << "\" r=\"5\" fill=\""
        << kPalette[idx] << "\"/>\n"
        << "<text x=\"" << kSize + 22 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(label) << "</text>\n";
    ly += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

void WriteDiagnostics(const std::string& out_dir, const EmbeddingSet& set,
                      const Eigen::MatrixXd& layout, const LeakageScore& score) {
  set.Validate();
  if (layout.rows() != static_cast<Eigen::Index>(set.size()) || layout.cols() != 2) {
    throw std::invalid_argument("WriteDiagnostics: layout does not match the embedding set");
  }
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  nlohmann::json emb = nlohmann::json::array();
  for (size_t i = 0; i < set.size(); ++i) {
    const auto& v = set.vectors[i];
    emb.push_back({{"id", set.ids[i]},
                   {"speaker", set.speakers[i]},
                   {"emotion", set.emotions[i]},
                   {"vector", std::vector<double>(v.data(), v.data() + v.size())}});
  }
  std::ofstream(dir / "embeddings.json") << emb.dump(2) << '\n';

  std::ofstream csv(dir / "layout.csv");
  csv.precision(17);
  csv << "id,speaker,emotion,x,y\n";
  for (size_t i = 0; i < set.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    csv << set.ids[i] << ',' << set.speakers[i] << ',' << set.emotions[i] << ','
        << layout(r, 0) << ',' << layout(r, 1) << '\n';
  }

  std::ofstream(dir / "scatter.svg")
      << RenderScatterSvg(layout, set.emotions, "style embeddings by emotion");

  const nlohmann::json leak = {{"by_emotion", score.by_emotion},
                               {"by_speaker", score.by_speaker},
                               {"leakage_flag", score.leakage_flag},
                               {"num_embeddings", set.size()}};
  std::ofstream(dir / "leakage.json") << leak.dump(2) << '\n';
  LOG(INFO) << "leakage diagnostics written to " << out_dir;
}

}  // namespace emovc
