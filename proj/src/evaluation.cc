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

#include "emovc/evaluation.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <glog/logging.h>

#include "emovc/losses.h"
#include "emovc/npy.h"

namespace emovc::eval {

namespace fs = std::filesystem;

namespace {

double MatchPercent(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw std::invalid_argument("label streams differ in length");
  if (a.empty()) throw std::invalid_argument("empty label streams");
  size_t hits = 0;
  for (size_t i = 0; i < a.size(); ++i) hits += a[i] == b[i] ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(a.size());
}

std::u32string DecodeUtf8(const std::string& s) {
  std::u32string out;
  for (size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = 1;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    }
    if (c >= 0xF8 || (c >= 0x80 && c < 0xC0) || i + len > s.size()) {
      out.push_back(c);  // stray byte, kept as-is
      ++i;
      continue;
    }
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += len;
  }
  return out;
}

struct Stats4 {
  double mean = 0, std = 0, min = 0, max = 0;
};

Stats4 Describe(const std::vector<double>& v) {
  Stats4 s;
  if (v.empty()) return s;
  const Eigen::Map<const Eigen::VectorXd> m(v.data(), static_cast<Eigen::Index>(v.size()));
  s.mean = m.mean();
  s.std = std::sqrt((m.array() - s.mean).square().mean());
  s.min = m.minCoeff();
  s.max = m.maxCoeff();
  return s;
}

Eigen::VectorXd FrameLogEnergy(const MelSpectrogram& mel) {
  Eigen::VectorXd e(mel.frames());
  for (int t = 0; t < mel.frames(); ++t) {
    const double peak = mel.values.row(t).maxCoeff();
    e(t) = peak + std::log((mel.values.row(t).array() - peak).exp().sum());
  }
  return e;
}

constexpr int kNumCepstra = 13;

}  // namespace

double AccGt(std::span<const std::string> pred, std::span<const std::string> gt) {
  for (const auto& g : gt) {
    if (g.empty()) throw std::invalid_argument("AccGt: missing ground-truth label");
  }
  return MatchPercent(pred, gt);
}

double AccSvm(std::span<const std::string> pred_src, std::span<const std::string> pred_conv) {
  return MatchPercent(pred_src, pred_conv);
}

double MaeEmbed(const EmotionEmbedding& e_src, const EmotionEmbedding& e_conv) {
  if (e_src.values.size() != e_conv.values.size()) {
    throw std::invalid_argument("MaeEmbed: embedding widths differ");
  }
  return losses::DemoLoss(e_src.values, e_conv.values);
}

std::optional<double> Pcc(const F0Contour& c_src, const F0Contour& c_conv) {
  const size_t len = std::min(c_src.size(), c_conv.size());
  const F0Contour a = ResampleContour(c_src, len);
  const F0Contour b = ResampleContour(c_conv, len);
  std::vector<double> xs, ys;
  for (size_t i = 0; i < len; ++i) {
    if (a.voiced[i] && b.voiced[i]) {
      xs.push_back(a.hz[i]);
      ys.push_back(b.hz[i]);
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const Eigen::Map<const Eigen::ArrayXd> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Eigen::Map<const Eigen::ArrayXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const Eigen::ArrayXd dx = x - x.mean();
  const Eigen::ArrayXd dy = y - y.mean();
  const double denom = std::sqrt(dx.square().sum() * dy.square().sum());
  if (denom == 0.0) return std::nullopt;
  return (dx * dy).sum() / denom;
}

size_t Levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double Cer(const std::string& ref, const std::string& hyp) {
  const std::u32string r = DecodeUtf8(ref);
  if (r.empty()) throw std::invalid_argument("Cer: empty reference");
  return 100.0 * static_cast<double>(Levenshtein(r, DecodeUtf8(hyp))) /
         static_cast<double>(r.size());
}

double Sss(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("Sss: embedding widths differ");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("Sss: zero-norm embedding");
  return a.dot(b) / (na * nb);
}

std::vector<bool> EnergyVoicing(const MelSpectrogram& mel) {
  const Eigen::VectorXd e = FrameLogEnergy(mel);
  std::vector<bool> voiced(e.size(), false);
  if (e.size() == 0) return voiced;
  const double floor = e.maxCoeff() - std::log(1000.0);
  for (Eigen::Index t = 0; t < e.size(); ++t) voiced[t] = e(t) >= floor;
  return voiced;
}

F0Contour ContourFromMel(const MelSpectrogram& mel, const MelConfig& cfg) {
  const ad::Var track = MelPitchTracker(cfg).Track(MelToVar(mel));
  F0Contour c;
  c.hz.assign(track.value().data(), track.value().data() + track.cols());
  c.voiced = EnergyVoicing(mel);
  for (size_t i = 0; i < c.size(); ++i) {
    if (!c.voiced[i]) c.hz[i] = 0.0;
  }
  return c;
}

Eigen::VectorXd AcousticFeatures(const MelSpectrogram& mel, const MelConfig& cfg) {
  if (mel.frames() < 1) throw std::invalid_argument("AcousticFeatures: empty mel");
  const int bins = mel.n_mels();
  const int frames = mel.frames();

  // Orthonormal DCT-II across mel bins.
  Eigen::MatrixXd dct(kNumCepstra, bins);
  for (int k = 0; k < kNumCepstra; ++k) {
    const double norm = std::sqrt((k == 0 ? 1.0 : 2.0) / bins);
    for (int n = 0; n < bins; ++n) {
      dct(k, n) = norm * std::cos(std::numbers::pi * k * (2 * n + 1) / (2.0 * bins));
    }
  }
  const Eigen::MatrixXd cep = mel.values * dct.transpose();  // [frames x 13]
  Eigen::MatrixXd delta(frames, kNumCepstra);
  for (int t = 0; t < frames; ++t) {
    const int lo = std::max(0, t - 1), hi = std::min(frames - 1, t + 1);
    delta.row(t) = (cep.row(hi) - cep.row(lo)) / 2.0;
  }

  const F0Contour f0 = ContourFromMel(mel, cfg);
  std::vector<double> pitch;
  for (size_t i = 0; i < f0.size(); ++i) {
    if (f0.voiced[i]) pitch.push_back(f0.hz[i]);
  }
  const Eigen::VectorXd energy = FrameLogEnergy(mel);

  std::vector<Stats4> stats;
  stats.push_back(Describe(pitch));
  stats.push_back(Describe(std::vector<double>(energy.data(), energy.data() + energy.size())));
  const std::array<const Eigen::MatrixXd*, 2> blocks = {&cep, &delta};
  for (const Eigen::MatrixXd* m : blocks) {
    for (int k = 0; k < kNumCepstra; ++k) {
      std::vector<double> col(frames);
      for (int t = 0; t < frames; ++t) col[t] = (*m)(t, k);
      stats.push_back(Describe(col));
    }
  }
  Eigen::VectorXd out(4 * stats.size());
  for (size_t i = 0; i < stats.size(); ++i) {
    out.segment<4>(4 * i) << stats[i].mean, stats[i].std, stats[i].min, stats[i].max;
  }
  return out;
}

EmotionSvm EmotionSvm::Train(const std::vector<MelSpectrogram>& mels,
                             const std::vector<std::string>& labels, const MelConfig& cfg,
                             const SvmOptions& options) {
  if (mels.size() != labels.size()) {
    throw std::invalid_argument("EmotionSvm: need equally many mels and labels");
  }
  EmotionSvm s;
  s.cfg_ = cfg;
  std::vector<Eigen::VectorXd> x;
  std::vector<int> y;
  for (size_t i = 0; i < mels.size(); ++i) {
    auto it = std::find(s.names_.begin(), s.names_.end(), labels[i]);
    if (it == s.names_.end()) {
      s.names_.push_back(labels[i]);
      it = s.names_.end() - 1;
    }
    y.push_back(static_cast<int>(it - s.names_.begin()));
    x.push_back(AcousticFeatures(mels[i], cfg));
  }
  s.model_ = SvmModel::Train(x, y, options);
  return s;
}

std::string EmotionSvm::Predict(const MelSpectrogram& mel) const {
  return names_.at(model_.Predict(AcousticFeatures(mel, cfg_)));
}

void ConversionResult::Validate() const {
  for (const auto* g : {&tags.source_gender, &tags.target_gender}) {
    if (*g && **g != "M" && **g != "F") {
      throw std::invalid_argument("gender tag must be M or F, got '" + **g + "'");
    }
  }
  for (const auto* a : {&tags.source_accent, &tags.target_accent}) {
    if (*a && (*a)->empty()) throw std::invalid_argument("empty accent tag");
  }
  if (source_emotion && !EmotionIndex(*source_emotion)) {
    throw std::invalid_argument("unknown emotion tag '" + *source_emotion + "'");
  }
  if (!converted_mel.values.allFinite()) {
    throw std::invalid_argument("converted mel of " + source_id + " is not finite");
  }
}

PairMetrics EvaluatePair(const ConversionResult& r, const EvaluationAdapters& ad) {
  r.Validate();
  PairMetrics p;
  p.source_id = r.source_id;
  p.target_speaker = r.target_speaker;
  p.groups.push_back("All");
  if (r.source_emotion) p.groups.push_back("emotion:" + *r.source_emotion);
  if (r.tags.source_gender && r.tags.target_gender) {
    p.groups.push_back("gender:" + *r.tags.source_gender + "->" + *r.tags.target_gender);
  }
  if (r.tags.source_accent && r.tags.target_accent) {
    p.groups.push_back("accent:" + *r.tags.source_accent + "->" + *r.tags.target_accent);
  }
  for (const auto& name : kMetricNames) p.values[name] = std::nullopt;

  auto guarded = [&](const char* name, auto&& fn) {
    try {
      p.values[name] = fn();
    } catch (const std::exception& e) {
      LOG(WARNING) << name << " unavailable for " << r.source_id << ": " << e.what();
      p.values[name] = std::nullopt;
    }
  };
  auto waveform = [&](const std::optional<Waveform>& w,
                      const MelSpectrogram& mel) -> std::optional<Waveform> {
    if (w) return w;
    if (ad.vocoder) return ad.vocoder->Synthesize(mel);
    return std::nullopt;
  };

  if (ad.svm) {
    const std::string pred_conv = ad.svm->Predict(r.converted_mel);
    guarded("acc_svm", [&]() -> std::optional<double> {
      return pred_conv == ad.svm->Predict(r.source_mel) ? 100.0 : 0.0;
    });
    if (r.source_emotion) {
      p.values["acc_gt"] = pred_conv == *r.source_emotion ? 100.0 : 0.0;
    }
  }
  if (ad.c_emo) {
    guarded("mae_embed", [&]() -> std::optional<double> {
      return MaeEmbed(ExtractEmbedding(r.source_mel, *ad.c_emo),
                      ExtractEmbedding(r.converted_mel, *ad.c_emo));
    });
  }
  guarded("pcc", [&]() -> std::optional<double> {
    if (r.source_wav && r.converted_wav) {
      return Pcc(ExtractF0(*r.source_wav, ad.mel), ExtractF0(*r.converted_wav, ad.mel));
    }
    return Pcc(ContourFromMel(r.source_mel, ad.mel), ContourFromMel(r.converted_mel, ad.mel));
  });

  const bool need_conv_wav = ad.mos_predictor || ad.speaker_verifier ||
                             (ad.transcriber && !r.converted_transcript);
  std::optional<Waveform> conv_wav;
  if (need_conv_wav) conv_wav = waveform(r.converted_wav, r.converted_mel);

  if (ad.mos_predictor && conv_wav) {
    guarded("pmos", [&]() -> std::optional<double> { return ad.mos_predictor(*conv_wav); });
  }
  if (r.source_transcript) {
    if (r.converted_transcript) {
      guarded("cer", [&]() -> std::optional<double> {
        return Cer(*r.source_transcript, *r.converted_transcript);
      });
    } else if (ad.transcriber && conv_wav) {
      guarded("cer", [&]() -> std::optional<double> {
        return Cer(*r.source_transcript, ad.transcriber(*conv_wav));
      });
    }
  }
  if (ad.speaker_verifier && conv_wav) {
    if (auto src_wav = waveform(r.source_wav, r.source_mel)) {
      guarded("sss", [&]() -> std::optional<double> {
        return Sss(ad.speaker_verifier(*src_wav), ad.speaker_verifier(*conv_wav));
      });
    }
  }
  return p;
}

MetricReport Aggregate(std::vector<PairMetrics> pairs) {
  MetricReport report;
  std::vector<std::string> order = {"All"};
  std::map<std::string, std::vector<const PairMetrics*>> members;
  for (const auto& p : pairs) {
    for (const auto& g : p.groups) {
      if (!members.contains(g) && g != "All") order.push_back(g);
      members[g].push_back(&p);
    }
  }
  std::sort(order.begin() + 1, order.end());
  for (const auto& g : order) {
    if (!members.contains(g)) continue;
    GroupAggregate agg;
    agg.group = g;
    agg.pairs = static_cast<int>(members[g].size());
    for (const auto& name : kMetricNames) {
      std::vector<double> v;
      for (const PairMetrics* p : members[g]) {
        auto it = p->values.find(name);
        if (it != p->values.end() && it->second) v.push_back(*it->second);
      }
      if (v.empty()) {
        agg.metrics[name] = std::nullopt;
        continue;
      }
      MetricStats s;
      s.count = static_cast<int>(v.size());
      double sum = 0.0;
      for (double x : v) sum += x;
      s.mean = sum / s.count;
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / s.count);
      agg.metrics[name] = s;
    }
    report.groups.push_back(std::move(agg));
  }
  report.pairs = std::move(pairs);
  return report;
}

MetricReport EvaluatePairs(const std::vector<ConversionResult>& results,
                           const EvaluationAdapters& adapters) {
  if (results.empty()) throw std::invalid_argument("EvaluatePairs: no conversion results");
  std::vector<PairMetrics> pairs;
  pairs.reserve(results.size());
  for (const auto& r : results) pairs.push_back(EvaluatePair(r, adapters));
  return Aggregate(std::move(pairs));
}

nlohmann::json MetricReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : pairs) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : p.values) values[k] = v ? nlohmann::json(*v) : nlohmann::json();
    rows.push_back({{"source_id", p.source_id},
                    {"target_speaker", p.target_speaker},
                    {"groups", p.groups},
                    {"metrics", values}});
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [k, s] : g.metrics) {
      metrics[k] = s ? nlohmann::json{{"mean", s->mean}, {"std", s->std}, {"count", s->count}}
                     : nlohmann::json();
    }
    aggs.push_back({{"group", g.group}, {"pairs", g.pairs}, {"metrics", metrics}});
  }
  return {{"pairs", rows}, {"aggregates", aggs}};
}

std::string MetricReport::ToCsv() const {
  const std::map<std::string, double> scale = {{"mae_embed", 100.0}, {"pcc", 100.0},
                                               {"sss", 100.0}};
  std::ostringstream out;
  out.precision(10);
  out << "group,pairs";
  for (const auto& name : kMetricNames) out << ',' << name << "_mean," << name << "_std";
  out << '\n';
  for (const auto& g : groups) {
    out << '"' << g.group << "\"," << g.pairs;
    for (const auto& name : kMetricNames) {
      const auto& s = g.metrics.at(name);
      if (!s) {
        out << ",,";
        continue;
      }
      const double k = scale.contains(name) ? scale.at(name) : 1.0;
      out << ',' << s->mean * k << ',' << s->std * k;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

MelSpectrogram ReadMel(const fs::path& path) {
  MelSpectrogram m;
  if (path.extension() == ".npz") {
    auto arrays = npy::ReadNpz(path.string());
    if (!arrays.contains("mel")) throw FormatError(path.string() + ": no 'mel' member");
    m.values = arrays.at("mel");
  } else {
    m.values = npy::ReadNpy(path.string());
  }
  return m;
}

std::optional<std::string> OptString(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::vector<ConversionResult> LoadConversionResults(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error(dir + " is not a directory");
  std::vector<fs::path> sidecars;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    const bool provenance = name == "run.json" || name.ends_with(".run.json");
    if (e.path().extension() == ".json" && !provenance) sidecars.push_back(e.path());
  }
  std::sort(sidecars.begin(), sidecars.end());
  std::vector<ConversionResult> out;
  for (const auto& path : sidecars) {
    std::ifstream in(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      auto resolve = [&](const std::string& p) {
        const fs::path fp(p);
        return fp.is_absolute() ? fp : fs::path(dir) / fp;
      };
      ConversionResult r;
      r.source_id = j.at("source_id").get<std::string>();
      r.target_speaker = j.value("target_speaker", "");
      r.source_mel = ReadMel(resolve(j.at("source_mel").get<std::string>()));
      r.converted_mel = ReadMel(resolve(j.at("converted_mel").get<std::string>()));
      if (auto w = OptString(j, "source_wav")) r.source_wav = LoadAndResample(resolve(*w).string());
      if (auto w = OptString(j, "converted_wav")) {
        r.converted_wav = LoadAndResample(resolve(*w).string());
      }
      r.source_emotion = OptString(j, "source_emotion");
      r.source_transcript = OptString(j, "source_transcript");
      r.converted_transcript = OptString(j, "converted_transcript");
      r.tags.source_gender = OptString(j, "source_gender");
      r.tags.target_gender = OptString(j, "target_gender");
      r.tags.source_accent = OptString(j, "source_accent");
      r.tags.target_accent = OptString(j, "target_accent");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  if (out.empty()) throw std::runtime_error("no conversion sidecars (*.json) in " + dir);
  return out;
}

}  // namespace emovc::eval
