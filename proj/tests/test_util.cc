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

#include "test_util.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <unistd.h>

namespace emovc::testing {

NetworkConfig TinyNetConfig(int num_domains, int n_mels, DomainKind kind) {
  NetworkConfig c;
  c.n_mels = n_mels;
  c.num_domains = num_domains;
  c.domain_kind = kind;
  c.gen_channels = 16;
  c.style_channels = 16;
  c.disc_channels = 16;
  c.mapping_hidden = 32;
  return c;
}

MelConfig TinyMelConfig(int n_mels) {
  MelConfig c;
  c.n_mels = n_mels;
  return c;
}

TrainConfig TinyTrainConfig(uint64_t seed) {
  TrainConfig c;
  c.batch_size = 2;
  c.crop_frames = 32;
  c.seed = seed;
  return c;
}

ad::Matrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                        double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  ad::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

Manifest AddSyntheticCorpus(FeatureStore& store, int speakers, int clips_per_speaker,
                            int frames, uint64_t seed, bool with_emotion) {
  const int bins = store.config().n_mels;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  Manifest m;
  for (int s = 0; s < speakers; ++s) m.speaker_labels.push_back("spk" + std::to_string(s));
  for (int s = 0; s < speakers; ++s) {
    for (int c = 0; c < clips_per_speaker; ++c) {
      const int emotion = c % kNumEmotions;
      const double peak = 2.0 + (3 * s) % (bins - 4);
      const double period = 6.0 + 2.0 * emotion;
      UtteranceFeatures f;
      f.mel.values.resize(frames, bins);
      for (int t = 0; t < frames; ++t) {
        const double swing = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * t / period);
        for (int b = 0; b < bins; ++b) {
          const double energy = swing * std::exp(-0.25 * (b - peak) * (b - peak)) +
                                0.1 * std::exp(-0.05 * (b - bins / 2.0) * (b - bins / 2.0));
          f.mel.values(t, b) = std::log(energy + 1e-5) + noise(rng);
        }
      }
      for (int t = 0; t < frames; ++t) {
        const bool voiced = t % 7 != 6;
        f.f0.voiced.push_back(voiced);
        f.f0.hz.push_back(voiced ? 120.0 + 40.0 * s + 10.0 * std::sin(t / 5.0 + c) : 0.0);
      }
      UtteranceRecord r;
      r.id = "s" + std::to_string(s) + "_c" + std::to_string(c);
      r.audio_path = "synthetic/" + r.id + ".wav";
      r.speaker = {s, DomainKind::kSpeaker};
      if (with_emotion) r.emotion = DomainCode{emotion, DomainKind::kEmotion};
      store.Put(r.id, std::move(f));
      m.records.push_back(std::move(r));
    }
  }
  return m;
}

TrainBatch MakeBatch(const Manifest& m, FeatureStore& store, int batch_size, int crop,
                     int latent_dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int num_speakers = m.num_speakers();
  const double pad = std::log(store.config().log_floor);
  TrainBatch batch;
  for (int b = 0; b < batch_size; ++b) {
    const UtteranceRecord& src = m.records[b % m.records.size()];
    const UtteranceRecord& ref = m.records[(b * 5 + 3) % m.records.size()];
    const UtteranceRecord& ref2 = m.records[(b * 3 + 1) % m.records.size()];
    TrainingSample s;
    const UtteranceFeatures& fs = store.Get(src);
    s.mel_src = CropMel(fs.mel, 0, crop, pad);
    const std::vector<double> f0 = NormalizeF0(fs.f0);
    s.f0_src = ad::Matrix::Zero(1, crop);
    s.voiced_src.assign(crop, false);
    for (int t = 0; t < crop && t < static_cast<int>(f0.size()); ++t) {
      s.f0_src(0, t) = f0[t];
      s.voiced_src[t] = fs.f0.voiced[t];
    }
    s.mel_ref = CropMel(store.Get(ref).mel, 0, crop, pad);
    s.mel_ref2 = CropMel(store.Get(ref2).mel, 0, crop, pad);
    s.src_domain = src.speaker;
    s.trg_domain = {(src.speaker.index + 1) % num_speakers, DomainKind::kSpeaker};
    s.z1 = SampleNoise(latent_dim, rng).values;
    s.z2 = SampleNoise(latent_dim, rng).values;
    batch.samples.push_back(std::move(s));
  }
  return batch;
}

double GradCheck(const std::function<ad::Var()>& f, ad::Var param, int max_coords,
                 std::mt19937_64& rng, double step) {
  param.ZeroGrad();
  f().Backward();
  const ad::Matrix analytic = param.grad();

  std::vector<Eigen::Index> coords(param.value().size());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(coords.size()); ++i) coords[i] = i;
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(std::min<size_t>(coords.size(), static_cast<size_t>(max_coords)));

  Eigen::VectorXd a(coords.size()), n(coords.size());
  for (size_t k = 0; k < coords.size(); ++k) {
    double& v = param.mutable_value().data()[coords[k]];
    const double saved = v;
    v = saved + step;
    const double up = f().item();
    v = saved - step;
    const double down = f().item();
    v = saved;
    n(k) = (up - down) / (2.0 * step);
    a(k) = analytic.data()[coords[k]];
  }
  const double scale = std::max(a.norm(), n.norm());
  if (scale < 1e-12) return 0.0;
  return (a - n).norm() / scale;
}

std::string TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("emovc_" + tag + "_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace emovc::testing
