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

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "emovc/audio.h"

namespace emovc {

int NumFrames(size_t num_samples, int win_length, int hop_length) {
  if (num_samples < static_cast<size_t>(win_length)) return 0;
  return static_cast<int>((num_samples - win_length) / hop_length) + 1;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> MelEdges(const MelConfig& cfg) {
  const double lo = HzToMel(cfg.f_min);
  const double hi = HzToMel(cfg.f_max);
  std::vector<double> edges(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    edges[i] = MelToHz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  }
  return edges;
}

}  // namespace

std::vector<double> MelCenterFrequencies(const MelConfig& cfg) {
  std::vector<double> edges = MelEdges(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Eigen::MatrixXd MelFilterbank(const MelConfig& cfg) {
  const int n_bins = cfg.n_fft / 2 + 1;
  const std::vector<double> edges = MelEdges(cfg);
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, n_bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.n_fft;
      const double up = (f - lo) / (center - lo);
      const double down = (hi - f) / (hi - center);
      fb(m, k) = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const MelConfig& cfg) {
  if (w.samples.empty()) throw std::invalid_argument("mel: empty waveform");
  if (cfg.win_length > cfg.n_fft) {
    throw std::invalid_argument("mel: win_length exceeds n_fft");
  }
  const int frames = NumFrames(w.samples.size(), cfg.win_length, cfg.hop_length);
  if (frames < 1) {
    throw std::invalid_argument("mel: waveform shorter than one analysis window");
  }
  const int n_bins = cfg.n_fft / 2 + 1;
  const Eigen::MatrixXd fb = MelFilterbank(cfg);
  std::vector<double> window(cfg.win_length);
  for (int n = 0; n < cfg.win_length; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg.win_length);
  }

  Eigen::FFT<double> fft;
  std::vector<double> buf(cfg.n_fft, 0.0);
  std::vector<std::complex<double>> spec;
  Eigen::VectorXd power(n_bins);
  MelSpectrogram mel;
  mel.hop_length = cfg.hop_length;
  mel.values.resize(frames, cfg.n_mels);
  for (int t = 0; t < frames; ++t) {
    const size_t start = static_cast<size_t>(t) * cfg.hop_length;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int n = 0; n < cfg.win_length; ++n) buf[n] = w.samples[start + n] * window[n];
    fft.fwd(spec, buf);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
    Eigen::VectorXd energies = fb * power;
    for (int m = 0; m < cfg.n_mels; ++m) {
      mel.values(t, m) = std::log(energies[m] + cfg.log_floor);
    }
  }
  return mel;
}

F0Contour ExtractF0(const Waveform& w, const MelConfig& mel_cfg,
                    const F0Config& cfg) {
  const int frames = NumFrames(w.samples.size(), mel_cfg.win_length, mel_cfg.hop_length);
  F0Contour out;
  out.hz.assign(frames, 0.0);
  out.voiced.assign(frames, false);
  const double sr = w.sample_rate;
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f_max)));
  const int tau_max = std::min(mel_cfg.win_length / 2,
                               static_cast<int>(std::ceil(sr / cfg.f_min)));
  const int integration = mel_cfg.win_length - tau_max;
  std::vector<double> d(tau_max + 1), cmnd(tau_max + 1);

  for (int t = 0; t < frames; ++t) {
    const double* x = w.samples.data() + static_cast<size_t>(t) * mel_cfg.hop_length;
    double energy = 0.0;
    for (int j = 0; j < mel_cfg.win_length; ++j) energy += x[j] * x[j];
    if (std::sqrt(energy / mel_cfg.win_length) < cfg.silence_rms) continue;

    d[0] = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (int j = 0; j < integration; ++j) {
        const double diff = x[j] - x[j + tau];
        acc += diff * diff;
      }
      d[tau] = acc;
    }
    cmnd[0] = 1.0;
    double running = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      running += d[tau];
      cmnd[tau] = running > 0.0 ? d[tau] * tau / running : 1.0;
    }

    int best = -1;
    for (int tau = tau_min; tau < tau_max; ++tau) {
      if (cmnd[tau] < cfg.threshold) {
        while (tau + 1 < tau_max && cmnd[tau + 1] < cmnd[tau]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) continue;

    double refined = best;
    if (best > 1 && best < tau_max) {
      const double a = cmnd[best - 1], b = cmnd[best], c = cmnd[best + 1];
      const double denom = a - 2.0 * b + c;
      if (denom > 0.0) refined = best + 0.5 * (a - c) / denom;
    }
    out.hz[t] = sr / refined;
    out.voiced[t] = true;
  }
  return out;
}

std::vector<double> NormalizeF0(const F0Contour& c) {
  double sum = 0.0;
  int count = 0;
  for (size_t i = 0; i < c.size(); ++i) {
    if (c.voiced[i]) { sum += c.hz[i]; ++count; }
  }
  std::vector<double> out(c.size(), 0.0);
  if (count == 0) return out;
  const double mean = sum / count;
  for (size_t i = 0; i < c.size(); ++i) {
    if (c.voiced[i]) out[i] = c.hz[i] / mean;
  }
  return out;
}

F0Contour ResampleContour(const F0Contour& c, size_t len) {
  if (c.size() == len) return c;
  F0Contour out;
  out.hz.assign(len, 0.0);
  out.voiced.assign(len, false);
  if (c.size() == 0 || len == 0) return out;
  const double step = len > 1 ? static_cast<double>(c.size() - 1) / (len - 1) : 0.0;
  for (size_t i = 0; i < len; ++i) {
    const double pos = step * static_cast<double>(i);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, c.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    const size_t nearest = frac < 0.5 ? lo : hi;
    if (!c.voiced[nearest]) continue;
    out.voiced[i] = true;
    if (c.voiced[lo] && c.voiced[hi]) {
      out.hz[i] = (1.0 - frac) * c.hz[lo] + frac * c.hz[hi];
    } else {
      out.hz[i] = c.hz[nearest];
    }
  }
  return out;
}

MelPitchTracker::MelPitchTracker(const MelConfig& cfg, double f_min,
                                 double f_max, double sharpness)
    : sharpness_(sharpness) {
  const std::vector<double> centers = MelCenterFrequencies(cfg);
  int first = -1, last = -1;
  for (int m = 0; m < cfg.n_mels; ++m) {
    if (centers[m] >= f_min && centers[m] <= f_max) {
      if (first < 0) first = m;
      last = m;
    }
  }
  if (first < 0 || last == first) {
    throw std::invalid_argument("MelPitchTracker: pitch range covers < 2 mel bins");
  }
  first_bin_ = first;
  num_bins_ = last - first + 1;
  centers_.resize(1, num_bins_);
  for (int i = 0; i < num_bins_; ++i) centers_(0, i) = centers[first + i];
}

ad::Var MelPitchTracker::Track(const ad::Var& mel) const {
  ad::Var band = ad::SliceRows(mel, first_bin_, num_bins_);
  ad::Var weights = ad::SoftmaxCols(ad::Scale(band, sharpness_));
  return ad::MatMul(ad::Var::Constant(centers_), weights);
}

}  // namespace emovc
