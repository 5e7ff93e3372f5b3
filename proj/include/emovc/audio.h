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

#ifndef EMOVC_AUDIO_H_
#define EMOVC_AUDIO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "emovc/autodiff.h"

namespace emovc {

inline constexpr int kSampleRate = 24000;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Interleaving-free multichannel PCM as decoded from a container.
struct DecodedAudio {
  std::vector<std::vector<double>> channels;  // each in [-1, 1)
  int sample_rate = 0;
  int bits_per_sample = 0;
};

// RIFF/WAVE: integer PCM (8/16/24/32 bit) and IEEE float (32/64 bit),
// including WAVE_FORMAT_EXTENSIBLE.
DecodedAudio DecodeWav(std::span<const uint8_t> bytes);
// Native FLAC stream (no Ogg encapsulation).
DecodedAudio DecodeFlac(std::span<const uint8_t> bytes);
// Picks the decoder from the file magic.
DecodedAudio ReadAudioFile(const std::string& path);

// 16-bit PCM mono writer; samples are clipped to [-1, 1].
void WriteWav16(const std::string& path, const Waveform& w);

// Band-limited (Kaiser-windowed sinc) sample-rate conversion. Output length
// is round(n * to / from); identical rates return the input unchanged.
std::vector<double> Resample(std::span<const double> in, int from_rate,
                             int to_rate);

// Mono (channel mean) 24 kHz waveform. Throws on unreadable or empty audio.
Waveform LoadAndResample(const std::string& path);

struct MelConfig {
  int sample_rate = kSampleRate;
  int n_mels = 80;
  int win_length = 1200;
  int hop_length = 300;
  int n_fft = 2048;
  double f_min = 0.0;
  double f_max = 12000.0;
  double log_floor = 1e-5;  // values are log(mel_power + log_floor)

  friend bool operator==(const MelConfig&, const MelConfig&) = default;
};

/// Log-mel spectrogram, [frames x n_mels].
struct MelSpectrogram {
  Eigen::MatrixXd values;
  int hop_length = 300;

  int frames() const { return static_cast<int>(values.rows()); }
  int n_mels() const { return static_cast<int>(values.cols()); }
};

/// Number of analysis frames: floor((n - win) / hop) + 1, or 0 if n < win.
int NumFrames(size_t num_samples, int win_length, int hop_length);

double HzToMel(double hz);
double MelToHz(double mel);
// Triangular filterbank, [n_mels x (n_fft / 2 + 1)].
Eigen::MatrixXd MelFilterbank(const MelConfig& cfg);
// Center frequency (Hz) of each mel filter.
std::vector<double> MelCenterFrequencies(const MelConfig& cfg);

// Hann-windowed power spectrogram projected on the mel filterbank. Frame t
// covers samples [t*hop, t*hop + win); the trailing partial hop is dropped.
// Throws std::invalid_argument if the waveform is shorter than one window.
MelSpectrogram ComputeMelSpectrogram(const Waveform& w, const MelConfig& cfg);

struct F0Contour {
  std::vector<double> hz;
  std::vector<bool> voiced;

  size_t size() const { return hz.size(); }
};

struct F0Config {
  double f_min = 60.0;
  double f_max = 500.0;
  double threshold = 0.15;      // cumulative-mean-normalized difference
  double silence_rms = 1e-4;    // frames below this are unvoiced
};

// YIN-style periodicity tracker framed exactly like the mel front-end
// (same window and hop), so contour and mel frame counts agree.
F0Contour ExtractF0(const Waveform& w, const MelConfig& mel_cfg = {},
                    const F0Config& cfg = {});

// Voiced frames divided by the mean voiced Hz; unvoiced frames map to 0.
std::vector<double> NormalizeF0(const F0Contour& c);

// Linear interpolation of a contour to `len` frames; voicing uses the
// nearest source frame.
F0Contour ResampleContour(const F0Contour& c, size_t len);

// Differentiable stand-in for a learned mel-domain pitch network: per frame
// soft-argmax (temperature `sharpness`) over the centre frequencies of the
// mel bins inside [f_min, f_max]. Input is a [n_mels x T] network tensor;
// output is [1 x T] in Hz.
class MelPitchTracker {
 public:
  explicit MelPitchTracker(const MelConfig& cfg, double f_min = 60.0,
                           double f_max = 500.0, double sharpness = 2.0);
  ad::Var Track(const ad::Var& mel) const;

 private:
  int first_bin_ = 0;
  int num_bins_ = 0;
  double sharpness_;
  ad::Matrix centers_;  // [1 x num_bins]
};

/// Mel to waveform synthesis. No implementation ships; plug one in.
class Vocoder {
 public:
  virtual ~Vocoder() = default;
  virtual Waveform Synthesize(const MelSpectrogram& mel) const = 0;
};

}  // namespace emovc

#endif  // EMOVC_AUDIO_H_
