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
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "emovc/audio.h"
#include "emovc/types.h"

namespace emovc {

namespace {

uint32_t ReadLe(std::span<const uint8_t> b, size_t pos, int nbytes) {
  uint32_t v = 0;
  for (int i = 0; i < nbytes; ++i) v |= static_cast<uint32_t>(b[pos + i]) << (8 * i);
  return v;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open audio file: " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void PutLe(std::vector<uint8_t>& out, uint32_t v, int nbytes) {
  for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

// Zeroth-order modified Bessel function of the first kind.
double BesselI0(double x) {
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < 50; ++k) {
    term *= (x / (2.0 * k)) * (x / (2.0 * k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

DecodedAudio DecodeWav(std::span<const uint8_t> b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file");
  }
  int format = 0, channels = 0, rate = 0, bits = 0;
  size_t pos = 12;
  std::span<const uint8_t> data;
  bool have_fmt = false, have_data = false;
  while (pos + 8 <= b.size()) {
    const uint32_t size = ReadLe(b, pos + 4, 4);
    const size_t body = pos + 8;
    const size_t avail = std::min<size_t>(size, b.size() - body);
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("wav: short fmt chunk");
      format = static_cast<int>(ReadLe(b, body, 2));
      channels = static_cast<int>(ReadLe(b, body + 2, 2));
      rate = static_cast<int>(ReadLe(b, body + 4, 4));
      bits = static_cast<int>(ReadLe(b, body + 14, 2));
      if (format == 0xFFFE && size >= 26) {
        format = static_cast<int>(ReadLe(b, body + 24, 2));
      }
      have_fmt = true;
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      data = b.subspan(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || !have_data) throw FormatError("wav: missing fmt or data chunk");
  if (channels < 1 || rate < 1) throw FormatError("wav: bad channel count or rate");
  const bool is_float = format == 3;
  if (format != 1 && !is_float) {
    throw FormatError("wav: unsupported format tag " + std::to_string(format));
  }
  if (is_float ? (bits != 32 && bits != 64)
               : (bits != 8 && bits != 16 && bits != 24 && bits != 32)) {
    throw FormatError("wav: unsupported bit depth " + std::to_string(bits));
  }
  const int bytes_per = bits / 8;
  const size_t frames = data.size() / (static_cast<size_t>(bytes_per) * channels);
  DecodedAudio out;
  out.sample_rate = rate;
  out.bits_per_sample = bits;
  out.channels.assign(channels, std::vector<double>(frames));
  for (size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const size_t off = (i * channels + c) * bytes_per;
      double v;
      if (is_float && bits == 32) {
        uint32_t u = ReadLe(data, off, 4);
        float f;
        std::memcpy(&f, &u, 4);
        v = f;
      } else if (is_float) {
        uint64_t u = ReadLe(data, off, 4) |
                     (static_cast<uint64_t>(ReadLe(data, off + 4, 4)) << 32);
        std::memcpy(&v, &u, 8);
      } else if (bits == 8) {
        v = (static_cast<int>(data[off]) - 128) / 128.0;
      } else {
        uint32_t u = ReadLe(data, off, bytes_per);
        // Sign-extend from `bits`.
        const int shift = 32 - bits;
        const int32_t s = static_cast<int32_t>(u << shift) >> shift;
        v = s / std::ldexp(1.0, bits - 1);
      }
      out.channels[c][i] = v;
    }
  }
  return out;
}

DecodedAudio ReadAudioFile(const std::string& path) {
  std::vector<uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "fLaC", 4) == 0) {
    return DecodeFlac(bytes);
  }
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "RIFF", 4) == 0) {
    return DecodeWav(bytes);
  }
  throw FormatError("unrecognized audio container: " + path);
}

void WriteWav16(const std::string& path, const Waveform& w) {
  std::vector<uint8_t> out;
  const uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutLe(out, 36 + data_bytes, 4);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  PutLe(out, 16, 4);
  PutLe(out, 1, 2);
  PutLe(out, 1, 2);
  PutLe(out, static_cast<uint32_t>(w.sample_rate), 4);
  PutLe(out, static_cast<uint32_t>(w.sample_rate * 2), 4);
  PutLe(out, 2, 2);
  PutLe(out, 16, 2);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutLe(out, data_bytes, 4);
  for (double s : w.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<int16_t>(std::lround(c * 32767.0));
    PutLe(out, static_cast<uint16_t>(q), 2);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
}

std::vector<double> Resample(std::span<const double> in, int from_rate,
                             int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) {
    throw std::invalid_argument("Resample: rates must be positive");
  }
  if (from_rate == to_rate) return {in.begin(), in.end()};
  const double ratio = static_cast<double>(to_rate) / from_rate;
  const size_t out_len =
      static_cast<size_t>(std::llround(static_cast<double>(in.size()) * ratio));
  // Cutoff relative to the input Nyquist, slightly below the lower rate.
  const double cutoff = 0.97 * std::min(1.0, ratio);
  constexpr int kZeroCrossings = 24;
  constexpr double kBeta = 8.6;
  const double half_width = kZeroCrossings / cutoff;
  const double i0_beta = BesselI0(kBeta);
  const auto n_in = static_cast<long long>(in.size());

  std::vector<double> out(out_len);
  for (size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) / ratio;
    const long long lo = std::max<long long>(0, static_cast<long long>(std::ceil(t - half_width)));
    const long long hi = std::min<long long>(n_in - 1, static_cast<long long>(std::floor(t + half_width)));
    double acc = 0.0;
    for (long long k = lo; k <= hi; ++k) {
      const double d = t - static_cast<double>(k);
      const double x = cutoff * d;
      const double sinc =
          x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double r = d / half_width;
      const double win = BesselI0(kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
      acc += in[k] * cutoff * sinc * win;
    }
    out[n] = acc;
  }
  return out;
}

Waveform LoadAndResample(const std::string& path) {
  DecodedAudio a = ReadAudioFile(path);
  if (a.channels.empty() || a.channels[0].empty()) {
    throw FormatError("zero-length audio: " + path);
  }
  std::vector<double> mono(a.channels[0].size(), 0.0);
  for (const auto& ch : a.channels) {
    for (size_t i = 0; i < mono.size(); ++i) mono[i] += ch[i];
  }
  if (a.channels.size() > 1) {
    const double inv = 1.0 / static_cast<double>(a.channels.size());
    for (double& v : mono) v *= inv;
  }
  Waveform w;
  w.sample_rate = kSampleRate;
  w.samples = Resample(mono, a.sample_rate, kSampleRate);
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw FormatError("non-finite samples in " + path);
  }
  return w;
}

}  // namespace emovc
