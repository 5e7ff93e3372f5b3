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

// Native FLAC decoding: STREAMINFO, frame headers, constant / verbatim /
// fixed / LPC subframes with Rice-coded residuals and inter-channel
// decorrelation. Frame CRC-16 is verified.

#include <cmath>
#include <cstring>

#include "emovc/audio.h"
#include "emovc/types.h"

namespace emovc {

namespace {

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> b) : b_(b) {}

  uint32_t Bits(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | Bit();
    return v;
  }
  int64_t Signed(int n) {
    if (n == 0) return 0;
    const uint64_t u = n <= 32 ? Bits(n)
                               : (static_cast<uint64_t>(Bits(n - 32)) << 32) | Bits(32);
    const uint64_t sign = uint64_t{1} << (n - 1);
    return static_cast<int64_t>((u ^ sign) - sign);
  }
  uint32_t Unary() {
    uint32_t n = 0;
    while (Bit() == 0) ++n;
    return n;
  }
  void AlignByte() { bit_pos_ = (bit_pos_ + 7) & ~size_t{7}; }
  size_t byte_pos() const { return bit_pos_ / 8; }
  void SeekByte(size_t p) { bit_pos_ = p * 8; }
  bool AtEnd() const { return bit_pos_ / 8 >= b_.size(); }

 private:
  uint32_t Bit() {
    const size_t byte = bit_pos_ >> 3;
    if (byte >= b_.size()) throw FormatError("flac: unexpected end of stream");
    const uint32_t v = (b_[byte] >> (7 - (bit_pos_ & 7))) & 1u;
    ++bit_pos_;
    return v;
  }
  std::span<const uint8_t> b_;
  size_t bit_pos_ = 0;
};

uint16_t Crc16(std::span<const uint8_t> b) {
  uint16_t crc = 0;
  for (uint8_t byte : b) {
    crc ^= static_cast<uint16_t>(byte) << 8;
    for (int i = 0; i < 8; ++i) {
      crc = (crc & 0x8000) ? static_cast<uint16_t>((crc << 1) ^ 0x8005)
                           : static_cast<uint16_t>(crc << 1);
    }
  }
  return crc;
}

void DecodeResidual(BitReader& br, int block_size, int order,
                    std::vector<int64_t>& out) {
  const uint32_t method = br.Bits(2);
  if (method > 1) throw FormatError("flac: reserved residual coding method");
  const int param_bits = method == 0 ? 4 : 5;
  const uint32_t escape = method == 0 ? 15 : 31;
  const int partition_order = static_cast<int>(br.Bits(4));
  const int partitions = 1 << partition_order;
  if ((block_size >> partition_order) < order) {
    throw FormatError("flac: residual partition smaller than predictor order");
  }
  for (int p = 0; p < partitions; ++p) {
    const int count = (block_size >> partition_order) - (p == 0 ? order : 0);
    const uint32_t k = br.Bits(param_bits);
    if (k == escape) {
      const int raw_bits = static_cast<int>(br.Bits(5));
      for (int i = 0; i < count; ++i) out.push_back(br.Signed(raw_bits));
    } else {
      for (int i = 0; i < count; ++i) {
        const uint64_t q = br.Unary();
        const uint64_t u = (q << k) | br.Bits(static_cast<int>(k));
        out.push_back(static_cast<int64_t>(u >> 1) ^ -static_cast<int64_t>(u & 1));
      }
    }
  }
}

std::vector<int64_t> DecodeSubframe(BitReader& br, int block_size, int bps) {
  if (br.Bits(1) != 0) throw FormatError("flac: subframe padding bit set");
  const uint32_t type = br.Bits(6);
  int wasted = 0;
  if (br.Bits(1)) wasted = static_cast<int>(br.Unary()) + 1;
  const int eff_bps = bps - wasted;

  std::vector<int64_t> s;
  s.reserve(block_size);
  if (type == 0) {
    s.assign(block_size, br.Signed(eff_bps));
  } else if (type == 1) {
    for (int i = 0; i < block_size; ++i) s.push_back(br.Signed(eff_bps));
  } else if (type >= 8 && type <= 12) {
    const int order = static_cast<int>(type - 8);
    for (int i = 0; i < order; ++i) s.push_back(br.Signed(eff_bps));
    std::vector<int64_t> res;
    DecodeResidual(br, block_size, order, res);
    for (int64_t r : res) {
      const size_t n = s.size();
      int64_t pred = 0;
      switch (order) {
        case 0: pred = 0; break;
        case 1: pred = s[n - 1]; break;
        case 2: pred = 2 * s[n - 1] - s[n - 2]; break;
        case 3: pred = 3 * s[n - 1] - 3 * s[n - 2] + s[n - 3]; break;
        case 4: pred = 4 * s[n - 1] - 6 * s[n - 2] + 4 * s[n - 3] - s[n - 4]; break;
      }
      s.push_back(pred + r);
    }
  } else if (type >= 32) {
    const int order = static_cast<int>(type - 31);
    for (int i = 0; i < order; ++i) s.push_back(br.Signed(eff_bps));
    const uint32_t precision = br.Bits(4) + 1;
    if (precision == 16) throw FormatError("flac: invalid LPC precision");
    const int shift = static_cast<int>(br.Signed(5));
    if (shift < 0) throw FormatError("flac: negative LPC shift");
    std::vector<int64_t> coefs(order);
    for (auto& c : coefs) c = br.Signed(static_cast<int>(precision));
    std::vector<int64_t> res;
    DecodeResidual(br, block_size, order, res);
    for (int64_t r : res) {
      const size_t n = s.size();
      int64_t acc = 0;
      for (int j = 0; j < order; ++j) acc += coefs[j] * s[n - 1 - j];
      s.push_back((acc >> shift) + r);
    }
  } else {
    throw FormatError("flac: reserved subframe type " + std::to_string(type));
  }
  if (static_cast<int>(s.size()) != block_size) {
    throw FormatError("flac: subframe sample count mismatch");
  }
  if (wasted > 0) {
    for (auto& v : s) v *= (int64_t{1} << wasted);
  }
  return s;
}

}  // namespace

DecodedAudio DecodeFlac(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "fLaC", 4) != 0) {
    throw FormatError("flac: missing stream marker");
  }
  BitReader br(bytes);
  br.SeekByte(4);
  int stream_rate = 0, stream_channels = 0, stream_bps = 0;
  bool last = false;
  bool have_info = false;
  while (!last) {
    last = br.Bits(1) != 0;
    const uint32_t type = br.Bits(7);
    const uint32_t length = br.Bits(24);
    const size_t body = br.byte_pos();
    if (type == 0) {
      br.Bits(16);  // min block size
      br.Bits(16);  // max block size
      br.Bits(24);  // min frame size
      br.Bits(24);  // max frame size
      stream_rate = static_cast<int>(br.Bits(20));
      stream_channels = static_cast<int>(br.Bits(3)) + 1;
      stream_bps = static_cast<int>(br.Bits(5)) + 1;
      have_info = true;
    }
    br.SeekByte(body + length);
  }
  if (!have_info) throw FormatError("flac: missing STREAMINFO");

  DecodedAudio out;
  out.sample_rate = stream_rate;
  out.bits_per_sample = stream_bps;
  out.channels.assign(stream_channels, {});
  const double scale = std::ldexp(1.0, -(stream_bps - 1));

  while (!br.AtEnd()) {
    const size_t frame_start = br.byte_pos();
    if (br.Bits(14) != 0x3FFE) throw FormatError("flac: lost frame sync");
    br.Bits(1);  // reserved
    br.Bits(1);  // blocking strategy
    const uint32_t bs_code = br.Bits(4);
    const uint32_t sr_code = br.Bits(4);
    const uint32_t ch_code = br.Bits(4);
    const uint32_t ss_code = br.Bits(3);
    br.Bits(1);
    // UTF-8 style coded frame / sample number.
    const uint32_t lead = br.Bits(8);
    int extra = 0;
    for (uint32_t m = 0x80; m && (lead & m); m >>= 1) ++extra;
    for (int i = 1; i < extra; ++i) br.Bits(8);

    int block_size = 0;
    if (bs_code == 1) block_size = 192;
    else if (bs_code >= 2 && bs_code <= 5) block_size = 576 << (bs_code - 2);
    else if (bs_code == 6) block_size = static_cast<int>(br.Bits(8)) + 1;
    else if (bs_code == 7) block_size = static_cast<int>(br.Bits(16)) + 1;
    else if (bs_code >= 8) block_size = 256 << (bs_code - 8);
    else throw FormatError("flac: reserved block size code");

    if (sr_code == 12) br.Bits(8);
    else if (sr_code == 13 || sr_code == 14) br.Bits(16);
    else if (sr_code == 15) throw FormatError("flac: invalid sample rate code");

    static constexpr int kSampleSizes[8] = {0, 8, 12, 0, 16, 20, 24, 32};
    const int bps = ss_code == 0 ? stream_bps : kSampleSizes[ss_code];
    if (bps == 0) throw FormatError("flac: reserved sample size code");
    br.Bits(8);  // header CRC-8

    const int channels = ch_code < 8 ? static_cast<int>(ch_code) + 1 : 2;
    if (ch_code > 10) throw FormatError("flac: reserved channel assignment");
    if (channels != stream_channels) throw FormatError("flac: channel count changed mid-stream");

    std::vector<std::vector<int64_t>> sub(channels);
    for (int c = 0; c < channels; ++c) {
      const bool side = (ch_code == 8 && c == 1) || (ch_code == 9 && c == 0) ||
                        (ch_code == 10 && c == 1);
      sub[c] = DecodeSubframe(br, block_size, bps + (side ? 1 : 0));
    }
    br.AlignByte();
    const size_t crc_pos = br.byte_pos();
    const uint32_t crc = br.Bits(16);
    if (Crc16(bytes.subspan(frame_start, crc_pos - frame_start)) != crc) {
      throw FormatError("flac: frame CRC mismatch");
    }

    for (int i = 0; i < block_size; ++i) {
      int64_t a = sub[0][i];
      int64_t b = channels > 1 ? sub[1][i] : 0;
      if (ch_code == 8) {         // left / side
        b = a - b;
      } else if (ch_code == 9) {  // side / right
        a = a + b;
      } else if (ch_code == 10) { // mid / side
        const int64_t mid = (a * 2) | (b & 1);
        a = (mid + b) >> 1;
        b = (mid - b) >> 1;
      }
      out.channels[0].push_back(static_cast<double>(a) * scale);
      if (channels > 1) out.channels[1].push_back(static_cast<double>(b) * scale);
      for (int c = 2; c < channels; ++c) {
        out.channels[c].push_back(static_cast<double>(sub[c][i]) * scale);
      }
    }
  }
  return out;
}

}  // namespace emovc
