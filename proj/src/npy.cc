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

#include "emovc/npy.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <regex>

#include <zlib.h>

#include "emovc/types.h"

namespace emovc::npy {

namespace {

void PutLe(std::vector<uint8_t>& out, uint32_t v, int nbytes) {
  for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetLe(const std::vector<uint8_t>& b, size_t pos, int nbytes) {
  if (pos + nbytes > b.size()) throw FormatError("npz: truncated archive");
  uint32_t v = 0;
  for (int i = 0; i < nbytes; ++i) v |= static_cast<uint32_t>(b[pos + i]) << (8 * i);
  return v;
}

std::vector<uint8_t> ReadBytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void WriteBytes(const std::string& path, const std::vector<uint8_t>& b) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<uint8_t> Inflate(const uint8_t* data, size_t size, size_t out_size) {
  std::vector<uint8_t> out(out_size);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("zlib init failed");
  zs.next_in = const_cast<Bytef*>(data);
  zs.avail_in = static_cast<uInt>(size);
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out_size);
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw FormatError("npz: corrupt deflate stream");
  return out;
}

}  // namespace

std::vector<uint8_t> EncodeNpy(const Eigen::MatrixXd& m) {
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (" +
                       std::to_string(m.rows()) + ", " + std::to_string(m.cols()) +
                       "), }";
  // Magic(6) + version(2) + len(2) + header, padded to 64 with '\n' last.
  const size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  std::vector<uint8_t> out = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  PutLe(out, static_cast<uint32_t>(header.size()), 2);
  out.insert(out.end(), header.begin(), header.end());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      uint64_t u;
      const double v = m(r, c);
      std::memcpy(&u, &v, 8);
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(u >> (8 * i)));
    }
  }
  return out;
}

Eigen::MatrixXd DecodeNpy(const std::vector<uint8_t>& b) {
  if (b.size() < 10 || b[0] != 0x93 || std::memcmp(b.data() + 1, "NUMPY", 5) != 0) {
    throw FormatError("npy: bad magic");
  }
  const int major = b[6];
  size_t header_len, offset;
  if (major == 1) {
    header_len = GetLe(b, 8, 2);
    offset = 10;
  } else {
    header_len = GetLe(b, 8, 4);
    offset = 12;
  }
  if (offset + header_len > b.size()) throw FormatError("npy: truncated header");
  const std::string header(b.begin() + offset, b.begin() + offset + header_len);
  std::smatch mt;
  if (!std::regex_search(header, mt, std::regex("'descr':\\s*'([<|=]?)([fi])(\\d)'"))) {
    throw FormatError("npy: unsupported dtype in header " + header);
  }
  const char kind = mt[2].str()[0];
  const int width = std::stoi(mt[3].str());
  if (!(kind == 'f' && (width == 4 || width == 8))) {
    throw FormatError("npy: only float32/float64 arrays are supported");
  }
  const bool fortran = header.find("'fortran_order': True") != std::string::npos;
  if (!std::regex_search(header, mt, std::regex("'shape':\\s*\\(([^)]*)\\)"))) {
    throw FormatError("npy: missing shape");
  }
  std::vector<long long> dims;
  const std::string shape = mt[1].str();
  const std::regex number("\\d+");
  std::sregex_iterator it(shape.begin(), shape.end(), number), end;
  for (; it != end; ++it) dims.push_back(std::stoll(it->str()));
  long long rows = 1, cols = 1;
  if (dims.size() == 1) {
    cols = dims[0];
  } else if (dims.size() == 2) {
    rows = dims[0];
    cols = dims[1];
  } else if (!dims.empty()) {
    throw FormatError("npy: only 1-D and 2-D arrays are supported");
  }
  const size_t data_off = offset + header_len;
  if (data_off + static_cast<size_t>(rows * cols * width) > b.size()) {
    throw FormatError("npy: truncated data");
  }
  Eigen::MatrixXd m(rows, cols);
  for (long long i = 0; i < rows * cols; ++i) {
    const uint8_t* p = b.data() + data_off + i * width;
    double v;
    if (width == 8) {
      std::memcpy(&v, p, 8);
    } else {
      float f;
      std::memcpy(&f, p, 4);
      v = f;
    }
    if (fortran) {
      m(i % rows, i / rows) = v;
    } else {
      m(i / cols, i % cols) = v;
    }
  }
  return m;
}

void WriteNpy(const std::string& path, const Eigen::MatrixXd& m) {
  WriteBytes(path, EncodeNpy(m));
}

Eigen::MatrixXd ReadNpy(const std::string& path) { return DecodeNpy(ReadBytes(path)); }

void WriteNpz(const std::string& path,
              const std::map<std::string, Eigen::MatrixXd>& arrays) {
  std::vector<uint8_t> out, central;
  uint16_t count = 0;
  for (const auto& [name, m] : arrays) {
    const std::string fname = name + ".npy";
    const std::vector<uint8_t> data = EncodeNpy(m);
    const uint32_t crc = static_cast<uint32_t>(crc32(0L, data.data(), static_cast<uInt>(data.size())));
    const uint32_t offset = static_cast<uint32_t>(out.size());
    // Local file header, stored, fixed 1980-01-01 timestamp.
    PutLe(out, 0x04034b50, 4);
    PutLe(out, 20, 2);
    PutLe(out, 0, 2);
    PutLe(out, 0, 2);
    PutLe(out, 0, 2);
    PutLe(out, 0x21, 2);
    PutLe(out, crc, 4);
    PutLe(out, static_cast<uint32_t>(data.size()), 4);
    PutLe(out, static_cast<uint32_t>(data.size()), 4);
    PutLe(out, static_cast<uint32_t>(fname.size()), 2);
    PutLe(out, 0, 2);
    out.insert(out.end(), fname.begin(), fname.end());
    out.insert(out.end(), data.begin(), data.end());

    PutLe(central, 0x02014b50, 4);
    PutLe(central, 20, 2);
    PutLe(central, 20, 2);
    PutLe(central, 0, 2);
    PutLe(central, 0, 2);
    PutLe(central, 0, 2);
    PutLe(central, 0x21, 2);
    PutLe(central, crc, 4);
    PutLe(central, static_cast<uint32_t>(data.size()), 4);
    PutLe(central, static_cast<uint32_t>(data.size()), 4);
    PutLe(central, static_cast<uint32_t>(fname.size()), 2);
    PutLe(central, 0, 2);
    PutLe(central, 0, 2);
    PutLe(central, 0, 2);
    PutLe(central, 0, 2);
    PutLe(central, 0, 4);
    PutLe(central, offset, 4);
    central.insert(central.end(), fname.begin(), fname.end());
    ++count;
  }
  const uint32_t cd_offset = static_cast<uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  PutLe(out, 0x06054b50, 4);
  PutLe(out, 0, 2);
  PutLe(out, 0, 2);
  PutLe(out, count, 2);
  PutLe(out, count, 2);
  PutLe(out, static_cast<uint32_t>(central.size()), 4);
  PutLe(out, cd_offset, 4);
  PutLe(out, 0, 2);
  WriteBytes(path, out);
}

std::map<std::string, Eigen::MatrixXd> ReadNpz(const std::string& path) {
  const std::vector<uint8_t> b = ReadBytes(path);
  if (b.size() < 22) throw FormatError("npz: file too small: " + path);
  size_t eocd = std::string::npos;
  for (size_t p = b.size() - 22 + 1; p-- > 0;) {
    if (GetLe(b, p, 4) == 0x06054b50) { eocd = p; break; }
  }
  if (eocd == std::string::npos) throw FormatError("npz: no end of central directory");
  const uint32_t entries = GetLe(b, eocd + 10, 2);
  size_t p = GetLe(b, eocd + 16, 4);
  std::map<std::string, Eigen::MatrixXd> out;
  for (uint32_t e = 0; e < entries; ++e) {
    if (GetLe(b, p, 4) != 0x02014b50) throw FormatError("npz: bad central directory");
    const uint32_t method = GetLe(b, p + 10, 2);
    const uint32_t comp = GetLe(b, p + 20, 4);
    const uint32_t uncomp = GetLe(b, p + 24, 4);
    const uint32_t name_len = GetLe(b, p + 28, 2);
    const uint32_t extra_len = GetLe(b, p + 30, 2);
    const uint32_t comment_len = GetLe(b, p + 32, 2);
    const uint32_t local = GetLe(b, p + 42, 4);
    std::string name(b.begin() + p + 46, b.begin() + p + 46 + name_len);
    p += 46 + name_len + extra_len + comment_len;

    if (GetLe(b, local, 4) != 0x04034b50) throw FormatError("npz: bad local header");
    const size_t data_off = local + 30 + GetLe(b, local + 26, 2) + GetLe(b, local + 28, 2);
    if (data_off + comp > b.size()) throw FormatError("npz: truncated member " + name);
    std::vector<uint8_t> data;
    if (method == 0) {
      data.assign(b.begin() + data_off, b.begin() + data_off + comp);
    } else if (method == 8) {
      data = Inflate(b.data() + data_off, comp, uncomp);
    } else {
      throw FormatError("npz: unsupported compression method");
    }
    if (name.size() > 4 && name.ends_with(".npy")) name.resize(name.size() - 4);
    out[name] = DecodeNpy(data);
  }
  return out;
}

}  // namespace emovc::npy
