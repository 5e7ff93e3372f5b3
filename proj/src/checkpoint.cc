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

#include "emovc/checkpoint.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace emovc {

namespace {

constexpr char kMagic[8] = {'E', 'M', 'O', 'V', 'C', 'K', 'P', 'T'};

template <typename T>
void PutPod(std::string* out, T v) {
  out->append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T GetPod(const std::string& in, size_t* pos) {
  if (*pos + sizeof(T) > in.size()) throw CheckpointError("checkpoint truncated");
  T v;
  std::memcpy(&v, in.data() + *pos, sizeof(T));
  *pos += sizeof(T);
  return v;
}

}  // namespace

bool Checkpoint::HasGroup(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.first == name) return true;
  }
  return false;
}

const NamedTensors& Checkpoint::Group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.first == name) return g.second;
  }
  throw CheckpointError("checkpoint has no group '" + name + "'");
}

void Checkpoint::PutGroup(const std::string& name, NamedTensors tensors) {
  for (auto& g : groups) {
    if (g.first == name) {
      g.second = std::move(tensors);
      return;
    }
  }
  groups.emplace_back(name, std::move(tensors));
}

void Checkpoint::PutParams(const std::string& name, const nn::ParamStore& store) {
  NamedTensors t;
  for (const auto& [n, v] : store.entries()) t.emplace_back(n, v.value());
  PutGroup(name, std::move(t));
}

void Checkpoint::RestoreParams(const std::string& name, nn::ParamStore* store) const {
  const NamedTensors& t = Group(name);
  const auto& entries = store->entries();
  if (t.size() != entries.size()) {
    throw CheckpointError("group '" + name + "': " + std::to_string(t.size()) +
                          " tensors in checkpoint, model has " +
                          std::to_string(entries.size()));
  }
  for (size_t i = 0; i < t.size(); ++i) {
    ad::Var p = entries[i].second;
    if (t[i].first != entries[i].first) {
      throw CheckpointError("group '" + name + "': expected tensor '" +
                            entries[i].first + "', found '" + t[i].first + "'");
    }
    if (t[i].second.rows() != p.rows() || t[i].second.cols() != p.cols()) {
      throw CheckpointError("group '" + name + "': shape mismatch for '" +
                            t[i].first + "'");
    }
  }
  for (size_t i = 0; i < t.size(); ++i) {
    ad::Var p = entries[i].second;
    p.mutable_value() = t[i].second;
  }
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json index = nlohmann::json::array();
  nlohmann::json group_names = nlohmann::json::array();
  std::string payload;
  for (const auto& [group, tensors] : ckpt.groups) {
    group_names.push_back(group);
    for (const auto& [name, m] : tensors) {
      index.push_back({{"group", group},
                       {"name", name},
                       {"rows", m.rows()},
                       {"cols", m.cols()},
                       {"offset", payload.size()}});
      payload.append(reinterpret_cast<const char*>(m.data()),
                     sizeof(double) * static_cast<size_t>(m.size()));
    }
  }
  const std::string header =
      nlohmann::json{{"meta", ckpt.meta}, {"groups", group_names}, {"tensors", index}}.dump();

  std::string blob(kMagic, sizeof(kMagic));
  PutPod<uint32_t>(&blob, kCheckpointVersion);
  PutPod<uint64_t>(&blob, header.size());
  blob += header;
  blob += payload;

  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, target);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  const std::string blob((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (blob.size() < sizeof(kMagic) || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path + " is not an emovc checkpoint");
  }
  size_t pos = sizeof(kMagic);
  const auto version = GetPod<uint32_t>(blob, &pos);
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  const auto header_size = GetPod<uint64_t>(blob, &pos);
  if (pos + header_size > blob.size()) throw CheckpointError(path + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(pos, header_size));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": bad header: " + e.what());
  }
  pos += header_size;
  const size_t data_begin = pos;

  Checkpoint ckpt;
  try {
    ckpt.meta = header.at("meta");
    for (const auto& g : header.at("groups")) {
      ckpt.groups.emplace_back(g.get<std::string>(), NamedTensors{});
    }
    for (const auto& t : header.at("tensors")) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      const size_t offset = data_begin + t.at("offset").get<size_t>();
      const size_t bytes = sizeof(double) * static_cast<size_t>(rows * cols);
      if (rows < 0 || cols < 0 || offset + bytes > blob.size()) {
        throw CheckpointError(path + ": tensor data out of bounds");
      }
      Eigen::MatrixXd m(rows, cols);
      std::memcpy(m.data(), blob.data() + offset, bytes);
      const std::string group = t.at("group").get<std::string>();
      if (!ckpt.HasGroup(group)) ckpt.groups.emplace_back(group, NamedTensors{});
      for (auto& g : ckpt.groups) {
        if (g.first == group) g.second.emplace_back(t.at("name").get<std::string>(), std::move(m));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(path + ": bad header: " + e.what());
  }

  return ckpt;
}

}  // namespace emovc
