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

#ifndef EMOVC_CHECKPOINT_H_
#define EMOVC_CHECKPOINT_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emovc/layers.h"
#include "json.hpp"

namespace emovc {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Eigen::MatrixXd>>;

// On-disk layout: 8-byte magic "EMOVCKPT", u32 version, u64 header size,
// JSON header (metadata plus a tensor index), then raw little-endian
// float64 tensor data in column-major order.
struct Checkpoint {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, NamedTensors>> groups;

  bool HasGroup(const std::string& name) const;
  const NamedTensors& Group(const std::string& name) const;
  void PutGroup(const std::string& name, NamedTensors tensors);
  void PutParams(const std::string& name, const nn::ParamStore& store);
  // Names and shapes must match the store exactly.
  void RestoreParams(const std::string& name, nn::ParamStore* store) const;
};

// Writes to a temporary sibling, then renames it over `path`.
void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace emovc

#endif  // EMOVC_CHECKPOINT_H_
