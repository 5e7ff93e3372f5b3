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

#ifndef EMOVC_NPY_H_
#define EMOVC_NPY_H_

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

// NumPy .npy / .npz interchange for 2-D float64 arrays (C order). Readers
// also accept float32, 1-D arrays (as a single row) and deflated npz members.
namespace emovc::npy {

std::vector<uint8_t> EncodeNpy(const Eigen::MatrixXd& m);
Eigen::MatrixXd DecodeNpy(const std::vector<uint8_t>& bytes);

void WriteNpy(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd ReadNpy(const std::string& path);

// Members are stored uncompressed as "<name>.npy".
void WriteNpz(const std::string& path,
              const std::map<std::string, Eigen::MatrixXd>& arrays);
std::map<std::string, Eigen::MatrixXd> ReadNpz(const std::string& path);

}  // namespace emovc::npy

#endif  // EMOVC_NPY_H_
