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

#ifndef EMOVC_LAYERS_H_
#define EMOVC_LAYERS_H_

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "emovc/autodiff.h"

namespace emovc::nn {

using ad::Matrix;
using ad::Var;

// Ordered, named collection of trainable leaves. Layers hold Var handles
// that share nodes with the store, so in-place updates are visible to them.
class ParamStore {
 public:
  Var Add(const std::string& name, Matrix init);

  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  Var Get(const std::string& name) const;
  bool Contains(const std::string& name) const;

  void ZeroGrad();
  size_t NumScalars() const;
  bool AllFinite() const;
  std::vector<Matrix> Snapshot() const;
  // Exact equality of every value against a snapshot.
  bool BitEqual(const std::vector<Matrix>& snapshot) const;
  // Copies values from `other`; names and shapes must match exactly.
  void CopyValuesFrom(const ParamStore& other);

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
Matrix UniformInit(Eigen::Index rows, Eigen::Index cols, int fan_in,
                   std::mt19937_64& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParamStore& store, const std::string& name, int in, int out,
         std::mt19937_64& rng);
  // x: [in x T] -> [out x T]
  Var Forward(const Var& x) const;
  int in() const { return in_; }
  int out() const { return out_; }

 private:
  Var weight_, bias_;
  int in_ = 0, out_ = 0;
};

class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(ParamStore& store, const std::string& name, int in, int out,
              int kernel, std::mt19937_64& rng);
  Var Forward(const Var& x) const;
  int in() const { return in_; }

 private:
  Var weight_, bias_;
  int in_ = 0, kernel_ = 1;
};

// Pre-activation residual block with optional instance normalisation and
// 2x temporal average-pool downsampling; output scaled by 1/sqrt(2).
class ResBlock {
 public:
  ResBlock() = default;
  ResBlock(ParamStore& store, const std::string& name, int in, int out,
           bool normalize, bool downsample, double slope, std::mt19937_64& rng);
  Var Forward(const Var& x) const;

 private:
  Conv1dLayer conv1_, conv2_, shortcut_;
  bool learned_shortcut_ = false, normalize_ = false, downsample_ = false;
  double slope_ = 0.2;
};

// Adaptive instance normalisation: (1 + gamma(s)) * IN(x) + beta(s).
class AdaIn {
 public:
  AdaIn() = default;
  AdaIn(ParamStore& store, const std::string& name, int channels,
        int style_dim, std::mt19937_64& rng);
  Var Forward(const Var& x, const Var& style) const;

 private:
  Linear fc_;
  int channels_ = 0;
};

// Style-conditioned residual block with optional 2x nearest upsampling.
class AdaInResBlock {
 public:
  AdaInResBlock() = default;
  AdaInResBlock(ParamStore& store, const std::string& name, int in, int out,
                int style_dim, bool upsample, double slope, std::mt19937_64& rng);
  // out_len: temporal length after upsampling (ignored without upsampling).
  Var Forward(const Var& x, const Var& style, Eigen::Index out_len) const;

 private:
  AdaIn norm1_, norm2_;
  Conv1dLayer conv1_, conv2_, shortcut_;
  bool learned_shortcut_ = false, upsample_ = false;
  double slope_ = 0.2;
};

}  // namespace emovc::nn

#endif  // EMOVC_LAYERS_H_
