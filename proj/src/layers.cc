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

#include "emovc/layers.h"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace emovc::nn {

Var ParamStore::Add(const std::string& name, Matrix init) {
  if (Contains(name)) throw std::logic_error("duplicate parameter " + name);
  Var v = Var::Parameter(std::move(init));
  entries_.emplace_back(name, v);
  return v;
}

Var ParamStore::Get(const std::string& name) const {
  for (const auto& [n, v] : entries_) {
    if (n == name) return v;
  }
  throw std::out_of_range("no parameter named " + name);
}

bool ParamStore::Contains(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.first == name) return true;
  }
  return false;
}

void ParamStore::ZeroGrad() {
  for (auto& e : entries_) e.second.ZeroGrad();
}

size_t ParamStore::NumScalars() const {
  size_t n = 0;
  for (const auto& e : entries_) n += static_cast<size_t>(e.second.value().size());
  return n;
}

bool ParamStore::AllFinite() const {
  for (const auto& e : entries_) {
    if (!e.second.value().allFinite()) return false;
  }
  return true;
}

std::vector<Matrix> ParamStore::Snapshot() const {
  std::vector<Matrix> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.second.value());
  return out;
}

bool ParamStore::BitEqual(const std::vector<Matrix>& snapshot) const {
  if (snapshot.size() != entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Matrix& a = entries_[i].second.value();
    const Matrix& b = snapshot[i];
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if (std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) != 0) return false;
  }
  return true;
}

void ParamStore::CopyValuesFrom(const ParamStore& other) {
  if (other.entries_.size() != entries_.size()) {
    throw std::invalid_argument("CopyValuesFrom: parameter count mismatch");
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    const auto& [name, src] = other.entries_[i];
    auto& dst = entries_[i].second;
    if (name != entries_[i].first || src.rows() != dst.rows() ||
        src.cols() != dst.cols()) {
      throw std::invalid_argument("CopyValuesFrom: mismatch at " + name);
    }
    dst.mutable_value() = src.value();
  }
}

Matrix UniformInit(Eigen::Index rows, Eigen::Index cols, int fan_in,
                   std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

Linear::Linear(ParamStore& store, const std::string& name, int in, int out,
               std::mt19937_64& rng)
    : in_(in), out_(out) {
  weight_ = store.Add(name + ".weight", UniformInit(out, in, in, rng));
  bias_ = store.Add(name + ".bias", UniformInit(out, 1, in, rng));
}

Var Linear::Forward(const Var& x) const {
  if (x.rows() != in_) {
    throw std::invalid_argument("Linear: expected " + std::to_string(in_) +
                                " inputs, got " + std::to_string(x.rows()));
  }
  return ad::AddCol(ad::MatMul(weight_, x), bias_);
}

Conv1dLayer::Conv1dLayer(ParamStore& store, const std::string& name, int in,
                         int out, int kernel, std::mt19937_64& rng)
    : in_(in), kernel_(kernel) {
  weight_ = store.Add(name + ".weight", UniformInit(out, in * kernel, in * kernel, rng));
  bias_ = store.Add(name + ".bias", UniformInit(out, 1, in * kernel, rng));
}

Var Conv1dLayer::Forward(const Var& x) const {
  return ad::Conv1d(x, weight_, bias_, kernel_);
}

ResBlock::ResBlock(ParamStore& store, const std::string& name, int in, int out,
                   bool normalize, bool downsample, double slope,
                   std::mt19937_64& rng)
    : learned_shortcut_(in != out),
      normalize_(normalize),
      downsample_(downsample),
      slope_(slope) {
  conv1_ = Conv1dLayer(store, name + ".conv1", in, in, 3, rng);
  conv2_ = Conv1dLayer(store, name + ".conv2", in, out, 3, rng);
  if (learned_shortcut_) {
    shortcut_ = Conv1dLayer(store, name + ".shortcut", in, out, 1, rng);
  }
}

Var ResBlock::Forward(const Var& x) const {
  Var s = learned_shortcut_ ? shortcut_.Forward(x) : x;
  if (downsample_) s = ad::AvgPool2(s);

  Var r = normalize_ ? ad::InstanceNorm(x) : x;
  r = conv1_.Forward(ad::LeakyRelu(r, slope_));
  if (downsample_) r = ad::AvgPool2(r);
  if (normalize_) r = ad::InstanceNorm(r);
  r = conv2_.Forward(ad::LeakyRelu(r, slope_));
  return ad::Scale(ad::Add(s, r), 1.0 / std::numbers::sqrt2);
}

AdaIn::AdaIn(ParamStore& store, const std::string& name, int channels,
             int style_dim, std::mt19937_64& rng)
    : channels_(channels) {
  fc_ = Linear(store, name + ".fc", style_dim, 2 * channels, rng);
}

Var AdaIn::Forward(const Var& x, const Var& style) const {
  Var h = fc_.Forward(style);
  Var gamma = ad::AddScalar(ad::SliceRows(h, 0, channels_), 1.0);
  Var beta = ad::SliceRows(h, channels_, channels_);
  return ad::AddCol(ad::MulCol(ad::InstanceNorm(x), gamma), beta);
}

AdaInResBlock::AdaInResBlock(ParamStore& store, const std::string& name, int in,
                             int out, int style_dim, bool upsample, double slope,
                             std::mt19937_64& rng)
    : learned_shortcut_(in != out), upsample_(upsample), slope_(slope) {
  norm1_ = AdaIn(store, name + ".norm1", in, style_dim, rng);
  conv1_ = Conv1dLayer(store, name + ".conv1", in, out, 3, rng);
  norm2_ = AdaIn(store, name + ".norm2", out, style_dim, rng);
  conv2_ = Conv1dLayer(store, name + ".conv2", out, out, 3, rng);
  if (learned_shortcut_) {
    shortcut_ = Conv1dLayer(store, name + ".shortcut", in, out, 1, rng);
  }
}

Var AdaInResBlock::Forward(const Var& x, const Var& style,
                           Eigen::Index out_len) const {
  Var s = upsample_ ? ad::Upsample2(x, out_len) : x;
  if (learned_shortcut_) s = shortcut_.Forward(s);

  Var r = ad::LeakyRelu(norm1_.Forward(x, style), slope_);
  if (upsample_) r = ad::Upsample2(r, out_len);
  r = conv1_.Forward(r);
  r = conv2_.Forward(ad::LeakyRelu(norm2_.Forward(r, style), slope_));
  return ad::Scale(ad::Add(s, r), 1.0 / std::numbers::sqrt2);
}

}  // namespace emovc::nn
