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

#include "emovc/optimizer.h"

#include <cmath>
#include <stdexcept>

namespace emovc {

AdamW::AdamW(nn::ParamStore* store, AdamWOptions options)
    : store_(store), options_(options) {
  for (const auto& [name, p] : store_->entries()) {
    m_.push_back(nn::Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(nn::Matrix::Zero(p.rows(), p.cols()));
  }
}

void AdamW::Step() {
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const auto& entries = store_->entries();
  for (size_t i = 0; i < entries.size(); ++i) {
    ad::Var p = entries[i].second;
    if (!p.has_grad()) continue;
    const nn::Matrix& g = p.node()->grad;
    nn::Matrix& w = p.mutable_value();
    w *= 1.0 - options_.learning_rate * options_.weight_decay;
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseAbs2();
    const nn::Matrix denom =
        ((v_[i].array() / bias2).sqrt() + options_.epsilon).matrix();
    w.array() -= options_.learning_rate * (m_[i].array() / bias1) / denom.array();
  }
}

void AdamW::SetState(long steps, std::vector<nn::Matrix> m, std::vector<nn::Matrix> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw std::invalid_argument("AdamW::SetState: parameter count mismatch");
  }
  for (size_t i = 0; i < m.size(); ++i) {
    if (m[i].rows() != m_[i].rows() || m[i].cols() != m_[i].cols() ||
        v[i].rows() != v_[i].rows() || v[i].cols() != v_[i].cols()) {
      throw std::invalid_argument("AdamW::SetState: moment shape mismatch");
    }
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace emovc
