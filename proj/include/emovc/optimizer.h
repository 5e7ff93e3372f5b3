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

#ifndef EMOVC_OPTIMIZER_H_
#define EMOVC_OPTIMIZER_H_

#include <vector>

#include "emovc/layers.h"

namespace emovc {

struct AdamWOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

// Adam with decoupled weight decay over one parameter store. Parameters
// that received no gradient in the last backward pass are left untouched.
class AdamW {
 public:
  AdamW(nn::ParamStore* store, AdamWOptions options);

  void Step();

  long steps() const { return steps_; }
  const AdamWOptions& options() const { return options_; }

  // Moment estimates, one pair per parameter in store order.
  const std::vector<nn::Matrix>& first_moments() const { return m_; }
  const std::vector<nn::Matrix>& second_moments() const { return v_; }
  void SetState(long steps, std::vector<nn::Matrix> m, std::vector<nn::Matrix> v);

 private:
  nn::ParamStore* store_;
  AdamWOptions options_;
  long steps_ = 0;
  std::vector<nn::Matrix> m_, v_;
};

}  // namespace emovc

#endif  // EMOVC_OPTIMIZER_H_
