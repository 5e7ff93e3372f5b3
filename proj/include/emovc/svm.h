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

#ifndef EMOVC_SVM_H_
#define EMOVC_SVM_H_

#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace emovc {

struct SvmOptions {
  double c = 10.0;
  double gamma = 0.0;       // RBF width; <= 0 means 1 / num_features
  double tolerance = 1e-3;  // KKT violation stopping threshold
  long max_iterations = 1000000;
};

// One-vs-rest soft-margin SVM with an RBF kernel. Inputs are standardised
// per feature; each binary problem is solved by SMO with second-order
// working-set selection.
class SvmModel {
 public:
  // Needs >= 2 classes with >= 2 samples each; throws std::invalid_argument.
  static SvmModel Train(const std::vector<Eigen::VectorXd>& x, const std::vector<int>& y,
                        const SvmOptions& options = {});

  int Predict(const Eigen::VectorXd& x) const;
  // One decision value per class, in classes() order.
  Eigen::VectorXd DecisionValues(const Eigen::VectorXd& x) const;
  const std::vector<int>& classes() const { return classes_; }

  nlohmann::json ToJson() const;
  static SvmModel FromJson(const nlohmann::json& j);

 private:
  struct Machine {
    Eigen::VectorXd coef;  // alpha_i * y_i per training point
    double rho = 0.0;
  };

  Eigen::VectorXd Standardize(const Eigen::VectorXd& x) const;

  Eigen::VectorXd mean_, scale_;
  double gamma_ = 1.0;
  Eigen::MatrixXd support_;  // standardised training points, one per row
  std::vector<int> classes_;
  std::vector<Machine> machines_;
};

}  // namespace emovc

#endif  // EMOVC_SVM_H_
