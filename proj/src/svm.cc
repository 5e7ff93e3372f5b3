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

#include "emovc/svm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <glog/logging.h>

namespace emovc {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual problem: min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
struct SmoResult {
  Eigen::VectorXd alpha;
  double rho = 0.0;
};

SmoResult SolveBinary(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& y,
                      const SvmOptions& opt) {
  const Eigen::Index n = y.size();
  const double c = opt.c;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * kernel(i, j); };

  long iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    double gmax = -kInf, gmax2 = -kInf;
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y(t) > 0 ? alpha(t) < c : alpha(t) > 0) {
        const double v = -y(t) * grad(t);
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    if (i < 0) break;
    double best = kInf;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!(y(t) > 0 ? alpha(t) > 0 : alpha(t) < c)) continue;
      const double v = -y(t) * grad(t);
      gmax2 = std::max(gmax2, -v);
      const double diff = gmax - v;
      if (diff > 0) {
        double quad = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
        if (quad <= 0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < opt.tolerance || j < 0) break;

    const double old_i = alpha(i), old_j = alpha(j);
    if (y(i) != y(j)) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = c - diff;
        }
      } else if (alpha(j) > c) {
        alpha(j) = c;
        alpha(i) = c + diff;
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > c) {
        if (alpha(i) > c) {
          alpha(i) = c;
          alpha(j) = sum - c;
        }
        if (alpha(j) > c) {
          alpha(j) = c;
          alpha(i) = sum - c;
        }
      } else {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = sum;
        }
        if (alpha(i) < 0) {
          alpha(i) = 0;
          alpha(j) = sum;
        }
      }
    }
    const double di = alpha(i) - old_i, dj = alpha(j) - old_j;
    for (Eigen::Index t = 0; t < n; ++t) grad(t) += q(i, t) * di + q(j, t) * dj;
  }
  if (iter == opt.max_iterations) LOG(WARNING) << "SMO hit the iteration limit";

  double ub = kInf, lb = -kInf, sum_free = 0.0;
  int num_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y(t) * grad(t);
    const bool at_upper = alpha(t) >= c;
    const bool at_lower = alpha(t) <= 0;
    if (at_upper) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++num_free;
      sum_free += yg;
    }
  }
  return {alpha, num_free > 0 ? sum_free / num_free : (ub + lb) / 2.0};
}

}  // namespace

SvmModel SvmModel::Train(const std::vector<Eigen::VectorXd>& x, const std::vector<int>& y,
                         const SvmOptions& options) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("SVM: need equally many samples and labels");
  }
  std::map<int, int> counts;
  for (int label : y) ++counts[label];
  if (counts.size() < 2) throw std::invalid_argument("SVM: need at least two classes");
  for (const auto& [label, n] : counts) {
    if (n < 2) {
      throw std::invalid_argument("SVM: class " + std::to_string(label) +
                                  " has fewer than two samples");
    }
  }
  const Eigen::Index dim = x.front().size();
  for (const auto& v : x) {
    if (v.size() != dim) throw std::invalid_argument("SVM: ragged feature vectors");
    if (!v.allFinite()) throw std::invalid_argument("SVM: non-finite feature");
  }

  SvmModel m;
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) data.row(i) = x[i].transpose();
  m.mean_ = data.colwise().mean().transpose();
  m.scale_ = ((data.rowwise() - m.mean_.transpose()).array().square().colwise().mean())
                 .sqrt()
                 .transpose();
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (m.scale_(k) < 1e-12) m.scale_(k) = 1.0;
  }
  m.support_.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) m.support_.row(i) = m.Standardize(x[i]).transpose();
  m.gamma_ = options.gamma > 0 ? options.gamma : 1.0 / static_cast<double>(dim);

  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double d2 = (m.support_.row(i) - m.support_.row(j)).squaredNorm();
      kernel(i, j) = kernel(j, i) = std::exp(-m.gamma_ * d2);
    }
  }

  for (const auto& [label, count] : counts) {
    m.classes_.push_back(label);
    Eigen::VectorXd yy(n);
    for (Eigen::Index i = 0; i < n; ++i) yy(i) = y[i] == label ? 1.0 : -1.0;
    const SmoResult r = SolveBinary(kernel, yy, options);
    m.machines_.push_back({r.alpha.cwiseProduct(yy), r.rho});
  }
  return m;
}

Eigen::VectorXd SvmModel::Standardize(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) throw std::invalid_argument("SVM: feature width mismatch");
  return (x - mean_).cwiseQuotient(scale_);
}

Eigen::VectorXd SvmModel::DecisionValues(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = Standardize(x);
  Eigen::VectorXd k(support_.rows());
  for (Eigen::Index i = 0; i < support_.rows(); ++i) {
    k(i) = std::exp(-gamma_ * (support_.row(i).transpose() - z).squaredNorm());
  }
  Eigen::VectorXd out(machines_.size());
  for (size_t c = 0; c < machines_.size(); ++c) {
    out(c) = machines_[c].coef.dot(k) - machines_[c].rho;
  }
  return out;
}

int SvmModel::Predict(const Eigen::VectorXd& x) const {
  Eigen::Index best = 0;
  DecisionValues(x).maxCoeff(&best);
  return classes_[best];
}

namespace {

nlohmann::json VecToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VecFromJson(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json SvmModel::ToJson() const {
  nlohmann::json support = nlohmann::json::array();
  for (Eigen::Index i = 0; i < support_.rows(); ++i) {
    support.push_back(VecToJson(support_.row(i).transpose()));
  }
  nlohmann::json machines = nlohmann::json::array();
  for (const auto& mc : machines_) {
    machines.push_back({{"coef", VecToJson(mc.coef)}, {"rho", mc.rho}});
  }
  return {{"mean", VecToJson(mean_)}, {"scale", VecToJson(scale_)}, {"gamma", gamma_},
          {"support", support},       {"classes", classes_},        {"machines", machines}};
}

SvmModel SvmModel::FromJson(const nlohmann::json& j) {
  SvmModel m;
  m.mean_ = VecFromJson(j.at("mean"));
  m.scale_ = VecFromJson(j.at("scale"));
  m.gamma_ = j.at("gamma").get<double>();
  const auto& support = j.at("support");
  m.support_.resize(static_cast<Eigen::Index>(support.size()), m.mean_.size());
  for (size_t i = 0; i < support.size(); ++i) {
    m.support_.row(static_cast<Eigen::Index>(i)) = VecFromJson(support[i]).transpose();
  }
  m.classes_ = j.at("classes").get<std::vector<int>>();
  for (const auto& mc : j.at("machines")) {
    m.machines_.push_back({VecFromJson(mc.at("coef")), mc.at("rho").get<double>()});
  }
  return m;
}

}  // namespace emovc
