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

#ifndef EMOVC_AUTODIFF_H_
#define EMOVC_AUTODIFF_H_

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

// Minimal reverse-mode automatic differentiation over dense float64
// matrices. Sequence tensors use the [channels x time] layout; vectors are
// column matrices. Every op is deterministic and single-threaded.
namespace emovc::ad {

using Matrix = Eigen::MatrixXd;

struct Node {
  Matrix value;
  Matrix grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents' grads.
  std::function<void(Node&)> backward;

  void AccumulateGrad(const Matrix& g);
};

class Var {
 public:
  Var() = default;

  static Var Constant(Matrix value);
  static Var Parameter(Matrix value);
  static Var Scalar(double v) { return Constant(Matrix::Constant(1, 1, v)); }

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  // Zeros of the value's shape when nothing was accumulated.
  Matrix grad() const;
  bool has_grad() const { return node_->grad.size() != 0; }
  bool requires_grad() const { return node_->requires_grad; }
  void ZeroGrad() { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;

  // Back-propagates from a 1x1 root with seed gradient 1.
  void Backward() const;
  Var Detach() const { return Constant(node_->value); }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  friend Var MakeResult(Matrix value, std::vector<Var> inputs,
                        std::function<void(Node&)> backward);
  std::shared_ptr<Node> node_;
};

// Builds an op result; `backward` is dropped when no input needs grad.
Var MakeResult(Matrix value, std::vector<Var> inputs,
               std::function<void(Node&)> backward);

// Elementwise arithmetic (shapes must match).
Var Add(const Var& a, const Var& b);
Var Sub(const Var& a, const Var& b);
Var Mul(const Var& a, const Var& b);
Var Scale(const Var& a, double s);
Var AddScalar(const Var& a, double s);
// a / s where s is 1x1.
Var DivByScalar(const Var& a, const Var& s);

inline Var operator+(const Var& a, const Var& b) { return Add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return Sub(a, b); }
inline Var operator*(double s, const Var& a) { return Scale(a, s); }

Var MatMul(const Var& a, const Var& b);
Var Transpose(const Var& a);

// x + col * 1^T and x .* (col * 1^T), col is [rows x 1].
Var AddCol(const Var& x, const Var& col);
Var MulCol(const Var& x, const Var& col);

// Same-padded stride-1 temporal convolution. x: [cin x T];
// weight: [cout x cin*k] with column index c*k + j; bias: [cout x 1].
Var Conv1d(const Var& x, const Var& weight, const Var& bias, int kernel);

Var LeakyRelu(const Var& x, double slope);
Var Relu(const Var& x);
Var Abs(const Var& x);
Var Softplus(const Var& x);

// Per-row normalization over time without affine parameters.
Var InstanceNorm(const Var& x, double eps = 1e-5);

// Averages adjacent time pairs; output length ceil(T / 2).
Var AvgPool2(const Var& x);
// Nearest-neighbour upsampling by two, cropped to out_len (<= 2T).
Var Upsample2(const Var& x, Eigen::Index out_len);

Var ConcatRows(const Var& a, const Var& b);
Var SliceRows(const Var& x, Eigen::Index begin, Eigen::Index count);

Var MeanCols(const Var& x);   // [r x c] -> [r x 1]
Var SumRows(const Var& x);    // [r x c] -> [1 x c]
Var Sum(const Var& x);        // -> 1x1
Var Mean(const Var& x);       // -> 1x1
Var Element(const Var& x, Eigen::Index r, Eigen::Index c);

// Column-wise (each column independently) softmax / log-softmax.
Var SoftmaxCols(const Var& x);
Var LogSoftmaxCols(const Var& x);

// mean(|a - b|) as a 1x1 node.
Var MeanAbsDiff(const Var& a, const Var& b);

}  // namespace emovc::ad

#endif  // EMOVC_AUTODIFF_H_
