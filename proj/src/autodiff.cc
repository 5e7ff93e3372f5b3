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

#include "emovc/autodiff.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace emovc::ad {

namespace {

void CheckSameShape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(
        std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
        "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
        "x" + std::to_string(b.cols()));
  }
}

Node& Parent(Node& n, size_t i) { return *n.parents[i]; }

}  // namespace

void Node::AccumulateGrad(const Matrix& g) {
  if (!requires_grad) return;
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

Var Var::Constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

Var Var::Parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return Var(std::move(n));
}

Matrix Var::grad() const {
  if (node_->grad.size() == 0) {
    return Matrix::Zero(node_->value.rows(), node_->value.cols());
  }
  return node_->grad;
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) {
    throw std::logic_error("item() on a non-scalar");
  }
  return node_->value(0, 0);
}

void Var::Backward() const {
  if (rows() != 1 || cols() != 1) {
    throw std::logic_error("Backward() requires a 1x1 root");
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, i] = stack.back();
    if (i < n->parents.size()) {
      Node* p = n->parents[i++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->AccumulateGrad(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
  // Intermediate grads are not needed after the sweep; leaves keep theirs.
  for (Node* n : order) {
    if (n->backward) n->grad.resize(0, 0);
  }
}

Var MakeResult(Matrix value, std::vector<Var> inputs,
               std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& in : inputs) {
    if (in.requires_grad()) n->requires_grad = true;
  }
  if (n->requires_grad) {
    n->parents.reserve(inputs.size());
    for (auto& in : inputs) n->parents.push_back(in.node());
    n->backward = std::move(backward);
  }
  return Var(std::move(n));
}

Var Add(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Add");
  return MakeResult(a.value() + b.value(), {a, b}, [](Node& n) {
    Parent(n, 0).AccumulateGrad(n.grad);
    Parent(n, 1).AccumulateGrad(n.grad);
  });
}

Var Sub(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Sub");
  return MakeResult(a.value() - b.value(), {a, b}, [](Node& n) {
    Parent(n, 0).AccumulateGrad(n.grad);
    Parent(n, 1).AccumulateGrad(-n.grad);
  });
}

Var Mul(const Var& a, const Var& b) {
  CheckSameShape(a, b, "Mul");
  return MakeResult(a.value().cwiseProduct(b.value()), {a, b}, [](Node& n) {
    Node& pa = Parent(n, 0);
    Node& pb = Parent(n, 1);
    if (pa.requires_grad) pa.AccumulateGrad(n.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.AccumulateGrad(n.grad.cwiseProduct(pa.value));
  });
}

Var Scale(const Var& a, double s) {
  return MakeResult(a.value() * s, {a},
                    [s](Node& n) { Parent(n, 0).AccumulateGrad(n.grad * s); });
}

Var AddScalar(const Var& a, double s) {
  return MakeResult(a.value().array() + s, {a},
                    [](Node& n) { Parent(n, 0).AccumulateGrad(n.grad); });
}

Var DivByScalar(const Var& a, const Var& s) {
  if (s.rows() != 1 || s.cols() != 1) {
    throw std::invalid_argument("DivByScalar: divisor must be 1x1");
  }
  const double d = s.value()(0, 0);
  return MakeResult(a.value() / d, {a, s}, [d](Node& n) {
    Node& pa = Parent(n, 0);
    Node& ps = Parent(n, 1);
    if (pa.requires_grad) pa.AccumulateGrad(n.grad / d);
    if (ps.requires_grad) {
      const double g = -(n.grad.cwiseProduct(pa.value)).sum() / (d * d);
      ps.AccumulateGrad(Matrix::Constant(1, 1, g));
    }
  });
}

Var MatMul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("MatMul: inner dimension mismatch");
  }
  return MakeResult(a.value() * b.value(), {a, b}, [](Node& n) {
    Node& pa = Parent(n, 0);
    Node& pb = Parent(n, 1);
    if (pa.requires_grad) pa.AccumulateGrad(n.grad * pb.value.transpose());
    if (pb.requires_grad) pb.AccumulateGrad(pa.value.transpose() * n.grad);
  });
}

Var Transpose(const Var& a) {
  return MakeResult(a.value().transpose(), {a}, [](Node& n) {
    Parent(n, 0).AccumulateGrad(n.grad.transpose());
  });
}

Var AddCol(const Var& x, const Var& col) {
  if (col.cols() != 1 || col.rows() != x.rows()) {
    throw std::invalid_argument("AddCol: column shape mismatch");
  }
  Matrix out = x.value().colwise() + col.value().col(0);
  return MakeResult(std::move(out), {x, col}, [](Node& n) {
    Parent(n, 0).AccumulateGrad(n.grad);
    Parent(n, 1).AccumulateGrad(n.grad.rowwise().sum());
  });
}

Var MulCol(const Var& x, const Var& col) {
  if (col.cols() != 1 || col.rows() != x.rows()) {
    throw std::invalid_argument("MulCol: column shape mismatch");
  }
  Matrix out = x.value().array().colwise() * col.value().col(0).array();
  return MakeResult(std::move(out), {x, col}, [](Node& n) {
    Node& px = Parent(n, 0);
    Node& pc = Parent(n, 1);
    if (px.requires_grad) {
      Matrix g = n.grad.array().colwise() * pc.value.col(0).array();
      px.AccumulateGrad(g);
    }
    if (pc.requires_grad) {
      pc.AccumulateGrad(n.grad.cwiseProduct(px.value).rowwise().sum());
    }
  });
}

Var Conv1d(const Var& x, const Var& weight, const Var& bias, int kernel) {
  const Eigen::Index cin = x.rows();
  const Eigen::Index t = x.cols();
  const Eigen::Index cout = weight.rows();
  if (kernel < 1 || kernel % 2 == 0) {
    throw std::invalid_argument("Conv1d: kernel must be odd and positive");
  }
  if (weight.cols() != cin * kernel) {
    throw std::invalid_argument("Conv1d: weight expects " +
                                std::to_string(weight.cols() / kernel) +
                                " input channels, got " + std::to_string(cin));
  }
  if (bias.rows() != cout || bias.cols() != 1) {
    throw std::invalid_argument("Conv1d: bias shape mismatch");
  }
  const int pad = kernel / 2;
  // im2col: cols(c*k + j, s) = x(c, s + j - pad), zero outside.
  Matrix cols = Matrix::Zero(cin * kernel, t);
  for (Eigen::Index c = 0; c < cin; ++c) {
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index shift = j - pad;
      const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
      const Eigen::Index hi = std::min<Eigen::Index>(t, t - shift);
      for (Eigen::Index s = lo; s < hi; ++s) {
        cols(c * kernel + j, s) = x.value()(c, s + shift);
      }
    }
  }
  Matrix out = weight.value() * cols;
  out.colwise() += bias.value().col(0);
  return MakeResult(
      std::move(out), {x, weight, bias},
      [cols = std::move(cols), kernel, pad, cin, t](Node& n) {
        Node& px = Parent(n, 0);
        Node& pw = Parent(n, 1);
        Node& pb = Parent(n, 2);
        if (pw.requires_grad) pw.AccumulateGrad(n.grad * cols.transpose());
        if (pb.requires_grad) pb.AccumulateGrad(n.grad.rowwise().sum());
        if (px.requires_grad) {
          Matrix dcols = pw.value.transpose() * n.grad;
          Matrix dx = Matrix::Zero(cin, t);
          for (Eigen::Index c = 0; c < cin; ++c) {
            for (int j = 0; j < kernel; ++j) {
              const Eigen::Index shift = j - pad;
              const Eigen::Index lo = std::max<Eigen::Index>(0, -shift);
              const Eigen::Index hi = std::min<Eigen::Index>(t, t - shift);
              for (Eigen::Index s = lo; s < hi; ++s) {
                dx(c, s + shift) += dcols(c * kernel + j, s);
              }
            }
          }
          px.AccumulateGrad(dx);
        }
      });
}

Var LeakyRelu(const Var& x, double slope) {
  Matrix out = x.value().unaryExpr(
      [slope](double v) { return v > 0.0 ? v : slope * v; });
  return MakeResult(std::move(out), {x}, [slope](Node& n) {
    Node& px = Parent(n, 0);
    Matrix d = px.value.unaryExpr(
        [slope](double v) { return v > 0.0 ? 1.0 : slope; });
    px.AccumulateGrad(n.grad.cwiseProduct(d));
  });
}

Var Relu(const Var& x) { return LeakyRelu(x, 0.0); }

Var Abs(const Var& x) {
  return MakeResult(x.value().cwiseAbs(), {x}, [](Node& n) {
    Node& px = Parent(n, 0);
    Matrix sign = px.value.unaryExpr(
        [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    px.AccumulateGrad(n.grad.cwiseProduct(sign));
  });
}

namespace {
double SoftplusScalar(double v) {
  // log(1 + e^v) without overflow.
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}
double SigmoidScalar(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}
}  // namespace

Var Softplus(const Var& x) {
  return MakeResult(x.value().unaryExpr(&SoftplusScalar), {x}, [](Node& n) {
    Node& px = Parent(n, 0);
    px.AccumulateGrad(n.grad.cwiseProduct(px.value.unaryExpr(&SigmoidScalar)));
  });
}

Var InstanceNorm(const Var& x, double eps) {
  const Eigen::Index t = x.cols();
  Eigen::VectorXd mean = x.value().rowwise().mean();
  Matrix centered = x.value().colwise() - mean;
  Eigen::VectorXd inv_std =
      ((centered.array().square().rowwise().sum() / static_cast<double>(t)) +
       eps)
          .rsqrt()
          .matrix();
  Matrix y = centered.array().colwise() * inv_std.array();
  Matrix y_copy = y;
  return MakeResult(
      std::move(y), {x},
      [y = std::move(y_copy), inv_std = std::move(inv_std), t](Node& n) {
        const Matrix& g = n.grad;
        Eigen::VectorXd g_mean = g.rowwise().mean();
        Eigen::VectorXd gy_mean =
            g.cwiseProduct(y).rowwise().sum() / static_cast<double>(t);
        Matrix dx = g.colwise() - g_mean;
        dx -= (y.array().colwise() * gy_mean.array()).matrix();
        dx = dx.array().colwise() * inv_std.array();
        Parent(n, 0).AccumulateGrad(dx);
      });
}

Var AvgPool2(const Var& x) {
  const Eigen::Index t = x.cols();
  const Eigen::Index out_t = (t + 1) / 2;
  Matrix out(x.rows(), out_t);
  for (Eigen::Index s = 0; s < out_t; ++s) {
    if (2 * s + 1 < t) {
      out.col(s) = 0.5 * (x.value().col(2 * s) + x.value().col(2 * s + 1));
    } else {
      out.col(s) = x.value().col(2 * s);
    }
  }
  return MakeResult(std::move(out), {x}, [t, out_t](Node& n) {
    Matrix dx(n.grad.rows(), t);
    for (Eigen::Index s = 0; s < out_t; ++s) {
      if (2 * s + 1 < t) {
        dx.col(2 * s) = 0.5 * n.grad.col(s);
        dx.col(2 * s + 1) = 0.5 * n.grad.col(s);
      } else {
        dx.col(2 * s) = n.grad.col(s);
      }
    }
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var Upsample2(const Var& x, Eigen::Index out_len) {
  const Eigen::Index t = x.cols();
  if (out_len > 2 * t || out_len < 1) {
    throw std::invalid_argument("Upsample2: output length out of range");
  }
  Matrix out(x.rows(), out_len);
  for (Eigen::Index s = 0; s < out_len; ++s) out.col(s) = x.value().col(s / 2);
  return MakeResult(std::move(out), {x}, [t, out_len](Node& n) {
    Matrix dx = Matrix::Zero(n.grad.rows(), t);
    for (Eigen::Index s = 0; s < out_len; ++s) dx.col(s / 2) += n.grad.col(s);
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var ConcatRows(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("ConcatRows: column count mismatch");
  }
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a.value();
  out.bottomRows(b.rows()) = b.value();
  const Eigen::Index ra = a.rows();
  const Eigen::Index rb = b.rows();
  return MakeResult(std::move(out), {a, b}, [ra, rb](Node& n) {
    Parent(n, 0).AccumulateGrad(n.grad.topRows(ra));
    Parent(n, 1).AccumulateGrad(n.grad.bottomRows(rb));
  });
}

Var SliceRows(const Var& x, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > x.rows()) {
    throw std::invalid_argument("SliceRows: range out of bounds");
  }
  const Eigen::Index rows = x.rows();
  return MakeResult(x.value().middleRows(begin, count), {x},
                    [begin, count, rows](Node& n) {
                      Matrix dx = Matrix::Zero(rows, n.grad.cols());
                      dx.middleRows(begin, count) = n.grad;
                      Parent(n, 0).AccumulateGrad(dx);
                    });
}

Var MeanCols(const Var& x) {
  const Eigen::Index t = x.cols();
  return MakeResult(x.value().rowwise().mean(), {x}, [t](Node& n) {
    Matrix dx = n.grad.replicate(1, t) / static_cast<double>(t);
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var SumRows(const Var& x) {
  const Eigen::Index r = x.rows();
  return MakeResult(x.value().colwise().sum(), {x}, [r](Node& n) {
    Parent(n, 0).AccumulateGrad(n.grad.replicate(r, 1));
  });
}

Var Sum(const Var& x) {
  const Eigen::Index r = x.rows();
  const Eigen::Index c = x.cols();
  return MakeResult(Matrix::Constant(1, 1, x.value().sum()), {x},
                    [r, c](Node& n) {
                      Parent(n, 0).AccumulateGrad(
                          Matrix::Constant(r, c, n.grad(0, 0)));
                    });
}

Var Mean(const Var& x) {
  const double count = static_cast<double>(x.value().size());
  return Scale(Sum(x), 1.0 / count);
}

Var Element(const Var& x, Eigen::Index r, Eigen::Index c) {
  if (r < 0 || c < 0 || r >= x.rows() || c >= x.cols()) {
    throw std::out_of_range("Element: index out of range");
  }
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  return MakeResult(Matrix::Constant(1, 1, x.value()(r, c)), {x},
                    [r, c, rows, cols](Node& n) {
                      Matrix dx = Matrix::Zero(rows, cols);
                      dx(r, c) = n.grad(0, 0);
                      Parent(n, 0).AccumulateGrad(dx);
                    });
}

Var SoftmaxCols(const Var& x) {
  Matrix out = x.value();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double m = out.col(c).maxCoeff();
    out.col(c) = (out.col(c).array() - m).exp();
    out.col(c) /= out.col(c).sum();
  }
  Matrix p = out;
  return MakeResult(std::move(out), {x}, [p = std::move(p)](Node& n) {
    // dx = p .* (g - sum(g .* p))
    Eigen::RowVectorXd dot = n.grad.cwiseProduct(p).colwise().sum();
    Matrix dx = p.cwiseProduct(n.grad - dot.replicate(p.rows(), 1));
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var LogSoftmaxCols(const Var& x) {
  Matrix out = x.value();
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double m = out.col(c).maxCoeff();
    const double lse = m + std::log((out.col(c).array() - m).exp().sum());
    out.col(c).array() -= lse;
  }
  Matrix p = out.array().exp();
  return MakeResult(std::move(out), {x}, [p = std::move(p)](Node& n) {
    Eigen::RowVectorXd gsum = n.grad.colwise().sum();
    Matrix dx = n.grad - p.cwiseProduct(gsum.replicate(p.rows(), 1));
    Parent(n, 0).AccumulateGrad(dx);
  });
}

Var MeanAbsDiff(const Var& a, const Var& b) { return Mean(Abs(Sub(a, b))); }

}  // namespace emovc::ad
