// Copyright (c) 2026 The unifyspeech-cpp Authors
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

#include "unifyspeech/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>

#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {

using internal::Node;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

ConstMapMat AsMat(const std::vector<double>& v, std::size_t r, std::size_t c) {
  return ConstMapMat(v.data(), static_cast<Eigen::Index>(r),
                     static_cast<Eigen::Index>(c));
}

MapMat AsMutMat(std::vector<double>& v, std::size_t r, std::size_t c) {
  return MapMat(v.data(), static_cast<Eigen::Index>(r),
                static_cast<Eigen::Index>(c));
}

Tensor MakeOp(Shape shape, std::vector<double> data, const char* op,
              std::initializer_list<Tensor> inputs,
              std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  if (GradEnabled()) {
    bool any = false;
    for (const Tensor& t : inputs) any = any || t.requires_grad();
    if (any) {
      node->requires_grad = true;
      for (const Tensor& t : inputs) node->inputs.push_back(t.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

// Gradient buffer of input i, or nullptr when that input is a constant.
double* GradOf(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  if (!in.requires_grad) return nullptr;
  return in.EnsureGrad().data();
}

void RequireRank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got shape " +
                         ShapeToString(t.shape()));
  }
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "matmul");
  RequireRank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         ShapeToString(a.shape()) + " x " +
                         ShapeToString(b.shape()));
  }
  std::vector<double> out(m * n);
  AsMutMat(out, m, n).noalias() =
      AsMat(a.node()->data, m, k) * AsMat(b.node()->data, k, n);
  return MakeOp({m, n}, std::move(out), "matmul", {a, b},
                [m, k, n](Node& self) {
                  auto g = AsMat(self.grad, m, n);
                  if (double* ga = GradOf(self, 0)) {
                    MapMat(ga, m, k).noalias() +=
                        g * AsMat(self.inputs[1]->data, k, n).transpose();
                  }
                  if (double* gb = GradOf(self, 1)) {
                    MapMat(gb, k, n).noalias() +=
                        AsMat(self.inputs[0]->data, m, k).transpose() * g;
                  }
                });
}

Tensor Transpose(const Tensor& a) {
  RequireRank(a, 2, "transpose");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  std::vector<double> out(r * c);
  AsMutMat(out, c, r) = AsMat(a.node()->data, r, c).transpose();
  return MakeOp({c, r}, std::move(out), "transpose", {a}, [r, c](Node& self) {
    if (double* ga = GradOf(self, 0)) {
      MapMat(ga, r, c) += AsMat(self.grad, c, r).transpose();
    }
  });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  std::vector<double> out(a.size());
  const auto& x = a.node()->data;
  const auto& y = b.node()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return MakeOp(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (double* g = GradOf(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      }
    }
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto& x = a.node()->data;
  const auto& y = b.node()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return MakeOp(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
    if (double* g = GradOf(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  std::vector<double> out(a.size());
  const auto& x = a.node()->data;
  const auto& y = b.node()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return MakeOp(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
    const auto& x = self.inputs[0]->data;
    const auto& y = self.inputs[1]->data;
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * y[i];
    }
    if (double* g = GradOf(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * x[i];
    }
  });
}

Tensor Scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  return MakeOp(a.shape(), std::move(out), "scale", {a}, [factor](Node& self) {
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += factor * self.grad[i];
    }
  });
}

Tensor AddRowVector(const Tensor& x, const Tensor& v) {
  RequireRank(x, 2, "add_row_vector");
  RequireRank(v, 1, "add_row_vector");
  const std::size_t t = x.shape()[0], d = x.shape()[1];
  if (v.shape()[0] != d) {
    throw DimensionError("add_row_vector: " + ShapeToString(x.shape()) + " + " +
                         ShapeToString(v.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  const auto& vv = v.node()->data;
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t c = 0; c < d; ++c) out[r * d + c] += vv[c];
  }
  return MakeOp(x.shape(), std::move(out), "add_row_vector", {x, v},
                [t, d](Node& self) {
                  if (double* g = GradOf(self, 0)) {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                  }
                  if (double* g = GradOf(self, 1)) {
                    for (std::size_t r = 0; r < t; ++r) {
                      for (std::size_t c = 0; c < d; ++c) g[c] += self.grad[r * d + c];
                    }
                  }
                });
}

Tensor Relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return MakeOp(x.shape(), std::move(out), "relu", {x}, [](Node& self) {
    if (double* g = GradOf(self, 0)) {
      const auto& in = self.inputs[0]->data;
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        if (in[i] > 0.0) g[i] += self.grad[i];
      }
    }
  });
}

Tensor Reshape(const Tensor& x, Shape shape) {
  if (NumElements(shape) != x.size()) {
    throw DimensionError("reshape: " + ShapeToString(x.shape()) + " -> " +
                         ShapeToString(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return MakeOp(std::move(shape), std::move(out), "reshape", {x}, [](Node& self) {
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor SoftmaxRows(const Tensor& x) {
  RequireRank(x, 2, "softmax");
  const std::size_t t = x.shape()[0], k = x.shape()[1];
  std::vector<double> out(x.size());
  const auto& in = x.node()->data;
  for (std::size_t r = 0; r < t; ++r) {
    const double* row = in.data() + r * k;
    double* o = out.data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      o[c] = std::exp(row[c] - mx);
      sum += o[c];
    }
    for (std::size_t c = 0; c < k; ++c) o[c] /= sum;
  }
  return MakeOp(x.shape(), std::move(out), "softmax", {x}, [t, k](Node& self) {
    double* g = GradOf(self, 0);
    if (!g) return;
    // Softmax output is this node's data.
    const auto& y = self.data;
    for (std::size_t r = 0; r < t; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < k; ++c) dot += self.grad[r * k + c] * y[r * k + c];
      for (std::size_t c = 0; c < k; ++c) {
        g[r * k + c] += y[r * k + c] * (self.grad[r * k + c] - dot);
      }
    }
  });
}

Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps) {
  RequireRank(x, 2, "layer_norm");
  const std::size_t t = x.shape()[0], d = x.shape()[1];
  if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
    throw DimensionError("layer_norm: input " + ShapeToString(x.shape()) +
                         " with gain " + ShapeToString(gain.shape()) +
                         " and bias " + ShapeToString(bias.shape()));
  }
  if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
  const auto& in = x.node()->data;
  const auto& gv = gain.node()->data;
  const auto& bv = bias.node()->data;
  std::vector<double> xhat(x.size());
  std::vector<double> inv_std(t);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < t; ++r) {
    const double* row = in.data() + r * d;
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += row[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      const double h = (row[c] - mean) * inv_std[r];
      xhat[r * d + c] = h;
      out[r * d + c] = gv[c] * h + bv[c];
    }
  }
  return MakeOp(
      x.shape(), std::move(out), "layer_norm", {x, gain, bias},
      [t, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const auto& gv = self.inputs[1]->data;
        if (double* gx = GradOf(self, 0)) {
          const double inv_d = 1.0 / static_cast<double>(d);
          for (std::size_t r = 0; r < t; ++r) {
            double sum_dh = 0.0, sum_dh_h = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              const double dh = self.grad[r * d + c] * gv[c];
              sum_dh += dh;
              sum_dh_h += dh * xhat[r * d + c];
            }
            for (std::size_t c = 0; c < d; ++c) {
              const double dh = self.grad[r * d + c] * gv[c];
              gx[r * d + c] += inv_std[r] * (dh - inv_d * sum_dh -
                                             xhat[r * d + c] * inv_d * sum_dh_h);
            }
          }
        }
        if (double* gg = GradOf(self, 1)) {
          for (std::size_t r = 0; r < t; ++r) {
            for (std::size_t c = 0; c < d; ++c) gg[c] += self.grad[r * d + c] * xhat[r * d + c];
          }
        }
        if (double* gb = GradOf(self, 2)) {
          for (std::size_t r = 0; r < t; ++r) {
            for (std::size_t c = 0; c < d; ++c) gb[c] += self.grad[r * d + c];
          }
        }
      });
}

Tensor Conv1d(const Tensor& x, const Tensor& kernel) {
  RequireRank(x, 2, "conv1d");
  RequireRank(kernel, 3, "conv1d");
  const std::size_t t = x.shape()[0], cin = x.shape()[1];
  const std::size_t k = kernel.shape()[0], cout = kernel.shape()[2];
  if (k % 2 == 0) {
    throw ConfigError("conv1d: kernel size must be odd for same padding, got " +
                      std::to_string(k));
  }
  if (kernel.shape()[1] != cin) {
    throw DimensionError("conv1d: input " + ShapeToString(x.shape()) +
                         " vs kernel " + ShapeToString(kernel.shape()));
  }
  const std::size_t half = k / 2;
  const std::size_t width = k * cin;
  // im2col: column block j holds the input shifted by (j - half) frames.
  std::vector<double> cols(t * width, 0.0);
  const auto& in = x.node()->data;
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(r + j) -
                                 static_cast<std::ptrdiff_t>(half);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
      std::copy_n(in.data() + src * cin, cin, cols.data() + r * width + j * cin);
    }
  }
  std::vector<double> out(t * cout);
  AsMutMat(out, t, cout).noalias() =
      AsMat(cols, t, width) * AsMat(kernel.node()->data, width, cout);
  return MakeOp(
      {t, cout}, std::move(out), "conv1d", {x, kernel},
      [t, cin, k, cout, half, width, cols = std::move(cols)](Node& self) {
        auto g = AsMat(self.grad, t, cout);
        if (double* gk = GradOf(self, 1)) {
          MapMat(gk, width, cout).noalias() += AsMat(cols, t, width).transpose() * g;
        }
        if (double* gx = GradOf(self, 0)) {
          RowMat dcols = g * AsMat(self.inputs[1]->data, width, cout).transpose();
          for (std::size_t r = 0; r < t; ++r) {
            for (std::size_t j = 0; j < k; ++j) {
              const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(r + j) -
                                         static_cast<std::ptrdiff_t>(half);
              if (src < 0 || src >= static_cast<std::ptrdiff_t>(t)) continue;
              const double* d = dcols.data() + r * width + j * cin;
              double* dst = gx + src * cin;
              for (std::size_t c = 0; c < cin; ++c) dst[c] += d[c];
            }
          }
        }
      });
}

Tensor GatherRows(const Tensor& table, std::span<const int> indices) {
  RequireRank(table, 2, "gather_rows");
  const std::size_t n = table.shape()[0], d = table.shape()[1];
  std::vector<int> idx(indices.begin(), indices.end());
  std::vector<double> out(idx.size() * d);
  const auto& tv = table.node()->data;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= n) {
      throw IndexError("gather_rows: index " + std::to_string(idx[i]) +
                       " outside table of " + std::to_string(n) + " rows");
    }
    std::copy_n(tv.data() + idx[i] * d, d, out.data() + i * d);
  }
  const std::size_t rows = idx.size();
  return MakeOp({rows, d}, std::move(out), "gather_rows", {table},
                [d, idx = std::move(idx)](Node& self) {
                  if (double* g = GradOf(self, 0)) {
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      double* dst = g + idx[i] * d;
                      const double* src = self.grad.data() + i * d;
                      for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
                    }
                  }
                });
}

Tensor MeanRows(const Tensor& x) {
  RequireRank(x, 2, "mean_rows");
  const std::size_t t = x.shape()[0], d = x.shape()[1];
  if (t == 0) throw DimensionError("mean_rows: empty sequence");
  std::vector<double> out(d, 0.0);
  const auto& in = x.node()->data;
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t c = 0; c < d; ++c) out[c] += in[r * d + c];
  }
  for (double& v : out) v /= static_cast<double>(t);
  return MakeOp({d}, std::move(out), "mean_rows", {x}, [t, d](Node& self) {
    if (double* g = GradOf(self, 0)) {
      const double s = 1.0 / static_cast<double>(t);
      for (std::size_t r = 0; r < t; ++r) {
        for (std::size_t c = 0; c < d; ++c) g[r * d + c] += s * self.grad[c];
      }
    }
  });
}

Tensor SliceCols(const Tensor& x, std::size_t begin, std::size_t end) {
  RequireRank(x, 2, "slice_cols");
  const std::size_t t = x.shape()[0], d = x.shape()[1];
  if (begin > end || end > d) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") of " + ShapeToString(x.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(t * w);
  const auto& in = x.node()->data;
  for (std::size_t r = 0; r < t; ++r) {
    std::copy_n(in.data() + r * d + begin, w, out.data() + r * w);
  }
  return MakeOp({t, w}, std::move(out), "slice_cols", {x},
                [t, d, w, begin](Node& self) {
                  if (double* g = GradOf(self, 0)) {
                    for (std::size_t r = 0; r < t; ++r) {
                      for (std::size_t c = 0; c < w; ++c) {
                        g[r * d + begin + c] += self.grad[r * w + c];
                      }
                    }
                  }
                });
}

Tensor ConcatCols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t t = parts[0].rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) {
    RequireRank(p, 2, "concat_cols");
    if (p.shape()[0] != t) {
      throw DimensionError("concat_cols: row count mismatch " +
                           ShapeToString(parts[0].shape()) + " vs " +
                           ShapeToString(p.shape()));
    }
    widths.push_back(p.shape()[1]);
    total += p.shape()[1];
  }
  std::vector<double> out(t * total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& in = parts[i].node()->data;
    for (std::size_t r = 0; r < t; ++r) {
      std::copy_n(in.data() + r * widths[i], widths[i],
                  out.data() + r * total + offset);
    }
    offset += widths[i];
  }
  auto node = std::make_shared<Node>();
  node->shape = {t, total};
  node->data = std::move(out);
  node->op = "concat_cols";
  bool any = false;
  for (const Tensor& p : parts) any = any || p.requires_grad();
  if (GradEnabled() && any) {
    node->requires_grad = true;
    for (const Tensor& p : parts) node->inputs.push_back(p.node());
    node->backward = [t, total, widths = std::move(widths)](Node& self) {
      std::size_t offset = 0;
      for (std::size_t i = 0; i < widths.size(); ++i) {
        if (double* g = GradOf(self, i)) {
          for (std::size_t r = 0; r < t; ++r) {
            for (std::size_t c = 0; c < widths[i]; ++c) {
              g[r * widths[i] + c] += self.grad[r * total + offset + c];
            }
          }
        }
        offset += widths[i];
      }
    };
  }
  return Tensor(std::move(node));
}

Tensor Dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.Uniform() >= rate ? keep_scale : 0.0;
  std::vector<double> out(x.size());
  const auto& in = x.node()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * mask[i];
  return MakeOp(x.shape(), std::move(out), "dropout", {x},
                [mask = std::move(mask)](Node& self) {
                  if (double* g = GradOf(self, 0)) {
                    for (std::size_t i = 0; i < mask.size(); ++i) g[i] += self.grad[i] * mask[i];
                  }
                });
}

Tensor Sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return MakeOp({}, {s}, "sum", {x}, [](Node& self) {
    if (double* g = GradOf(self, 0)) {
      const std::size_t n = self.inputs[0]->data.size();
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[0];
    }
  });
}

Tensor Mean(const Tensor& x) {
  if (x.size() == 0) throw DimensionError("mean: empty tensor");
  double s = 0.0;
  for (double v : x.data()) s += v;
  const double n = static_cast<double>(x.size());
  return MakeOp({}, {s / n}, "mean", {x}, [n](Node& self) {
    if (double* g = GradOf(self, 0)) {
      const std::size_t count = self.inputs[0]->data.size();
      for (std::size_t i = 0; i < count; ++i) g[i] += self.grad[0] / n;
    }
  });
}

Tensor Mse(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mse");
  if (a.size() == 0) throw DimensionError("mse: empty tensors");
  const auto& x = a.node()->data;
  const auto& y = b.node()->data;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  const double n = static_cast<double>(x.size());
  return MakeOp({}, {s / n}, "mse", {a, b}, [n](Node& self) {
    const auto& x = self.inputs[0]->data;
    const auto& y = self.inputs[1]->data;
    const double scale = 2.0 * self.grad[0] / n;
    if (double* g = GradOf(self, 0)) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] += scale * (x[i] - y[i]);
    }
    if (double* g = GradOf(self, 1)) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] -= scale * (x[i] - y[i]);
    }
  });
}

Tensor SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> targets) {
  RequireRank(logits, 2, "softmax_cross_entropy");
  const std::size_t t = logits.shape()[0], k = logits.shape()[1];
  if (targets.size() != t) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + ShapeToString(logits.shape()));
  }
  if (t == 0) throw DimensionError("softmax_cross_entropy: empty batch");
  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<double> probs(t * k);
  const auto& in = logits.node()->data;
  double loss = 0.0;
  for (std::size_t r = 0; r < t; ++r) {
    if (tgt[r] < 0 || static_cast<std::size_t>(tgt[r]) >= k) {
      throw IndexError("softmax_cross_entropy: target " + std::to_string(tgt[r]) +
                       " outside [0, " + std::to_string(k) + ")");
    }
    const double* row = in.data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(row[c] - mx);
    const double log_sum = std::log(sum);
    for (std::size_t c = 0; c < k; ++c) probs[r * k + c] = std::exp(row[c] - mx - log_sum);
    loss += -(row[tgt[r]] - mx - log_sum);
  }
  loss /= static_cast<double>(t);
  return MakeOp({}, {loss}, "softmax_cross_entropy", {logits},
                [t, k, tgt = std::move(tgt), probs = std::move(probs)](Node& self) {
                  if (double* g = GradOf(self, 0)) {
                    const double s = self.grad[0] / static_cast<double>(t);
                    for (std::size_t r = 0; r < t; ++r) {
                      for (std::size_t c = 0; c < k; ++c) {
                        const double onehot = static_cast<int>(c) == tgt[r] ? 1.0 : 0.0;
                        g[r * k + c] += s * (probs[r * k + c] - onehot);
                      }
                    }
                  }
                });
}

Tensor StraightThrough(const Tensor& continuous, const Tensor& quantized) {
  RequireSameShape(continuous, quantized, "straight_through");
  std::vector<double> out(quantized.data().begin(), quantized.data().end());
  // Only the continuous side is an input: the quantized values enter as a
  // constant, so no gradient can reach the codebook through this op.
  return MakeOp(continuous.shape(), std::move(out), "straight_through",
                {continuous}, [](Node& self) {
                  if (double* g = GradOf(self, 0)) {
                    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
                  }
                });
}

}  // namespace unifyspeech
