// Copyright 2026 The vhd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vhd/diffcore/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "vhd/diffcore/tape.h"
#include "vhd/error.h"

namespace vhd::diff {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;

using ImplPtr = std::shared_ptr<TensorImpl>;

ConstMatrixMap as_matrix(const std::vector<double>& data, std::size_t rows,
                         std::size_t cols) {
  return ConstMatrixMap(data.data(), static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

MatrixMap as_matrix(std::vector<double>& data, std::size_t rows,
                    std::size_t cols) {
  return MatrixMap(data.data(), static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

// Gradient buffer of an input, allocated on first use.
std::vector<double>& grad_buffer(TensorImpl& t) {
  if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0);
  return t.grad;
}

bool recording(std::initializer_list<const Tensor*> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

bool recording(std::span<const Tensor> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) return true;
  }
  return false;
}

Tensor make_output(Shape shape, std::vector<double> data) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

void record(OpKind kind, std::vector<ImplPtr> inputs, const Tensor& output,
            TapeNode::Backward backward) {
  output.impl()->requires_grad = true;
  Tape::active()->record(
      TapeNode{kind, std::move(inputs), output.impl(), std::move(backward)});
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " +
                         std::to_string(rank) + ", got shape " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

// Softmax of one contiguous row into `out`.
void softmax_row(const double* in, double* out, std::size_t n) {
  const double max_value = *std::max_element(in, in + n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - max_value);
    total += out[i];
  }
  const double inv = 1.0 / total;
  for (std::size_t i = 0; i < n; ++i) out[i] *= inv;
}

// dx += y * (dy - <y, dy>) for one row.
void softmax_row_backward(const double* y, const double* dy, double* dx,
                          std::size_t n) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += y[i] * dy[i];
  for (std::size_t i = 0; i < n; ++i) dx[i] += y[i] * (dy[i] - dot);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) +
                         " by " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n);
  as_matrix(out, m, n).noalias() =
      as_matrix(a.impl()->data, m, k) * as_matrix(b.impl()->data, k, n);
  Tensor result = make_output({m, n}, std::move(out));
  if (recording({&a, &b})) {
    ImplPtr ai = a.impl(), bi = b.impl();
    record(OpKind::kMatmul, {ai, bi}, result,
           [ai, bi, m, k, n](const TensorImpl& o) {
             const auto dc = as_matrix(o.grad, m, n);
             if (ai->requires_grad) {
               as_matrix(grad_buffer(*ai), m, k).noalias() +=
                   dc * as_matrix(bi->data, k, n).transpose();
             }
             if (bi->requires_grad) {
               as_matrix(grad_buffer(*bi), k, n).noalias() +=
                   as_matrix(ai->data, m, k).transpose() * dc;
             }
           });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  const auto& ad = a.impl()->data;
  const auto& bd = b.impl()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  Tensor result = make_output(a.shape(), std::move(out));
  if (recording({&a, &b})) {
    ImplPtr ai = a.impl(), bi = b.impl();
    record(OpKind::kAdd, {ai, bi}, result, [ai, bi](const TensorImpl& o) {
      for (const ImplPtr& in : {ai, bi}) {
        if (!in->requires_grad) continue;
        auto& g = grad_buffer(*in);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
      }
    });
  }
  return result;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto& ad = a.impl()->data;
  const auto& bd = b.impl()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] - bd[i];
  Tensor result = make_output(a.shape(), std::move(out));
  if (recording({&a, &b})) {
    ImplPtr ai = a.impl(), bi = b.impl();
    record(OpKind::kSub, {ai, bi}, result, [ai, bi](const TensorImpl& o) {
      if (ai->requires_grad) {
        auto& g = grad_buffer(*ai);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
      }
      if (bi->requires_grad) {
        auto& g = grad_buffer(*bi);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
      }
    });
  }
  return result;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  const auto& ad = a.impl()->data;
  const auto& bd = b.impl()->data;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  Tensor result = make_output(a.shape(), std::move(out));
  if (recording({&a, &b})) {
    ImplPtr ai = a.impl(), bi = b.impl();
    record(OpKind::kMul, {ai, bi}, result, [ai, bi](const TensorImpl& o) {
      if (ai->requires_grad) {
        auto& g = grad_buffer(*ai);
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += o.grad[i] * bi->data[i];
        }
      }
      if (bi->requires_grad) {
        auto& g = grad_buffer(*bi);
        for (std::size_t i = 0; i < g.size(); ++i) {
          g[i] += o.grad[i] * ai->data[i];
        }
      }
    });
  }
  return result;
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_rank(x, 2, "add_bias");
  require_rank(bias, 1, "add_bias");
  const std::size_t m = x.dim(0), n = x.dim(1);
  if (bias.dim(0) != n) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) +
                         " does not match rows of " + shape_string(x.shape()));
  }
  std::vector<double> out(x.impl()->data);
  const auto& bd = bias.impl()->data;
  for (std::size_t r = 0; r < m; ++r) {
    double* row = out.data() + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] += bd[c];
  }
  Tensor result = make_output({m, n}, std::move(out));
  if (recording({&x, &bias})) {
    ImplPtr xi = x.impl(), bi = bias.impl();
    record(OpKind::kAddBias, {xi, bi}, result,
           [xi, bi, m, n](const TensorImpl& o) {
             if (xi->requires_grad) {
               auto& g = grad_buffer(*xi);
               for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
             }
             if (bi->requires_grad) {
               auto& g = grad_buffer(*bi);
               for (std::size_t r = 0; r < m; ++r) {
                 const double* row = o.grad.data() + r * n;
                 for (std::size_t c = 0; c < n; ++c) g[c] += row[c];
               }
             }
           });
  }
  return result;
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.impl()->data);
  for (double& v : out) v *= factor;
  Tensor result = make_output(x.shape(), std::move(out));
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kScale, {xi}, result, [xi, factor](const TensorImpl& o) {
      auto& g = grad_buffer(*xi);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * o.grad[i];
    });
  }
  return result;
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.impl()->data);
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  Tensor result = make_output(x.shape(), std::move(out));
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kRelu, {xi}, result, [xi](const TensorImpl& o) {
      auto& g = grad_buffer(*xi);
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (xi->data[i] > 0.0) g[i] += o.grad[i];
      }
    });
  }
  return result;
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor result = make_output({}, {total});
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kSum, {xi}, result, [xi](const TensorImpl& o) {
      auto& g = grad_buffer(*xi);
      for (double& v : g) v += o.grad[0];
    });
  }
  return result;
}

Tensor mean(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  const double n = static_cast<double>(x.size());
  Tensor result = make_output({}, {total / n});
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kMean, {xi}, result, [xi, n](const TensorImpl& o) {
      auto& g = grad_buffer(*xi);
      const double share = o.grad[0] / n;
      for (double& v : g) v += share;
    });
  }
  return result;
}

Tensor softmax(const Tensor& v) {
  require_rank(v, 1, "softmax");
  const std::size_t n = v.dim(0);
  std::vector<double> out(n);
  softmax_row(v.impl()->data.data(), out.data(), n);
  Tensor result = make_output({n}, std::move(out));
  if (recording({&v})) {
    ImplPtr vi = v.impl();
    record(OpKind::kSoftmax, {vi}, result, [vi, n](const TensorImpl& o) {
      softmax_row_backward(o.data.data(), o.grad.data(),
                           grad_buffer(*vi).data(), n);
    });
  }
  return result;
}

Tensor softmax_rows(const Tensor& m) {
  require_rank(m, 2, "softmax_rows");
  const std::size_t rows = m.dim(0), cols = m.dim(1);
  std::vector<double> out(rows * cols);
  const double* in = m.impl()->data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    softmax_row(in + r * cols, out.data() + r * cols, cols);
  }
  Tensor result = make_output({rows, cols}, std::move(out));
  if (recording({&m})) {
    ImplPtr mi = m.impl();
    record(OpKind::kSoftmaxRows, {mi}, result,
           [mi, rows, cols](const TensorImpl& o) {
             double* g = grad_buffer(*mi).data();
             for (std::size_t r = 0; r < rows; ++r) {
               softmax_row_backward(o.data.data() + r * cols,
                                    o.grad.data() + r * cols, g + r * cols,
                                    cols);
             }
           });
  }
  return result;
}

Tensor kl_div(const Tensor& p, const Tensor& q) {
  require_rank(p, 1, "kl_div");
  require_rank(q, 1, "kl_div");
  if (p.dim(0) != q.dim(0)) {
    throw DimensionError("kl_div: length mismatch " + shape_string(p.shape()) +
                         " vs " + shape_string(q.shape()));
  }
  for (const Tensor* t : {&p, &q}) {
    double total = 0.0;
    for (double v : t->values()) {
      if (!std::isfinite(v)) {
        throw NumericalError("kl_div: non-finite probability");
      }
      if (v < 0.0) throw DomainError("kl_div: negative probability");
      total += v;
    }
    if (std::abs(total - 1.0) > kNormalizationTolerance) {
      throw DomainError("kl_div: input sums to " + std::to_string(total) +
                        ", not a probability vector");
    }
  }
  const std::size_t n = p.dim(0);
  const auto& pd = p.impl()->data;
  const auto& qd = q.impl()->data;
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pd[i] == 0.0) continue;
    value += pd[i] * (std::log(std::max(pd[i], kProbabilityFloor)) -
                      std::log(std::max(qd[i], kProbabilityFloor)));
  }
  Tensor result = make_output({}, {value});
  if (recording({&p, &q})) {
    ImplPtr pi = p.impl(), qi = q.impl();
    record(OpKind::kKlDiv, {pi, qi}, result, [pi, qi, n](const TensorImpl& o) {
      const double g0 = o.grad[0];
      const auto& pv = pi->data;
      const auto& qv = qi->data;
      if (pi->requires_grad) {
        auto& g = grad_buffer(*pi);
        for (std::size_t i = 0; i < n; ++i) {
          const double pf = std::max(pv[i], kProbabilityFloor);
          const double qf = std::max(qv[i], kProbabilityFloor);
          const double self = pv[i] >= kProbabilityFloor ? 1.0 : 0.0;
          g[i] += g0 * (std::log(pf) - std::log(qf) + self);
        }
      }
      if (qi->requires_grad) {
        auto& g = grad_buffer(*qi);
        for (std::size_t i = 0; i < n; ++i) {
          if (qv[i] >= kProbabilityFloor) g[i] -= g0 * pv[i] / qv[i];
        }
      }
    });
  }
  return result;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  if (x.rank() == 0) {
    throw DimensionError("layer_norm: input must have at least one axis");
  }
  if (!(eps > 0.0)) throw DomainError("layer_norm: eps must be positive");
  const std::size_t d = x.shape().back();
  require_rank(gain, 1, "layer_norm");
  require_rank(bias, 1, "layer_norm");
  if (gain.dim(0) != d || bias.dim(0) != d) {
    throw DimensionError("layer_norm: gain/bias " +
                         shape_string(gain.shape()) + "/" +
                         shape_string(bias.shape()) +
                         " do not match last axis of " +
                         shape_string(x.shape()));
  }
  const std::size_t rows = x.size() / d;
  const auto& xd = x.impl()->data;
  const auto& gd = gain.impl()->data;
  const auto& bd = bias.impl()->data;
  std::vector<double> normalized(x.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xd.data() + r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += row[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    inv_std[r] = rstd;
    for (std::size_t c = 0; c < d; ++c) {
      const double xh = (row[c] - mu) * rstd;
      normalized[r * d + c] = xh;
      out[r * d + c] = xh * gd[c] + bd[c];
    }
  }
  Tensor result = make_output(x.shape(), std::move(out));
  if (recording({&x, &gain, &bias})) {
    ImplPtr xi = x.impl(), gi = gain.impl(), bi = bias.impl();
    record(OpKind::kLayerNorm, {xi, gi, bi}, result,
           [xi, gi, bi, rows, d, normalized = std::move(normalized),
            inv_std = std::move(inv_std)](const TensorImpl& o) {
             const auto& dy = o.grad;
             if (gi->requires_grad) {
               auto& g = grad_buffer(*gi);
               for (std::size_t i = 0; i < rows * d; ++i) {
                 g[i % d] += dy[i] * normalized[i];
               }
             }
             if (bi->requires_grad) {
               auto& g = grad_buffer(*bi);
               for (std::size_t i = 0; i < rows * d; ++i) g[i % d] += dy[i];
             }
             if (xi->requires_grad) {
               auto& g = grad_buffer(*xi);
               const auto& gain_values = gi->data;
               const double inv_d = 1.0 / static_cast<double>(d);
               for (std::size_t r = 0; r < rows; ++r) {
                 double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                 for (std::size_t c = 0; c < d; ++c) {
                   const double dxh = dy[r * d + c] * gain_values[c];
                   mean_dxh += dxh;
                   mean_dxh_xh += dxh * normalized[r * d + c];
                 }
                 mean_dxh *= inv_d;
                 mean_dxh_xh *= inv_d;
                 for (std::size_t c = 0; c < d; ++c) {
                   const double dxh = dy[r * d + c] * gain_values[c];
                   g[r * d + c] += inv_std[r] * (dxh - mean_dxh -
                                                 normalized[r * d + c] *
                                                     mean_dxh_xh);
                 }
               }
             }
           });
  }
  return result;
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const std::size_t rank = parts[0].rank();
  if (rank < 1 || rank > 2 || axis >= rank) {
    throw DimensionError("concat: unsupported axis " + std::to_string(axis) +
                         " for shape " + shape_string(parts[0].shape()));
  }
  // View every part as [outer x inner] where concatenation happens along
  // `inner` blocks of each outer row.
  const std::size_t outer = (rank == 2 && axis == 1) ? parts[0].dim(0) : 1;
  std::vector<std::size_t> widths;
  std::size_t total_width = 0;
  for (const Tensor& t : parts) {
    if (t.rank() != rank) {
      throw DimensionError("concat: rank mismatch " +
                           shape_string(parts[0].shape()) + " vs " +
                           shape_string(t.shape()));
    }
    if (rank == 2) {
      const std::size_t other = 1 - axis;
      if (t.dim(other) != parts[0].dim(other)) {
        throw DimensionError("concat: shape mismatch " +
                             shape_string(parts[0].shape()) + " vs " +
                             shape_string(t.shape()));
      }
    }
    widths.push_back(t.size() / outer);
    total_width += widths.back();
  }
  std::vector<double> out(outer * total_width);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& src = parts[p].impl()->data;
    for (std::size_t r = 0; r < outer; ++r) {
      std::copy_n(src.data() + r * widths[p], widths[p],
                  out.data() + r * total_width + offset);
    }
    offset += widths[p];
  }
  Shape shape = parts[0].shape();
  shape[axis] = 0;
  for (const Tensor& t : parts) shape[axis] += t.dim(axis);
  Tensor result = make_output(std::move(shape), std::move(out));
  if (recording(parts)) {
    std::vector<ImplPtr> inputs;
    for (const Tensor& t : parts) inputs.push_back(t.impl());
    record(OpKind::kConcat, inputs, result,
           [inputs, widths, outer, total_width](const TensorImpl& o) {
             std::size_t off = 0;
             for (std::size_t p = 0; p < inputs.size(); ++p) {
               if (inputs[p]->requires_grad) {
                 auto& g = grad_buffer(*inputs[p]);
                 for (std::size_t r = 0; r < outer; ++r) {
                   const double* src = o.grad.data() + r * total_width + off;
                   double* dst = g.data() + r * widths[p];
                   for (std::size_t c = 0; c < widths[p]; ++c) dst[c] += src[c];
                 }
               }
               off += widths[p];
             }
           });
  }
  return result;
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t start,
             std::size_t length) {
  const std::size_t rank = x.rank();
  if (rank < 1 || rank > 2 || axis >= rank) {
    throw DimensionError("slice: unsupported axis " + std::to_string(axis) +
                         " for shape " + shape_string(x.shape()));
  }
  if (length == 0 || start + length > x.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) +
                         ") out of bounds for shape " +
                         shape_string(x.shape()));
  }
  const std::size_t outer = (rank == 2 && axis == 1) ? x.dim(0) : 1;
  const std::size_t row_width = x.size() / outer;
  const std::size_t unit = (rank == 2 && axis == 0) ? x.dim(1) : 1;
  const std::size_t begin = start * unit;
  const std::size_t width = length * unit;
  std::vector<double> out(outer * width);
  const auto& src = x.impl()->data;
  for (std::size_t r = 0; r < outer; ++r) {
    std::copy_n(src.data() + r * row_width + begin, width,
                out.data() + r * width);
  }
  Shape shape = x.shape();
  shape[axis] = length;
  Tensor result = make_output(std::move(shape), std::move(out));
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kSlice, {xi}, result,
           [xi, outer, row_width, begin, width](const TensorImpl& o) {
             auto& g = grad_buffer(*xi);
             for (std::size_t r = 0; r < outer; ++r) {
               const double* srcg = o.grad.data() + r * width;
               double* dst = g.data() + r * row_width + begin;
               for (std::size_t c = 0; c < width; ++c) dst[c] += srcg[c];
             }
           });
  }
  return result;
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  const std::size_t m = x.dim(0), n = x.dim(1);
  std::vector<double> out(m * n);
  as_matrix(out, n, m) = as_matrix(x.impl()->data, m, n).transpose();
  Tensor result = make_output({n, m}, std::move(out));
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kTranspose, {xi}, result, [xi, m, n](const TensorImpl& o) {
      as_matrix(grad_buffer(*xi), m, n) += as_matrix(o.grad, n, m).transpose();
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  require_rank(x, 2, "gather_rows");
  if (rows.empty()) throw DimensionError("gather_rows: no rows requested");
  const std::size_t n = x.dim(0), d = x.dim(1);
  std::vector<double> out(rows.size() * d);
  const auto& src = x.impl()->data;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n) {
      throw DimensionError("gather_rows: row " + std::to_string(rows[i]) +
                           " out of range for shape " +
                           shape_string(x.shape()));
    }
    std::copy_n(src.data() + rows[i] * d, d, out.data() + i * d);
  }
  Tensor result = make_output({rows.size(), d}, std::move(out));
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    std::vector<std::size_t> picked(rows.begin(), rows.end());
    record(OpKind::kGatherRows, {xi}, result,
           [xi, picked = std::move(picked), d](const TensorImpl& o) {
             auto& g = grad_buffer(*xi);
             for (std::size_t i = 0; i < picked.size(); ++i) {
               const double* srcg = o.grad.data() + i * d;
               double* dst = g.data() + picked[i] * d;
               for (std::size_t c = 0; c < d; ++c) dst[c] += srcg[c];
             }
           });
  }
  return result;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(x.shape()) +
                         " as " + shape_string(shape));
  }
  Tensor result = make_output(std::move(shape), x.impl()->data);
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kReshape, {xi}, result, [xi](const TensorImpl& o) {
      auto& g = grad_buffer(*xi);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
    });
  }
  return result;
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw DomainError("dropout: rate must lie in [0, 1)");
  }
  if (rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const double boost = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = keep(rng) ? boost : 0.0;
  std::vector<double> out(x.impl()->data);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  Tensor result = make_output(x.shape(), std::move(out));
  if (recording({&x})) {
    ImplPtr xi = x.impl();
    record(OpKind::kDropout, {xi}, result,
           [xi, mask = std::move(mask)](const TensorImpl& o) {
             auto& g = grad_buffer(*xi);
             for (std::size_t i = 0; i < g.size(); ++i) {
               g[i] += o.grad[i] * mask[i];
             }
           });
  }
  return result;
}

}  // namespace vhd::diff
