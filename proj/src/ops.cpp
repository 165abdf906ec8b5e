/*
   Copyright 2026 The mst Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "mst/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mst/error.hpp"

namespace mst {

namespace {

using detail::Node;

ConstMatrixMap view(const Vector& v, Index rows, Index cols) {
  return ConstMatrixMap(v.data(), rows, cols);
}

ConstMatrixMap value_of(const Node& n, Index rows, Index cols) { return view(n.value, rows, cols); }

Vector flatten(const RowMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

void require_2d(const Tensor& t, const char* op) {
  if (t.dim() != 2) {
    throw DimensionError(std::string(op) + ": expected a 2-D tensor, got " +
                         shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes differ, " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void accumulate_mat(Node& p, const RowMatrix& g) {
  if (p.requires_grad) p.accumulate(Eigen::Map<const Vector>(g.data(), g.size()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const Index m = a.rows(), k = a.cols(), n = b.cols();
  RowMatrix c = a.mat() * b.mat();
  return make_result({m, n}, flatten(c), {a, b}, [m, k, n](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    auto g = view(out.grad, m, n);
    if (pa.requires_grad) accumulate_mat(pa, g * value_of(pb, k, n).transpose());
    if (pb.requires_grad) accumulate_mat(pb, value_of(pa, m, k).transpose() * g);
  });
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul_transposed");
  require_2d(b, "matmul_transposed");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_transposed: widths differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  const Index m = a.rows(), k = a.cols(), n = b.rows();
  RowMatrix c = a.mat() * b.mat().transpose();
  return make_result({m, n}, flatten(c), {a, b}, [m, k, n](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    auto g = view(out.grad, m, n);
    if (pa.requires_grad) accumulate_mat(pa, g * value_of(pb, n, k));
    if (pb.requires_grad) accumulate_mat(pb, g.transpose() * value_of(pa, m, k));
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_2d(x, "linear");
  require_2d(weight, "linear");
  if (x.cols() != weight.rows() || bias.size() != weight.cols()) {
    throw DimensionError("linear: input " + shape_string(x.shape()) + ", weight " +
                         shape_string(weight.shape()) + ", bias " + shape_string(bias.shape()));
  }
  const Index m = x.rows(), k = x.cols(), n = weight.cols();
  RowMatrix y = x.mat() * weight.mat();
  y.rowwise() += bias.value().transpose();
  return make_result({m, n}, flatten(y), {x, weight, bias}, [m, k, n](Node& out) {
    Node& px = *out.parents[0];
    Node& pw = *out.parents[1];
    Node& pb = *out.parents[2];
    auto g = view(out.grad, m, n);
    if (px.requires_grad) accumulate_mat(px, g * value_of(pw, k, n).transpose());
    if (pw.requires_grad) accumulate_mat(pw, value_of(px, m, k).transpose() * g);
    if (pb.requires_grad) pb.accumulate(g.colwise().sum().transpose());
  });
}

Tensor transpose(const Tensor& a) {
  require_2d(a, "transpose");
  const Index m = a.rows(), n = a.cols();
  RowMatrix t = a.mat().transpose();
  return make_result({n, m}, flatten(t), {a}, [m, n](Node& out) {
    accumulate_mat(*out.parents[0], view(out.grad, n, m).transpose());
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return make_result(a.shape(), a.value() + b.value(), {a, b}, [](Node& out) {
    for (auto& p : out.parents) {
      if (p->requires_grad) p->accumulate(out.grad);
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return make_result(a.shape(), a.value() - b.value(), {a, b}, [](Node& out) {
    if (out.parents[0]->requires_grad) out.parents[0]->accumulate(out.grad);
    if (out.parents[1]->requires_grad) out.parents[1]->accumulate(-out.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Vector v = a.value().cwiseProduct(b.value());
  return make_result(a.shape(), std::move(v), {a, b}, [](Node& out) {
    Node& pa = *out.parents[0];
    Node& pb = *out.parents[1];
    if (pa.requires_grad) pa.accumulate(out.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(out.grad.cwiseProduct(pa.value));
  });
}

Tensor scale(const Tensor& a, double s) {
  return make_result(a.shape(), a.value() * s, {a},
                     [s](Node& out) { out.parents[0]->accumulate(out.grad * s); });
}

Tensor relu(const Tensor& a) {
  Vector v = a.value().cwiseMax(0.0);
  return make_result(a.shape(), std::move(v), {a}, [](Node& out) {
    Node& p = *out.parents[0];
    p.accumulate((p.value.array() > 0.0).select(out.grad, 0.0));
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_2d(x, "layer_norm");
  const Index m = x.rows(), d = x.cols();
  if (gamma.size() != d || beta.size() != d) {
    throw DimensionError("layer_norm: input " + shape_string(x.shape()) + ", gamma " +
                         shape_string(gamma.shape()) + ", beta " + shape_string(beta.shape()));
  }
  auto xm = x.mat();
  RowMatrix xhat(m, d);
  Vector inv_std(m);
  for (Index i = 0; i < m; ++i) {
    const double mu = xm.row(i).mean();
    const double var = (xm.row(i).array() - mu).square().mean();
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (xm.row(i).array() - mu) * inv_std[i];
  }
  RowMatrix y = (xhat.array().rowwise() * gamma.value().transpose().array()).matrix();
  y.rowwise() += beta.value().transpose();
  return make_result({m, d}, flatten(y), {x, gamma, beta},
                     [m, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& out) {
                       Node& px = *out.parents[0];
                       Node& pg = *out.parents[1];
                       Node& pb = *out.parents[2];
                       auto g = view(out.grad, m, d);
                       if (pb.requires_grad) pb.accumulate(g.colwise().sum().transpose());
                       if (pg.requires_grad) {
                         pg.accumulate(g.cwiseProduct(xhat).colwise().sum().transpose());
                       }
                       if (px.requires_grad) {
                         RowMatrix dxhat = (g.array().rowwise() * pg.value.transpose().array()).matrix();
                         RowMatrix dx(m, d);
                         for (Index i = 0; i < m; ++i) {
                           const double mean_d = dxhat.row(i).mean();
                           const double mean_dx = dxhat.row(i).dot(xhat.row(i)) / static_cast<double>(d);
                           dx.row(i) = inv_std[i] * (dxhat.row(i).array() - mean_d -
                                                     xhat.row(i).array() * mean_dx);
                         }
                         accumulate_mat(px, dx);
                       }
                     });
}

Tensor softmax(const Tensor& x, int axis) {
  const int nd = static_cast<int>(x.dim());
  if (axis < 0) axis += nd;
  if (axis < 0 || axis >= nd) {
    throw DimensionError("softmax: axis out of range for shape " + shape_string(x.shape()));
  }
  Index outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= x.shape()[i];
  for (int i = axis + 1; i < nd; ++i) inner *= x.shape()[i];
  const Index len = x.shape()[axis];
  const Vector& in = x.value();
  Vector y(in.size());
  for (Index o = 0; o < outer; ++o) {
    for (Index j = 0; j < inner; ++j) {
      const Index base = o * len * inner + j;
      double mx = -std::numeric_limits<double>::infinity();
      for (Index t = 0; t < len; ++t) mx = std::max(mx, in[base + t * inner]);
      double z = 0.0;
      for (Index t = 0; t < len; ++t) {
        const double e = std::exp(in[base + t * inner] - mx);
        y[base + t * inner] = e;
        z += e;
      }
      for (Index t = 0; t < len; ++t) y[base + t * inner] /= z;
    }
  }
  return make_result(x.shape(), y, {x}, [outer, inner, len](Node& out) {
    const Vector& yv = out.value;
    Vector dx(yv.size());
    for (Index o = 0; o < outer; ++o) {
      for (Index j = 0; j < inner; ++j) {
        const Index base = o * len * inner + j;
        double dot = 0.0;
        for (Index t = 0; t < len; ++t) dot += out.grad[base + t * inner] * yv[base + t * inner];
        for (Index t = 0; t < len; ++t) {
          const Index i = base + t * inner;
          dx[i] = yv[i] * (out.grad[i] - dot);
        }
      }
    }
    out.parents[0]->accumulate(dx);
  });
}

Tensor log_softmax(const Tensor& x) {
  const Index m = x.rows(), n = x.cols();
  auto xm = x.mat();
  RowMatrix y(m, n);
  for (Index i = 0; i < m; ++i) {
    const double mx = xm.row(i).maxCoeff();
    const double lse = mx + std::log((xm.row(i).array() - mx).exp().sum());
    y.row(i) = xm.row(i).array() - lse;
  }
  return make_result(x.shape(), flatten(y), {x}, [m, n](Node& out) {
    auto g = view(out.grad, m, n);
    auto ym = view(out.value, m, n);
    RowMatrix dx = g - (ym.array().exp().colwise() * g.rowwise().sum().array()).matrix();
    accumulate_mat(*out.parents[0], dx);
  });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask* mask,
                 bool strict) {
  return multi_head_attention(q, k, v, 1, mask, false, strict);
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                            const AttentionMask* mask, bool causal, bool strict) {
  require_2d(q, "attention");
  require_2d(k, "attention");
  require_2d(v, "attention");
  const Index m = q.rows(), n = k.rows(), d = q.cols(), dv = v.cols();
  if (k.cols() != d || v.rows() != n) {
    throw DimensionError("attention: q " + shape_string(q.shape()) + ", k " +
                         shape_string(k.shape()) + ", v " + shape_string(v.shape()));
  }
  if (heads < 1 || d % heads != 0 || dv % heads != 0) {
    throw DimensionError("attention: " + std::to_string(heads) + " heads do not divide width " +
                         std::to_string(d));
  }
  if (mask != nullptr && (mask->rows() != m || mask->cols() != n)) {
    throw DimensionError("attention: mask [" + std::to_string(mask->rows()) + "x" +
                         std::to_string(mask->cols()) + "] does not match scores [" +
                         std::to_string(m) + "x" + std::to_string(n) + "]");
  }
  const Index dh = d / heads, dvh = dv / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  auto excluded = [&](Index i, Index j) {
    return (causal && j > i) || (mask != nullptr && (*mask)(i, j));
  };
  bool any_masked = causal || mask != nullptr;
  std::vector<bool> dead_row(static_cast<std::size_t>(m), false);
  if (any_masked) {
    for (Index i = 0; i < m; ++i) {
      bool all = true;
      for (Index j = 0; j < n && all; ++j) all = excluded(i, j);
      if (all) {
        if (strict) {
          throw DecodeError("attention: query row " + std::to_string(i) + " has every key masked");
        }
        dead_row[static_cast<std::size_t>(i)] = true;
      }
    }
  }

  auto qm = q.mat();
  auto km = k.mat();
  auto vm = v.mat();
  std::vector<RowMatrix> probs(static_cast<std::size_t>(heads));
  RowMatrix outm(m, dv);
  for (int h = 0; h < heads; ++h) {
    RowMatrix s = (qm.middleCols(h * dh, dh) * km.middleCols(h * dh, dh).transpose()) * inv_sqrt;
    for (Index i = 0; i < m; ++i) {
      if (dead_row[static_cast<std::size_t>(i)]) {
        s.row(i).setZero();
        continue;
      }
      double mx = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < n; ++j) {
        if (any_masked && excluded(i, j)) continue;
        mx = std::max(mx, s(i, j));
      }
      double z = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (any_masked && excluded(i, j)) {
          s(i, j) = 0.0;
        } else {
          s(i, j) = std::exp(s(i, j) - mx);
          z += s(i, j);
        }
      }
      s.row(i) /= z;
    }
    outm.middleCols(h * dvh, dvh) = s * vm.middleCols(h * dvh, dvh);
    probs[static_cast<std::size_t>(h)] = std::move(s);
  }

  return make_result({m, dv}, flatten(outm), {q, k, v},
                     [m, n, d, dv, dh, dvh, heads, inv_sqrt,
                      probs = std::move(probs)](Node& out) {
                       Node& pq = *out.parents[0];
                       Node& pk = *out.parents[1];
                       Node& pv = *out.parents[2];
                       auto g = view(out.grad, m, dv);
                       auto qv = value_of(pq, m, d);
                       auto kv = value_of(pk, n, d);
                       auto vv = value_of(pv, n, dv);
                       RowMatrix dq = RowMatrix::Zero(m, d);
                       RowMatrix dk = RowMatrix::Zero(n, d);
                       RowMatrix dvm = RowMatrix::Zero(n, dv);
                       for (int h = 0; h < heads; ++h) {
                         const RowMatrix& p = probs[static_cast<std::size_t>(h)];
                         auto gh = g.middleCols(h * dvh, dvh);
                         if (pv.requires_grad) dvm.middleCols(h * dvh, dvh) = p.transpose() * gh;
                         if (!pq.requires_grad && !pk.requires_grad) continue;
                         RowMatrix dp = gh * vv.middleCols(h * dvh, dvh).transpose();
                         Eigen::VectorXd rs = dp.cwiseProduct(p).rowwise().sum();
                         RowMatrix ds = (p.array() * (dp.colwise() - rs).array()).matrix() * inv_sqrt;
                         if (pq.requires_grad) dq.middleCols(h * dh, dh) = ds * kv.middleCols(h * dh, dh);
                         if (pk.requires_grad) {
                           dk.middleCols(h * dh, dh) = ds.transpose() * qv.middleCols(h * dh, dh);
                         }
                       }
                       if (pq.requires_grad) accumulate_mat(pq, dq);
                       if (pk.requires_grad) accumulate_mat(pk, dk);
                       if (pv.requires_grad) accumulate_mat(pv, dvm);
                     });
}

Index conv1d_output_length(Index length, Index kernel, Index stride, Index padding) {
  if (stride < 1 || padding < 0 || kernel < 1) {
    throw DimensionError("conv1d: need stride >= 1, padding >= 0, kernel >= 1 (got stride " +
                         std::to_string(stride) + ", padding " + std::to_string(padding) +
                         ", kernel " + std::to_string(kernel) + ")");
  }
  if (kernel > length + 2 * padding) {
    throw DimensionError("conv1d: kernel " + std::to_string(kernel) +
                         " is larger than padded input length " +
                         std::to_string(length + 2 * padding));
  }
  return (length + 2 * padding - kernel) / stride + 1;
}

namespace {

Tensor conv1d_impl(const Tensor& x, const Tensor& w, const Tensor* bias, Index stride,
                   Index padding) {
  require_2d(x, "conv1d");
  if (w.dim() != 3 || w.shape()[1] != x.rows()) {
    throw DimensionError("conv1d: input " + shape_string(x.shape()) + " and weight " +
                         shape_string(w.shape()) + " are incompatible");
  }
  const Index cin = x.rows(), len = x.cols();
  const Index cout = w.shape()[0], kernel = w.shape()[2];
  if (bias != nullptr && bias->size() != cout) {
    throw DimensionError("conv1d: bias " + shape_string(bias->shape()) + " for " +
                         std::to_string(cout) + " output channels");
  }
  const Index out_len = conv1d_output_length(len, kernel, stride, padding);

  auto xm = x.mat();
  RowMatrix cols = RowMatrix::Zero(cin * kernel, out_len);
  for (Index c = 0; c < cin; ++c) {
    for (Index kk = 0; kk < kernel; ++kk) {
      for (Index t = 0; t < out_len; ++t) {
        const Index src = t * stride + kk - padding;
        if (src >= 0 && src < len) cols(c * kernel + kk, t) = xm(c, src);
      }
    }
  }
  ConstMatrixMap wm(w.value().data(), cout, cin * kernel);
  RowMatrix y = wm * cols;
  if (bias != nullptr) y.colwise() += bias->value();

  auto backward = [cin, len, cout, kernel, out_len, stride, padding,
                   cols = std::move(cols)](Node& out) {
    Node& px = *out.parents[0];
    Node& pw = *out.parents[1];
    auto g = view(out.grad, cout, out_len);
    if (pw.requires_grad) accumulate_mat(pw, g * cols.transpose());
    if (out.parents.size() > 2 && out.parents[2]->requires_grad) {
      out.parents[2]->accumulate(g.rowwise().sum());
    }
    if (px.requires_grad) {
      RowMatrix dcols = value_of(pw, cout, cin * kernel).transpose() * g;
      RowMatrix dx = RowMatrix::Zero(cin, len);
      for (Index c = 0; c < cin; ++c) {
        for (Index kk = 0; kk < kernel; ++kk) {
          for (Index t = 0; t < out_len; ++t) {
            const Index src = t * stride + kk - padding;
            if (src >= 0 && src < len) dx(c, src) += dcols(c * kernel + kk, t);
          }
        }
      }
      accumulate_mat(px, dx);
    }
  };
  if (bias != nullptr) return make_result({cout, out_len}, flatten(y), {x, w, *bias}, backward);
  return make_result({cout, out_len}, flatten(y), {x, w}, backward);
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& w, Index stride, Index padding) {
  return conv1d_impl(x, w, nullptr, stride, padding);
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, Index stride, Index padding) {
  return conv1d_impl(x, w, &bias, stride, padding);
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
  require_2d(table, "embedding");
  const Index vocab = table.rows(), d = table.cols();
  std::vector<Index> rows(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw DataError("embedding: id " + std::to_string(ids[i]) + " at position " +
                      std::to_string(i) + " outside vocabulary of " + std::to_string(vocab));
    }
    rows[i] = ids[i];
  }
  (void)d;
  return gather_rows(table, rows);
}

Tensor gather_rows(const Tensor& x, std::span<const Index> rows) {
  require_2d(x, "gather_rows");
  const Index n = static_cast<Index>(rows.size()), d = x.cols(), total = x.rows();
  if (n == 0) throw DimensionError("gather_rows: empty row list");
  auto xm = x.mat();
  RowMatrix y(n, d);
  for (Index i = 0; i < n; ++i) {
    const Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= total) {
      throw DimensionError("gather_rows: row " + std::to_string(r) + " outside " +
                           shape_string(x.shape()));
    }
    y.row(i) = xm.row(r);
  }
  std::vector<Index> idx(rows.begin(), rows.end());
  return make_result({n, d}, flatten(y), {x}, [n, d, total, idx = std::move(idx)](Node& out) {
    Node& p = *out.parents[0];
    if (p.grad.size() == 0) p.grad = Vector::Zero(total * d);
    MatrixMap pg(p.grad.data(), total, d);
    auto g = view(out.grad, n, d);
    for (Index i = 0; i < n; ++i) pg.row(idx[static_cast<std::size_t>(i)]) += g.row(i);
  });
}

Tensor slice_rows(const Tensor& x, Index begin, Index count) {
  require_2d(x, "slice_rows");
  if (begin < 0 || count < 1 || begin + count > x.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside " + shape_string(x.shape()));
  }
  std::vector<Index> rows(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) rows[static_cast<std::size_t>(i)] = begin + i;
  return gather_rows(x, rows);
}

Tensor take_along_rows(const Tensor& x, const IndexMatrix& cols) {
  require_2d(x, "take_along_rows");
  const Index m = x.rows(), n = x.cols(), k = cols.cols();
  if (cols.rows() != m || k < 1) {
    throw DimensionError("take_along_rows: index matrix [" + std::to_string(cols.rows()) + "x" +
                         std::to_string(k) + "] for " + shape_string(x.shape()));
  }
  if ((cols.array() < 0).any() || (cols.array() >= n).any()) {
    throw DimensionError("take_along_rows: column index outside " + shape_string(x.shape()));
  }
  auto xm = x.mat();
  RowMatrix y(m, k);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < k; ++j) y(i, j) = xm(i, cols(i, j));
  }
  return make_result({m, k}, flatten(y), {x}, [m, n, k, cols](Node& out) {
    Node& p = *out.parents[0];
    if (p.grad.size() == 0) p.grad = Vector::Zero(m * n);
    MatrixMap pg(p.grad.data(), m, n);
    auto g = view(out.grad, m, k);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < k; ++j) pg(i, cols(i, j)) += g(i, j);
    }
  });
}

Tensor replace_rows(const Tensor& x, std::span<const Index> rows, const Tensor& row) {
  require_2d(x, "replace_rows");
  const Index m = x.rows(), d = x.cols();
  if (row.size() != d) {
    throw DimensionError("replace_rows: row " + shape_string(row.shape()) + " for " +
                         shape_string(x.shape()));
  }
  RowMatrix y = x.mat();
  std::vector<bool> replaced(static_cast<std::size_t>(m), false);
  for (Index r : rows) {
    if (r < 0 || r >= m) throw DimensionError("replace_rows: row index out of range");
    y.row(r) = row.value().transpose();
    replaced[static_cast<std::size_t>(r)] = true;
  }
  return make_result({m, d}, flatten(y), {x, row},
                     [m, d, replaced = std::move(replaced)](Node& out) {
                       Node& px = *out.parents[0];
                       Node& pr = *out.parents[1];
                       auto g = view(out.grad, m, d);
                       RowMatrix dx = g;
                       Vector drow = Vector::Zero(d);
                       for (Index i = 0; i < m; ++i) {
                         if (replaced[static_cast<std::size_t>(i)]) {
                           drow += g.row(i).transpose();
                           dx.row(i).setZero();
                         }
                       }
                       if (px.requires_grad) accumulate_mat(px, dx);
                       if (pr.requires_grad) pr.accumulate(drow);
                     });
}

Tensor l2_normalize_rows(const Tensor& x, double eps) {
  require_2d(x, "l2_normalize_rows");
  const Index m = x.rows(), d = x.cols();
  auto xm = x.mat();
  Vector norms = xm.rowwise().norm().cwiseMax(eps);
  RowMatrix y = xm.array().colwise() / norms.array();
  return make_result({m, d}, flatten(y), {x}, [m, d, norms = std::move(norms)](Node& out) {
    auto g = view(out.grad, m, d);
    auto y = view(out.value, m, d);
    Vector proj = g.cwiseProduct(y).rowwise().sum();
    RowMatrix dx = ((g - (y.array().colwise() * proj.array()).matrix()).array().colwise() /
                    norms.array())
                       .matrix();
    accumulate_mat(*out.parents[0], dx);
  });
}

Tensor mean_rows(const Tensor& x) {
  require_2d(x, "mean_rows");
  const Index m = x.rows(), d = x.cols();
  Vector mu = x.mat().colwise().mean().transpose();
  return make_result({1, d}, std::move(mu), {x}, [m, d](Node& out) {
    RowMatrix dx = out.grad.transpose().replicate(m, 1) / static_cast<double>(m);
    accumulate_mat(*out.parents[0], dx);
  });
}

Tensor sum(const Tensor& x) {
  return make_result({1}, Vector::Constant(1, x.value().sum()), {x}, [](Node& out) {
    Node& p = *out.parents[0];
    p.accumulate(Vector::Constant(p.value.size(), out.grad[0]));
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor weighted_sum(const Tensor& x, const Vector& weights) {
  if (weights.size() != x.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(weights.size()) + " weights for " +
                         shape_string(x.shape()));
  }
  return make_result({1}, Vector::Constant(1, x.value().dot(weights)), {x},
                     [weights](Node& out) { out.parents[0]->accumulate(weights * out.grad[0]); });
}

Tensor stop_gradient(const Tensor& x) { return Tensor::constant(x.shape(), x.value()); }

Tensor dropout(const Tensor& x, double p, Rng& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw UsageError("dropout: probability must be < 1");
  Vector keep(x.size());
  const double s = 1.0 / (1.0 - p);
  for (Index i = 0; i < keep.size(); ++i) keep[i] = rng.uniform() < p ? 0.0 : s;
  return mul(x, Tensor::constant(x.shape(), std::move(keep)));
}

}  // namespace mst
