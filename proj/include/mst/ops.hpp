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

#pragma once

#include <span>

#include "mst/random.hpp"
#include "mst/tensor.hpp"

namespace mst {

// Boolean attention mask, row-major [queries x keys]. `true` excludes the
// key from the query's softmax.
using AttentionMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Linear algebra.
Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T without materializing the transpose.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);
// x[m x in] * weight[in x out] + bias[out], bias broadcast over rows.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor transpose(const Tensor& a);

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// Row-wise layer normalization over the last axis of a 2-D tensor.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// Softmax along `axis` (negative counts from the end), max-subtracted.
Tensor softmax(const Tensor& x, int axis = -1);
// Log-softmax along the last axis.
Tensor log_softmax(const Tensor& x);

// Scaled dot-product attention, softmax(q k^T / sqrt(d) + mask) v.
// A query whose keys are all masked yields a zero row; with `strict` set it
// raises DecodeError instead.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 const AttentionMask* mask = nullptr, bool strict = false);

// Multi-head variant: heads split the model dimension into equal slices.
// `causal` additionally masks keys j > i.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                            const AttentionMask* mask = nullptr, bool causal = false,
                            bool strict = false);

// Output length of a 1-D convolution; throws DimensionError when the window
// does not fit the padded input.
Index conv1d_output_length(Index length, Index kernel, Index stride, Index padding);

// x[C_in x L] convolved with w[C_out x C_in x K], zero padding on both ends.
Tensor conv1d(const Tensor& x, const Tensor& w, Index stride, Index padding);
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, Index stride, Index padding);

// Row lookup table[ids]. Out-of-range ids raise DataError.
Tensor embedding(const Tensor& table, std::span<const int> ids);
Tensor gather_rows(const Tensor& x, std::span<const Index> rows);
Tensor slice_rows(const Tensor& x, Index begin, Index count);
// y(i, j) = x(i, cols(i, j)).
using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
Tensor take_along_rows(const Tensor& x, const IndexMatrix& cols);
// Copy of x with the listed rows replaced by `row` [1 x d].
Tensor replace_rows(const Tensor& x, std::span<const Index> rows, const Tensor& row);

Tensor l2_normalize_rows(const Tensor& x, double eps = 1e-12);
Tensor mean_rows(const Tensor& x);

// Reductions to a scalar of shape [1].
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// sum(weights * x) with constant weights of x's size.
Tensor weighted_sum(const Tensor& x, const Vector& weights);

Tensor stop_gradient(const Tensor& x);
Tensor dropout(const Tensor& x, double p, Rng& rng);

}  // namespace mst
